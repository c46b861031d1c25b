"""Self-contained primal-dual interior-point solver for semidefinite programs.

Standard constraint form: minimize ``F . X`` over symmetric PSD ``X`` subject
to ``<G_k, X> = b_k``; the dual maximizes ``b^T y`` subject to
``F - sum_k y_k G_k`` PSD.  The algorithm is path-following with
Nesterov-Todd scaling and a Mehrotra predictor-corrector, run on the
homogeneous self-dual embedding so that primal or dual infeasibility is
detected through the collapse of the embedding's tau/kappa ratio instead of
by divergence heuristics.  The (dense, SPD) Schur complement of the Newton
system is solved with the package's own Cholesky.

Linear programs ride on the same engine as the diagonal special case: with
diagonal data and the deterministic diagonal initialization every iterate
stays exactly diagonal, so no off-diagonal pinning constraints are needed.

A solve call is single-threaded, deterministic and reentrant; independent
problem instances may be solved concurrently.
"""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field

import numpy as np

from .linalg import NotPositiveDefiniteError, psd_factor, spd_cholesky


class SdpStatus(enum.Enum):
    OPTIMAL = "optimal"
    PRIMAL_INFEASIBLE = "primal_infeasible"   # certified by an improving dual ray
    DUAL_INFEASIBLE = "dual_infeasible"       # primal objective unbounded below
    ITERATION_LIMIT = "iteration_limit"
    NUMERICAL_TROUBLE = "numerical_trouble"


class SdpFailure(RuntimeError):
    """Raised by callers that cannot proceed under a non-optimal status."""

    def __init__(self, status: SdpStatus, detail: str = ""):
        super().__init__(f"SDP solve failed with status {status.value} {detail}".strip())
        self.status = status


@dataclass
class SdpOptions:
    feas_tol: float = 1e-8
    gap_tol: float = 1e-8
    psd_tol: float = 1e-9
    max_iter: int = 200
    step_fraction: float = 0.95
    sigma_floor: float = 0.05     # minimum centering weight, keeps iterates near-central
    infeas_ratio: float = 1e-8   # tau/kappa collapse threshold of the embedding
    rank_filter: bool = True
    slack_goal: float = 1e-8     # target for ||X S||_F / (1 + ||X||_F) in polish
    polish_iters: int = 8        # extra centering steps allowed after convergence

    def as_dict(self) -> dict:
        return {
            "feas_tol": self.feas_tol,
            "gap_tol": self.gap_tol,
            "psd_tol": self.psd_tol,
            "max_iter": self.max_iter,
        }


class SdpProblem:
    """Constraint-form SDP data: cost F and equality pairs (G_k, b_k).

    Constraint matrices are sparse coordinate maps ``{(i, j): v}`` with
    ``i <= j``; an off-diagonal entry v stands for the symmetric pair, so
    ``<G, X> = sum v * X[i,j] * (2 if i < j else 1)``.
    """

    def __init__(self, dim: int, F: np.ndarray, constraints):
        self.dim = int(dim)
        F = np.asarray(F, dtype=float)
        if F.shape != (self.dim, self.dim):
            raise ValueError(f"F must be {self.dim}x{self.dim}")
        scale = max(1.0, float(np.max(np.abs(F))) if F.size else 1.0)
        if self.dim and np.max(np.abs(F - F.T)) > 1e-12 * scale:
            raise ValueError("F must be symmetric")
        self.F = (F + F.T) / 2.0
        self.constraints = []
        for g, bk in constraints:
            gd = {}
            for (i, j), v in g.items():
                if not (0 <= i <= j < self.dim):
                    raise ValueError(f"constraint entry ({i},{j}) out of range or not upper")
                if v != 0:
                    gd[(i, j)] = float(v)
            self.constraints.append((gd, float(bk)))

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def constraint_dense(self, k: int) -> np.ndarray:
        G = np.zeros((self.dim, self.dim))
        for (i, j), v in self.constraints[k][0].items():
            G[i, j] = v
            G[j, i] = v
        return G

    def b_vector(self) -> np.ndarray:
        return np.array([bk for _, bk in self.constraints])


@dataclass
class IterateRecord:
    iteration: int
    mu: float
    tau: float
    kappa: float
    alpha: float
    rel_primal: float
    rel_dual: float
    primal_obj: float
    dual_obj: float
    embedding_gap: float


@dataclass
class SdpSolution:
    status: SdpStatus
    X: np.ndarray | None
    y: np.ndarray | None
    S: np.ndarray | None
    primal_obj: float | None
    dual_obj: float | None
    gap: float | None
    iterations: int
    trace: list[IterateRecord] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    tolerances: dict = field(default_factory=dict)
    certificate: dict | None = None


# ---------------------------------------------------------------------------
# Vectorization helpers (upper-triangle flattening)
# ---------------------------------------------------------------------------

class _Vectorizer:
    def __init__(self, N: int):
        self.N = N
        self.iu = np.triu_indices(N)
        self.weights = np.where(self.iu[0] == self.iu[1], 1.0, 2.0)

    def plain(self, A: np.ndarray) -> np.ndarray:
        return A[self.iu]

    def expand(self, vec: np.ndarray) -> np.ndarray:
        full = np.zeros((self.N, self.N))
        full[self.iu] = vec
        full = full + full.T
        full[np.diag_indices(self.N)] /= 2.0
        return full


def _sym(A: np.ndarray) -> np.ndarray:
    return (A + A.T) / 2.0


def _max_psd_step(Xmat: np.ndarray, dX: np.ndarray) -> float:
    """Largest alpha with Xmat + alpha*dX still PSD (Xmat PD); 0 on breakdown."""
    if not (np.all(np.isfinite(Xmat)) and np.all(np.isfinite(dX))):
        return 0.0
    try:
        chol = spd_cholesky(Xmat)
        Z = chol.forward(dX)
        A = chol.forward(Z.T)
        lam_min = float(np.linalg.eigvalsh(_sym(A))[0])
    except (NotPositiveDefiniteError, np.linalg.LinAlgError):
        try:
            w, U = np.linalg.eigh(_sym(Xmat))
            w = np.maximum(w, 1e-14 * max(1.0, float(np.max(np.abs(w)))))
            R = (U / np.sqrt(w)) @ U.T
            lam_min = float(np.linalg.eigvalsh(_sym(R @ dX @ R))[0])
        except np.linalg.LinAlgError:
            return 0.0
    if not np.isfinite(lam_min):
        return 0.0
    if lam_min >= -1e-16:
        return np.inf
    return -1.0 / lam_min


class _NtFrame:
    """Nesterov-Todd scaling data for one iteration.

    W satisfies W S W = X; ``lam`` is the common scaled point
    W^{-1/2} X W^{-1/2} = W^{1/2} S W^{1/2}, whose eigenbasis makes the
    linearized complementarity a diagonal Lyapunov solve.
    """

    def __init__(self, X: np.ndarray, S: np.ndarray):
        es, Us = np.linalg.eigh(S)
        es = np.maximum(es, 1e-300)
        S_half = (Us * np.sqrt(es)) @ Us.T
        S_mhalf = (Us / np.sqrt(es)) @ Us.T
        self.S_inv = _sym((Us / es) @ Us.T)
        T = _sym(S_half @ X @ S_half)
        et, Ut = np.linalg.eigh(T)
        et = np.maximum(et, 1e-300)
        T_half = (Ut * np.sqrt(et)) @ Ut.T
        self.W = _sym(S_mhalf @ T_half @ S_mhalf)
        ew, Uw = np.linalg.eigh(self.W)
        ew = np.maximum(ew, 1e-300)
        self.W_half = (Uw * np.sqrt(ew)) @ Uw.T
        self.W_mhalf = (Uw / np.sqrt(ew)) @ Uw.T
        lam = _sym(self.W_mhalf @ X @ self.W_mhalf)
        self.lam_vals, self.lam_vecs = np.linalg.eigh(lam)
        self.lam = lam

    def lyapunov_solve(self, R: np.ndarray) -> np.ndarray:
        """Solve lam o U = R (o the symmetrized product) for symmetric U."""
        Q = self.lam_vecs
        Rt = Q.T @ R @ Q
        denom = 0.5 * (self.lam_vals[:, None] + self.lam_vals[None, :])
        return _sym(Q @ (Rt / denom) @ Q.T)

    def second_order_residual(self, sigma_mu: float, dXa: np.ndarray,
                              dSa: np.ndarray) -> np.ndarray:
        """Mehrotra corrector right-hand side in the original space."""
        dXs = _sym(self.W_mhalf @ dXa @ self.W_mhalf)
        dSs = _sym(self.W_half @ dSa @ self.W_half)
        cross = _sym(dXs @ dSs)
        R = sigma_mu * np.eye(len(dXa)) - _sym(self.lam @ self.lam) - cross
        U = self.lyapunov_solve(R)
        return _sym(self.W_half @ U @ self.W_half)


# ---------------------------------------------------------------------------
# Rank filter
# ---------------------------------------------------------------------------

def _rank_filter(prob: SdpProblem, vec: _Vectorizer, warnings_out: list[str]):
    """Drop linearly dependent constraint rows; flag inconsistent duplicates.

    Returns (kept_indices, inconsistent: bool).
    """
    M = prob.num_constraints
    if M <= 1:
        return list(range(M)), False
    plain = np.zeros((M, len(vec.weights)))
    for k, (g, _) in enumerate(prob.constraints):
        row = plain[k]
        for (i, j), v in g.items():
            row[_tri_pos(vec.N, i, j)] = v
    weighted = plain * vec.weights
    gram = weighted @ plain.T
    fact = psd_factor(_sym(gram), tol=1e-13)
    kept = sorted(fact.pivots[: fact.rank]) if fact.rank else []
    if len(kept) == M:
        return kept, False
    b = prob.b_vector()
    dropped = [k for k in range(M) if k not in set(kept)]
    if kept:
        A_kept = weighted[kept]
        gram_kept = gram[np.ix_(kept, kept)]
        for k in dropped:
            rhs = A_kept @ plain[k]
            coeff, *_ = np.linalg.lstsq(gram_kept, rhs, rcond=None)
            if abs(b[k] - coeff @ b[kept]) > 1e-8 * (1.0 + abs(b[k])):
                return kept, True
    else:
        for k in dropped:
            if abs(b[k]) > 1e-12:
                return kept, True
    warnings_out.append(
        f"removed {len(dropped)} linearly dependent constraint row(s): {dropped}"
    )
    return kept, False


def _tri_pos(N: int, i: int, j: int) -> int:
    # position of (i, j), i <= j, in row-major upper-triangle order
    return i * N - i * (i - 1) // 2 + (j - i)


# ---------------------------------------------------------------------------
# Main solver
# ---------------------------------------------------------------------------

def solve(prob: SdpProblem, opts: SdpOptions | None = None) -> SdpSolution:
    """Solve the SDP on the homogeneous self-dual embedding.

    Deterministic for identical inputs and options: fixed initialization
    X = S = I * (1 + max|b| + max|F|), y = 0, tau = kappa = 1, and no
    randomized pivoting anywhere.
    """
    opts = opts or SdpOptions()
    warnings_out: list[str] = []
    N = prob.dim
    vec = _Vectorizer(N)

    kept = list(range(prob.num_constraints))
    if opts.rank_filter and prob.num_constraints:
        kept, inconsistent = _rank_filter(prob, vec, warnings_out)
        if inconsistent:
            return SdpSolution(
                status=SdpStatus.PRIMAL_INFEASIBLE, X=None, y=None, S=None,
                primal_obj=None, dual_obj=None, gap=None, iterations=0,
                warnings=warnings_out + ["inconsistent dependent constraint rows"],
                tolerances=opts.as_dict(),
            )

    gdicts = [prob.constraints[k][0] for k in kept]
    b = np.array([prob.constraints[k][1] for k in kept])
    M = len(gdicts)
    F = prob.F

    # weighted/plain svec rows of the constraints for fast operator apply
    tri = len(vec.weights)
    Aplain = np.zeros((M, tri))
    for k, g in enumerate(gdicts):
        for (i, j), v in g.items():
            Aplain[k, _tri_pos(N, i, j)] = v
    Aw = Aplain * vec.weights
    dense_G = [prob.constraint_dense(k) for k in kept]

    def gop(Xm: np.ndarray) -> np.ndarray:
        return Aw @ vec.plain(Xm)

    def gadj(yv: np.ndarray) -> np.ndarray:
        return vec.expand(yv @ Aplain)

    bmax = float(np.max(np.abs(b))) if M else 0.0
    fmax = float(np.max(np.abs(F))) if F.size else 0.0
    rho = 1.0 + bmax + fmax
    X = np.eye(N) * rho
    S = np.eye(N) * rho
    y = np.zeros(M)
    tau, kappa = 1.0, 1.0

    trace: list[IterateRecord] = []
    stall_strikes = 0
    last_alpha = 1.0
    best = None          # best converged iterate by slack-product residual
    polish_used = 0

    def finish(status, Xh=None, yh=None, Sh=None, cert=None, iters=0):
        pobj = float(np.tensordot(F, Xh)) if Xh is not None else None
        dobj = float(b @ yh) if yh is not None else None
        gap = pobj - dobj if (pobj is not None and dobj is not None) else None
        y_full = None
        if yh is not None:
            y_full = np.zeros(prob.num_constraints)
            y_full[kept] = yh
        return SdpSolution(
            status=status, X=Xh, y=y_full, S=Sh, primal_obj=pobj, dual_obj=dobj,
            gap=gap, iterations=iters, trace=trace, warnings=warnings_out,
            tolerances=opts.as_dict(), certificate=cert,
        )

    for it in range(opts.max_iter + 1):
        X = _sym(X)
        S = _sym(S)
        FX = float(np.tensordot(F, X))
        by = float(b @ y) if M else 0.0
        XS = float(np.tensordot(X, S))
        mu = (XS + tau * kappa) / (N + 1)

        P = gop(X) - tau * b
        D = gadj(y) + S - tau * F
        g_res = kappa + FX - by

        rel_p = (float(np.max(np.abs(P))) / (tau * (1.0 + bmax))) if M else 0.0
        rel_d = float(np.max(np.abs(D))) / (tau * (1.0 + fmax))
        pobj = FX / tau
        dobj = by / tau
        denom_obj = 1.0 + abs(pobj) + abs(dobj)
        rel_gap = abs(pobj - dobj) / denom_obj
        compl = (XS / tau**2) / denom_obj

        trace.append(IterateRecord(
            iteration=it, mu=mu, tau=tau, kappa=kappa, alpha=last_alpha,
            rel_primal=rel_p, rel_dual=rel_d, primal_obj=pobj, dual_obj=dobj,
            embedding_gap=XS + tau * kappa,
        ))

        converged_now = (
            rel_p <= opts.feas_tol and rel_d <= opts.feas_tol
            and rel_gap <= opts.gap_tol and compl <= opts.gap_tol
        )
        if converged_now:
            # Centering polish: Mehrotra's aggressive last steps leave X*S
            # far from mu*I even though trace complementarity is tiny, so we
            # recenter at the current mu until the slack product is clean.
            Xh, Sh = _sym(X / tau), _sym(S / tau)
            slack_rel = float(np.linalg.norm(Xh @ Sh)) / (1.0 + float(np.linalg.norm(Xh)))
            if best is None or slack_rel < best[0]:
                best = (slack_rel, Xh, y / tau, Sh, it)
            polish_used += 1
            if best[0] <= opts.slack_goal or polish_used > opts.polish_iters:
                return finish(SdpStatus.OPTIMAL, best[1], best[2], best[3], iters=it)
        elif best is not None:
            # roundoff pushed a converged iterate back out; stop polishing
            return finish(SdpStatus.OPTIMAL, best[1], best[2], best[3], iters=it)

        def relaxed_ok():
            # breakdown exits may still carry a usable answer: accept when
            # the current iterate is within 100x of the strict tolerances
            rec = trace[-1]
            denom = 1.0 + abs(rec.primal_obj) + abs(rec.dual_obj)
            rgap = abs(rec.primal_obj - rec.dual_obj) / denom
            cmpl = (max(rec.embedding_gap - rec.tau * rec.kappa, 0.0)
                    / rec.tau**2 / denom)
            return (max(rec.rel_primal, rec.rel_dual) <= 100 * opts.feas_tol
                    and rgap <= 100 * opts.gap_tol
                    and cmpl <= 1e4 * opts.gap_tol)

        def best_or(status):
            if best is not None:
                return finish(SdpStatus.OPTIMAL, best[1], best[2], best[3], iters=it)
            if trace and relaxed_ok():
                warnings_out.append(
                    "converged at reduced accuracy before numerical breakdown"
                )
                return finish(SdpStatus.OPTIMAL, _sym(X / tau), y / tau,
                              _sym(S / tau), iters=it)
            return finish(status, iters=it)

        if tau <= opts.infeas_ratio * max(1.0, kappa):
            # the embedding's tau/kappa balance collapsed: no optimum exists
            if by > 0 and float(np.max(np.abs(gadj(y) + S))) <= 1e-6 * by * (1 + fmax):
                cert = {"kind": "dual_ray", "y": y / by, "S": S / by}
                return finish(SdpStatus.PRIMAL_INFEASIBLE, cert=cert, iters=it)
            gXnorm = float(np.max(np.abs(gop(X)))) if M else 0.0
            if FX < 0 and gXnorm <= 1e-6 * (-FX):
                cert = {"kind": "primal_ray", "X": _sym(X / (-FX))}
                return finish(SdpStatus.DUAL_INFEASIBLE, cert=cert, iters=it)
            # Weakly infeasible regime: tau and kappa vanish together and no
            # Farkas ray exists.  A bounded problem's scaled objective is
            # Cauchy by now, so steady geometric divergence over the recent
            # iterations identifies the unbounded direction.
            past = trace[-9].primal_obj if len(trace) >= 9 else trace[0].primal_obj
            past_d = trace[-9].dual_obj if len(trace) >= 9 else trace[0].dual_obj
            if rel_d <= 1e-5 and pobj < -10 * rho and pobj <= 1.5 * min(past, 0.0):
                warnings_out.append(
                    "unboundedness inferred from objective divergence (no ray)"
                )
                return finish(SdpStatus.DUAL_INFEASIBLE, iters=it)
            if rel_p <= 1e-5 and dobj > 10 * rho and dobj >= 1.5 * max(past_d, 0.0):
                warnings_out.append(
                    "infeasibility inferred from dual objective divergence (no ray)"
                )
                return finish(SdpStatus.PRIMAL_INFEASIBLE, iters=it)
            warnings_out.append("tau/kappa collapsed without a clean certificate")
            return finish(SdpStatus.NUMERICAL_TROUBLE, iters=it)

        if it == opts.max_iter:
            if best is not None:
                return finish(SdpStatus.OPTIMAL, best[1], best[2], best[3], iters=it)
            if relaxed_ok():
                warnings_out.append(
                    "converged at reduced accuracy at the iteration cap"
                )
                return finish(SdpStatus.OPTIMAL, _sym(X / tau), y / tau,
                              _sym(S / tau), iters=it)
            return finish(SdpStatus.ITERATION_LIMIT, _sym(X / tau), y / tau,
                          _sym(S / tau), iters=it)

        try:
            frame = _NtFrame(X, S)
        except np.linalg.LinAlgError:
            warnings_out.append("NT scaling eigendecomposition failed")
            return best_or(SdpStatus.NUMERICAL_TROUBLE)
        W, S_inv = frame.W, frame.S_inv

        # Schur complement in the W metric
        H = np.zeros((M, tri))
        for k in range(M):
            Hk = W @ dense_G[k] @ W
            H[k] = _sym(Hk)[vec.iu]
        Mmat = _sym(Aw @ H.T)
        WFW = _sym(W @ F @ W)
        gvec = gop(WFW)
        phi = float(np.tensordot(F, WFW))
        WDW = _sym(W @ D @ W)

        chol = None
        jitter = 0.0
        base = np.trace(Mmat) / max(M, 1) if M else 1.0
        for attempt in range(3):
            try:
                chol = spd_cholesky(Mmat + jitter * np.eye(M))
                break
            except NotPositiveDefiniteError:
                jitter = max(jitter * 100, 1e-13 * max(base, 1e-30))
        if chol is None and M:
            warnings_out.append("Schur complement lost positive definiteness")
            return best_or(SdpStatus.NUMERICAL_TROUBLE)

        u = gvec + b
        v2 = chol.solve(u) if M else np.zeros(0)

        def direction(eta, Rc, rtk):
            r1 = -gop(Rc) - eta * (gop(WDW) + P)
            v1 = chol.solve(r1) if M else np.zeros(0)
            den = float((b - gvec) @ v2) + phi + kappa / tau
            num = (rtk / tau + eta * (g_res + float(np.tensordot(F, WDW)))
                   + float(np.tensordot(F, Rc)) - float((b - gvec) @ v1))
            dtau = num / den
            dy = v1 + dtau * v2
            dkappa = (rtk - kappa * dtau) / tau
            dS = -gadj(dy) + dtau * F - eta * D
            dX = _sym(Rc - W @ dS @ W)
            return dX, dy, _sym(dS), dtau, dkappa

        if converged_now:
            # pure centering: keep residuals and mu, pull X*S toward mu*I
            Rc = mu * S_inv - X
            dX, dy, dS, dtau, dkappa = direction(0.0, _sym(Rc), mu - tau * kappa)
        else:
            # predictor
            dXa, dya, dSa, dtaua, dkappaa = direction(1.0, -X, -tau * kappa)
            if not all(np.all(np.isfinite(d)) for d in (dXa, dSa)) or not (
                np.isfinite(dtaua) and np.isfinite(dkappaa)
            ):
                warnings_out.append("non-finite search direction")
                return best_or(SdpStatus.NUMERICAL_TROUBLE)
            alpha_a = min(
                1.0,
                _max_psd_step(X, dXa),
                _max_psd_step(S, dSa),
                (tau / -dtaua) if dtaua < 0 else np.inf,
                (kappa / -dkappaa) if dkappaa < 0 else np.inf,
            )
            mu_aff = (
                float(np.tensordot(X + alpha_a * dXa, S + alpha_a * dSa))
                + (tau + alpha_a * dtaua) * (kappa + alpha_a * dkappaa)
            ) / (N + 1)
            sigma = min(max((max(mu_aff, 0.0) / mu) ** 3, opts.sigma_floor), 0.999)

            # corrector with the NT-scaled Mehrotra second-order term
            Rc = frame.second_order_residual(sigma * mu, dXa, dSa)
            rtk = sigma * mu - tau * kappa - dtaua * dkappaa
            dX, dy, dS, dtau, dkappa = direction(1.0 - sigma, Rc, rtk)

        if not all(np.all(np.isfinite(d)) for d in (dX, dS)) or not (
            np.isfinite(dtau) and np.isfinite(dkappa)
        ):
            warnings_out.append("non-finite search direction")
            return best_or(SdpStatus.NUMERICAL_TROUBLE)
        bound = min(
            _max_psd_step(X, dX),
            _max_psd_step(S, dS),
            (tau / -dtau) if dtau < 0 else np.inf,
            (kappa / -dkappa) if dkappa < 0 else np.inf,
        )
        alpha = min(1.0, opts.step_fraction * bound)
        if not np.isfinite(alpha) or alpha <= 0:
            alpha = 0.0
        if alpha < 1e-8:
            stall_strikes += 1
            if stall_strikes >= 3:
                warnings_out.append("step length collapsed")
                return best_or(SdpStatus.NUMERICAL_TROUBLE)
        else:
            stall_strikes = 0

        X = X + alpha * dX
        S = S + alpha * dS
        y = y + alpha * dy
        tau += alpha * dtau
        kappa += alpha * dkappa
        last_alpha = alpha

    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# Duality report
# ---------------------------------------------------------------------------

@dataclass
class DualityReport:
    slack_residual: float
    slack_tol: float
    complementary_ok: bool
    weak_duality_margin: float
    weak_duality_ok: bool
    primal_residual: float
    dual_min_eig: float


def check_duality(prob: SdpProblem, sol: SdpSolution,
                  slack_tol: float = 1e-6, gap_tol: float = 1e-8) -> DualityReport:
    """Complementary-slackness and weak-duality report for an Optimal solution."""
    if sol.status is not SdpStatus.OPTIMAL:
        raise ValueError("duality report requires an optimal solution")
    X, y = sol.X, sol.y
    Smat = prob.F - sum(
        yk * prob.constraint_dense(k) for k, yk in enumerate(y)
    ) if prob.num_constraints else prob.F.copy()
    xnorm = float(np.linalg.norm(X))
    resid = float(np.linalg.norm(X @ Smat))
    tol = slack_tol * (1.0 + xnorm)
    margin = sol.primal_obj - sol.dual_obj
    b = prob.b_vector()
    prim = max(
        (abs(float(np.tensordot(prob.constraint_dense(k), X)) - b[k])
         for k in range(prob.num_constraints)),
        default=0.0,
    )
    min_eig = float(np.linalg.eigvalsh(_sym(Smat))[0]) if prob.dim else 0.0
    return DualityReport(
        slack_residual=resid,
        slack_tol=tol,
        complementary_ok=resid <= tol,
        weak_duality_margin=margin,
        weak_duality_ok=margin >= -gap_tol * (1.0 + abs(sol.primal_obj)),
        primal_residual=prim,
        dual_min_eig=min_eig,
    )


# ---------------------------------------------------------------------------
# Linear programming on the diagonal special case
# ---------------------------------------------------------------------------

@dataclass
class LpSolution:
    status: SdpStatus
    x: np.ndarray | None
    value: float | None
    y: np.ndarray | None


def solve_lp(c, rows, opts: SdpOptions | None = None) -> LpSolution:
    """Minimize c @ x subject to a_k @ x = b_k and x >= 0.

    Embeds the LP as a diagonal SDP (one diagonal slot per variable).  With
    the fixed diagonal initialization all iterates remain exactly diagonal,
    so no off-diagonal constraints are required; the variable values are the
    diagonal of the optimal matrix.
    """
    c = np.asarray(c, dtype=float)
    V = len(c)
    F = np.diag(c)
    constraints = []
    for a, bk in rows:
        a = np.asarray(a, dtype=float)
        if len(a) != V:
            raise ValueError("row length mismatch")
        constraints.append(({(i, i): a[i] for i in range(V) if a[i] != 0.0}, bk))
    sol = solve(SdpProblem(V, F, constraints), opts)
    if sol.status is not SdpStatus.OPTIMAL:
        return LpSolution(status=sol.status, x=None, value=None, y=sol.y)
    x = np.diag(sol.X).copy()
    return LpSolution(status=sol.status, x=x, value=float(c @ x), y=sol.y)


# ---------------------------------------------------------------------------
# SDPA sparse format import/export
# ---------------------------------------------------------------------------

def write_sdpa(prob: SdpProblem, path_or_file):
    """Write the problem in SDPA sparse format (.dat-s), single dense block.

    SDPA's native problem is min c^T z with sum_k z_k F_k - F_0 PSD, which is
    our dual with c = -b, F_k = -G_k, F_0 = -F; the mapping is inverted by
    ``read_sdpa``.
    """
    own = isinstance(path_or_file, str)
    fh = open(path_or_file, "w") if own else path_or_file
    try:
        fh.write(f"{prob.num_constraints}\n1\n{prob.dim}\n")
        fh.write(" ".join(repr(float(-bk)) for _, bk in prob.constraints) + "\n")
        for i in range(prob.dim):
            for j in range(i, prob.dim):
                v = prob.F[i, j]
                if v != 0.0:
                    fh.write(f"0 1 {i + 1} {j + 1} {float(-v)!r}\n")
        for k, (g, _) in enumerate(prob.constraints):
            for (i, j), v in sorted(g.items()):
                fh.write(f"{k + 1} 1 {i + 1} {j + 1} {float(-v)!r}\n")
    finally:
        if own:
            fh.close()


def read_sdpa(path_or_file) -> SdpProblem:
    own = isinstance(path_or_file, str)
    fh = open(path_or_file) if own else path_or_file
    try:
        tokens: list[str] = []
        for line in fh:
            line = line.strip()
            if not line or line.startswith(('"', "*", "%")):
                continue
            tokens.extend(line.replace(",", " ").replace("{", " ").replace("}", " ").split())
        pos = 0

        def take() -> str:
            nonlocal pos
            t = tokens[pos]
            pos += 1
            return t

        m = int(take())
        nblocks = int(take())
        sizes = [int(float(take())) for _ in range(nblocks)]
        if nblocks != 1 or sizes[0] <= 0:
            raise ValueError("only single dense-block SDPA files are supported")
        N = sizes[0]
        cvec = [float(take()) for _ in range(m)]
        F = np.zeros((N, N))
        gdicts = [dict() for _ in range(m)]
        while pos + 4 < len(tokens) + 1 and pos < len(tokens):
            matno = int(take())
            take()  # block number, always 1 here
            i = int(take()) - 1
            j = int(take()) - 1
            v = float(take())
            if i > j:
                i, j = j, i
            if matno == 0:
                F[i, j] = -v
                F[j, i] = -v
            else:
                gdicts[matno - 1][(i, j)] = -v
        constraints = [(g, -ck) for g, ck in zip(gdicts, cvec)]
        return SdpProblem(N, F, constraints)
    finally:
        if own:
            fh.close()


def sdpa_dumps(prob: SdpProblem) -> str:
    buf = io.StringIO()
    write_sdpa(prob, buf)
    return buf.getvalue()


def sdpa_loads(text: str) -> SdpProblem:
    return read_sdpa(io.StringIO(text))
