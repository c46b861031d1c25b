"""Sum-of-squares lower bounds by semidefinite programming.

The largest lambda making ``f - lambda`` a sum of squares equals the optimal
value of a semidefinite program over the affine space of Gram matrices of f.
We pose the solver problem on the moment side: minimize ``<A0(f), X>`` over
PSD moment matrices X (entries indexed by monomial products, consistent
across equal products, normalized against the constant monomial), whose dual
is exactly the Gram-space lambda-maximization.  The solver's dual objective
is therefore the SOS bound, the dual slack is the optimal shifted Gram
matrix, and the primal matrix is the moment matrix that yields minimizers
when it has rank one.

Bounds of the form "largest lambda with g*(f - lambda) SOS" for a fixed
positive multiplier g ride on the same construction with the normalization
matrix built from g instead of from the constant monomial.

All pipeline stages are pure; batches of polynomials can be minimized on a
worker pool with no shared state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import psd_factor
from .poly import (
    Monomial,
    Polynomial,
    monomial_mul,
    monomials_up_to_degree,
    scale_homogeneous,
    suggested_scaling,
)
from .refine import local_refine
from .sdp import SdpFailure, SdpOptions, SdpProblem, SdpSolution, SdpStatus, solve

MINUS_INFINITY = float("-inf")


class OddDegreeError(ValueError):
    """Odd-degree polynomials are unbounded below: no SOS bound exists."""


@dataclass(frozen=True)
class MonomialVector:
    """All monomials of degree <= d in n variables, constant monomial first."""

    n: int
    d: int
    entries: tuple
    index: dict = field(repr=False)

    @classmethod
    def build(cls, n: int, d: int) -> "MonomialVector":
        entries = tuple(monomials_up_to_degree(n, d))
        assert entries[0] == (0,) * n, "constant monomial must come first"
        return cls(n=n, d=d, entries=entries,
                   index={m: i for i, m in enumerate(entries)})

    @property
    def N(self) -> int:
        return len(self.entries)

    def polynomial(self, coeffs) -> Polynomial:
        """Polynomial with the given coefficients against this vector."""
        return Polynomial(self.n, {m: c for m, c in zip(self.entries, coeffs)})


def _product_classes(vec: MonomialVector):
    """Group the unordered index pairs (i <= j) by their product monomial."""
    classes: dict = {}
    for i in range(vec.N):
        mi = vec.entries[i]
        for j in range(i, vec.N):
            m = monomial_mul(mi, vec.entries[j])
            classes.setdefault(m, []).append((i, j))
    return classes


@dataclass
class GramSpace:
    """The affine space of Gram matrices of f over a monomial vector.

    One defining equation per product monomial m: the (weighted) sum of the
    Gram entries in the index class of m equals the coefficient of m in f.
    """

    vector: MonomialVector
    classes: dict
    targets: dict

    @classmethod
    def build(cls, f: Polynomial, vec: MonomialVector) -> "GramSpace":
        classes = _product_classes(vec)
        expected = math.comb(f.n + 2 * vec.d, 2 * vec.d)
        assert len(classes) == expected, "product classes must cover all monomials"
        for m in f.terms:
            if m not in classes:
                raise ValueError(
                    f"f has a term of degree {sum(m)} outside the vector's reach"
                )
        targets = {m: float(f.terms.get(m, 0)) for m in classes}
        return cls(vector=vec, classes=classes, targets=targets)

    @property
    def num_constraints(self) -> int:
        return len(self.classes)

    @property
    def dim(self) -> int:
        """Free parameters of the space: symmetric entries minus equations."""
        N = self.vector.N
        return (N * N + N) // 2 - self.num_constraints

    def particular_matrix(self) -> np.ndarray:
        """A Gram matrix of f with each coefficient spread evenly over its class."""
        N = self.vector.N
        A = np.zeros((N, N))
        for m, pairs in self.classes.items():
            t = self.targets[m]
            if t == 0.0:
                continue
            total = sum(1 if i == j else 2 for i, j in pairs)
            for i, j in pairs:
                A[i, j] = A[j, i] = t / total
        return A


@dataclass
class GramSdp:
    """Moment-form SDP whose dual maximizes the SOS shift lambda.

    Constraint 0 normalizes the moment matrix against ``norm_matrix`` (the
    constant monomial's Gram for plain SOS bounds); the remaining equalities
    force entries with equal product monomials to agree.  The dual objective
    equals the bound, and the dual slack is the optimal Gram matrix shifted
    by lambda times the normalization matrix.
    """

    problem: SdpProblem
    vector: MonomialVector
    gram_space: GramSpace
    norm_matrix: np.ndarray

    def optimal_shifted_gram(self, sol: SdpSolution) -> np.ndarray:
        return sol.S

    def bound(self, sol: SdpSolution) -> float:
        return float(sol.y[0])


def _moment_problem(objective: np.ndarray, norm: np.ndarray,
                    vec: MonomialVector, gram_space: GramSpace) -> SdpProblem:
    N = vec.N
    constraints = []
    nd = {}
    for i in range(N):
        for j in range(i, N):
            if norm[i, j] != 0.0:
                nd[(i, j)] = norm[i, j]  # dict holds matrix entries; the
                # inner-product convention supplies the off-diagonal doubling
    constraints.append((nd, 1.0))
    for pairs in gram_space.classes.values():
        if len(pairs) < 2:
            continue
        i0, j0 = pairs[0]
        for (i, j) in pairs[1:]:
            # entry equality X[i,j] = X[i0,j0], written for the
            # symmetric-pair convention <G, X> = sum v*X_ij*(2 if off-diag)
            g = {
                (i, j): 1.0 if i == j else 0.5,
                (i0, j0): -1.0 if i0 == j0 else -0.5,
            }
            constraints.append((g, 0.0))
    return SdpProblem(N, objective, constraints)


def build_gram_sdp(f: Polynomial) -> GramSdp:
    """SDP computing the largest lambda with f - lambda a sum of squares.

    Requires even degree; an odd-degree polynomial is unbounded below and has
    no SOS shift at all.
    """
    if f.is_zero():
        raise ValueError("f must not be identically zero")
    two_d = f.degree()
    if two_d % 2 != 0:
        raise OddDegreeError(
            f"degree {two_d} is odd: f is unbounded below, no SOS bound exists"
        )
    vec = MonomialVector.build(f.n, two_d // 2)
    gram_space = GramSpace.build(f.to_float(), vec)
    norm = np.zeros((vec.N, vec.N))
    norm[0, 0] = 1.0
    objective = gram_space.particular_matrix()
    problem = _moment_problem(objective, norm, vec, gram_space)
    return GramSdp(problem=problem, vector=vec, gram_space=gram_space,
                   norm_matrix=norm)


def _weighted_gram_sdp(product: Polynomial, multiplier: Polynomial,
                       vec: MonomialVector) -> GramSdp:
    """SDP for the largest lambda with multiplier*(f - lambda) SOS.

    ``product`` is multiplier*f; the normalization matrix is a Gram matrix of
    the multiplier, so the dual feasibility reads
    A - lambda*Gram(multiplier) PSD with A a Gram matrix of the product.
    """
    gram_space = GramSpace.build(product.to_float(), vec)
    norm_space = GramSpace.build(multiplier.to_float(), vec)
    norm = norm_space.particular_matrix()
    objective = gram_space.particular_matrix()
    problem = _moment_problem(objective, norm, vec, gram_space)
    return GramSdp(problem=problem, vector=vec, gram_space=gram_space,
                   norm_matrix=norm)


# ---------------------------------------------------------------------------
# Certificates and extraction
# ---------------------------------------------------------------------------

@dataclass
class SosCertificate:
    lam: float
    gram: np.ndarray                 # Gram matrix of f itself (lambda slot included)
    squares: list[Polynomial]
    residual: float                  # coefficient-wise, in absolute terms
    cert_tol: float
    target_scale: float = 1.0        # 1 + largest coefficient magnitude of f - lam

    @property
    def ok(self) -> bool:
        return self.residual <= self.cert_tol

    @property
    def relative_residual(self) -> float:
        """Re-expansion error relative to the coefficient scale of f - lam."""
        return self.residual / self.target_scale


def extract_certificate(A: np.ndarray, lam: float, vec: MonomialVector,
                        psd_tol: float = 1e-8) -> SosCertificate:
    """Square decomposition of the polynomial represented by A minus lam.

    A is a Gram matrix over vec; the squares are the rows of the semidefinite
    factor of A - lam*E11 applied to the monomial vector, and the residual is
    the largest coefficient error of ``sum b_j^2`` against X^T A X - lam.
    """
    A = np.asarray(A, dtype=float)
    shifted = A.copy()
    shifted[0, 0] -= lam
    fact = psd_factor(shifted, tol=psd_tol)
    target = _gram_to_polynomial(shifted, vec)
    scale = 1.0 + target.max_abs_coefficient()
    cert_tol = 1e-5 * scale
    if not fact.success:
        return SosCertificate(lam=lam, gram=A, squares=[], residual=float("inf"),
                              cert_tol=cert_tol, target_scale=scale)
    squares = [vec.polynomial(row) for row in fact.B]
    resum = Polynomial.zero(vec.n)
    for b in squares:
        resum = resum + b * b
    diff = resum - target
    residual = diff.max_abs_coefficient()
    return SosCertificate(lam=lam, gram=A, squares=squares, residual=residual,
                          cert_tol=cert_tol, target_scale=scale)


def _gram_to_polynomial(A: np.ndarray, vec: MonomialVector) -> Polynomial:
    terms: dict = {}
    N = vec.N
    for i in range(N):
        mi = vec.entries[i]
        for j in range(i, N):
            v = A[i, j] * (2.0 if i < j else 1.0)
            if v != 0.0:
                m = monomial_mul(mi, vec.entries[j])
                terms[m] = terms.get(m, 0.0) + v
    return Polynomial(vec.n, terms)


@dataclass
class ExtractionResult:
    found: bool
    point: tuple | None
    upper_bound: float | None
    rank_ratio: float
    reason: str = ""


def extract_minimizer(primal: np.ndarray, vec: MonomialVector, f: Polynomial,
                      bound: float, *, rank_tol: float = 1e-4,
                      moment_tol: float = 1e-4,
                      extract_tol_scale: float = 1e-5) -> ExtractionResult:
    """Read a candidate global minimizer off a rank-one moment matrix.

    The top eigenvector, normalized so its constant-monomial coordinate is
    one, lists the monomial values of the candidate point.  The candidate is
    accepted only if the second eigenvalue ratio, the degree-two moment
    consistency, and the objective-vs-bound gap all pass.
    """
    w, v = np.linalg.eigh(np.asarray(primal, dtype=float))
    lam1 = float(w[-1])
    lam2 = float(w[-2]) if len(w) > 1 else 0.0
    ratio = max(lam2, 0.0) / lam1 if lam1 > 0 else float("inf")
    if ratio > rank_tol:
        return ExtractionResult(False, None, None, ratio, "moment matrix not rank one")
    u = v[:, -1] * np.sqrt(max(lam1, 0.0))
    if abs(u[0]) < 1e-8:
        return ExtractionResult(False, None, None, ratio, "point at infinity")
    u = u / u[0]
    fl = f.to_float()
    n = vec.n
    if vec.d < 1:
        # degree-zero relaxation: every point attains a constant objective
        return ExtractionResult(True, (0.0,) * n, float(fl.evaluate((0.0,) * n)),
                                ratio)
    point = []
    for i in range(n):
        mono = tuple(1 if t == i else 0 for t in range(n))
        point.append(float(u[vec.index[mono]]))
    pscale = 1.0 + max(abs(p) for p in point) ** 2 if point else 1.0
    for i in range(n):
        for j in range(i, n):
            mono = tuple((1 if t == i else 0) + (1 if t == j else 0) for t in range(n))
            k = vec.index.get(mono)
            if k is None:
                continue
            if abs(u[k] - point[i] * point[j]) > moment_tol * pscale:
                return ExtractionResult(False, tuple(point), None, ratio,
                                        "degree-two moments inconsistent")
    upper = float(fl.evaluate(point))
    gap = upper - bound
    if gap > extract_tol_scale * (1.0 + abs(bound)):
        return ExtractionResult(False, tuple(point), upper, ratio,
                                "objective exceeds the bound")
    return ExtractionResult(True, tuple(point), upper, ratio)


# ---------------------------------------------------------------------------
# Bound pipelines
# ---------------------------------------------------------------------------

def _scaling_factor(f: Polynomial, two_d: int) -> float:
    if two_d == 0:
        return 1.0
    return suggested_scaling(f, two_d)


@dataclass
class SosResult:
    """Outcome of the SOS bound computation, in original coordinates."""

    value: float                     # the bound, or -inf when no shift is SOS
    status: SdpStatus
    certificate: SosCertificate | None
    moment_matrix: np.ndarray | None
    vector: MonomialVector | None
    alpha: float
    solution: SdpSolution | None = None
    gram_sdp: GramSdp | None = None
    tolerances: dict = field(default_factory=dict)

    @property
    def is_minus_infinity(self) -> bool:
        return self.value == MINUS_INFINITY


def sos_lower_bound(f: Polynomial, opts: SdpOptions | None = None,
                    with_certificate: bool = True,
                    alpha: float | None = None) -> SosResult:
    """Largest lambda with f - lambda a sum of squares, by SDP.

    Returns -inf exactly when the shifted-Gram feasibility fails for every
    lambda, which the solver detects as unboundedness of the moment problem.
    Homogeneous scaling is applied up front and inverted on output; when the
    first pass reveals a bound far smaller than the coefficient scale the
    solve is repeated once with the factor matched to the bound itself, since
    unscaling would otherwise amplify solver tolerance past the answer.
    """
    two_d = f.degree()
    chosen = alpha is not None
    if alpha is None:
        alpha = _scaling_factor(f, two_d)
    res = _sos_bound_at_scale(f, alpha, two_d, opts, with_certificate)
    if not chosen and res.status is SdpStatus.OPTIMAL and two_d > 0:
        lam_scaled = res.value / alpha**two_d
        if 0 < abs(lam_scaled) < 1e-5:
            alpha2 = max(1.0, abs(res.value) ** (1.0 / two_d))
            if abs(alpha2 - alpha) / alpha > 0.1:
                return _sos_bound_at_scale(f, alpha2, two_d, opts, with_certificate)
    return res


def _sos_bound_at_scale(f: Polynomial, alpha: float, two_d: int,
                        opts: SdpOptions | None,
                        with_certificate: bool) -> SosResult:
    fs = scale_homogeneous(f.to_float(), alpha, two_d) if alpha != 1.0 else f.to_float()
    gs = build_gram_sdp(fs)
    sol = solve(gs.problem, opts)
    tols = dict(sol.tolerances)
    tols.update({"rank_tol": 1e-4, "moment_tol": 1e-4, "extract_tol": 1e-5,
                 "alpha": alpha})
    if sol.status is SdpStatus.DUAL_INFEASIBLE:
        return SosResult(MINUS_INFINITY, sol.status, None, None, gs.vector, alpha,
                         sol, gs, tols)
    if sol.status is not SdpStatus.OPTIMAL:
        raise SdpFailure(sol.status, "(SOS bound)")
    lam_s = gs.bound(sol)
    lam = lam_s * alpha**two_d
    d = gs.vector.d
    moment = _unscale_moment(sol.X, gs.vector, alpha) if alpha != 1.0 else sol.X
    cert = None
    if with_certificate:
        shifted_s = gs.optimal_shifted_gram(sol)   # Gram of f_s - lam_s
        gram_s = shifted_s.copy()
        gram_s[0, 0] += lam_s
        gram = _unscale_gram(gram_s, gs.vector, alpha, d) if alpha != 1.0 else gram_s
        cert = extract_certificate(gram, lam, gs.vector)
    return SosResult(lam, sol.status, cert, moment, gs.vector, alpha, sol, gs, tols)


def _unscale_moment(X: np.ndarray, vec: MonomialVector, alpha: float) -> np.ndarray:
    d = np.array([alpha ** sum(m) for m in vec.entries])
    return X * np.outer(d, d)


def _unscale_gram(A: np.ndarray, vec: MonomialVector, alpha: float, d: int) -> np.ndarray:
    s = np.array([alpha ** (d - sum(m)) for m in vec.entries])
    return A * np.outer(s, s)


def higher_degree_bound(f: Polynomial, k: int,
                        opts: SdpOptions | None = None) -> float:
    """Largest lambda with (1 + sum x_i^(2k)) * (f - lambda) a sum of squares.

    The multiplier is strictly positive everywhere (the constant term keeps
    it nonzero at the origin), so any such lambda is a valid lower bound on
    the minimum; the result is never below the plain SOS bound when both are
    finite.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    two_d = f.degree()
    if two_d % 2 != 0:
        raise OddDegreeError(f"degree {two_d} is odd")
    alpha = _scaling_factor(f, two_d)
    value = _multiplier_bound_at_scale(f, k, alpha, two_d, opts)
    if value not in (MINUS_INFINITY, None) and 0 < abs(value) / alpha**two_d < 1e-5:
        alpha2 = max(1.0, abs(value) ** (1.0 / two_d))
        if abs(alpha2 - alpha) / alpha > 0.1:
            return _multiplier_bound_at_scale(f, k, alpha2, two_d, opts)
    return value


def _multiplier_bound_at_scale(f: Polynomial, k: int, alpha: float, two_d: int,
                               opts: SdpOptions | None) -> float:
    fs = scale_homogeneous(f.to_float(), alpha, two_d) if alpha != 1.0 else f.to_float()
    n = f.n
    g = Polynomial.constant(n, 1.0)
    for i in range(n):
        g = g + Polynomial.from_monomial(n, tuple(2 * k if j == i else 0
                                                  for j in range(n)), 1.0)
    product = g * fs
    vec = MonomialVector.build(n, two_d // 2 + k)
    gs = _weighted_gram_sdp(product, g, vec)
    sol = solve(gs.problem, opts)
    if sol.status is SdpStatus.DUAL_INFEASIBLE:
        return MINUS_INFINITY
    if sol.status is not SdpStatus.OPTIMAL:
        raise SdpFailure(sol.status, f"(multiplier bound, k={k})")
    return gs.bound(sol) * alpha**two_d


# ---------------------------------------------------------------------------
# Full minimization pipeline
# ---------------------------------------------------------------------------

@dataclass
class MinimizeResult:
    bound: float
    status: SdpStatus
    certificate: SosCertificate | None
    extraction: ExtractionResult | None
    refined: bool
    tolerances: dict
    alpha: float

    def to_json_dict(self) -> dict:
        cert = None
        if self.certificate is not None and self.certificate.squares:
            cert = {
                "lambda": self.certificate.lam,
                "squares": [s.to_string() for s in self.certificate.squares],
                "residual": self.certificate.residual,
            }
        minimizer = None
        if self.extraction is not None and self.extraction.found:
            minimizer = {
                "point": list(self.extraction.point),
                "upper_bound": self.extraction.upper_bound,
                "rank_ratio": self.extraction.rank_ratio,
            }
        return {
            "f_sos": "-inf" if self.bound == MINUS_INFINITY else self.bound,
            "status": self.status.value,
            "certificate": cert,
            "minimizer": minimizer,
            "tolerances": self.tolerances,
        }


def minimize(f: Polynomial, opts: SdpOptions | None = None, *,
             extract: bool = True, refine: bool = True) -> MinimizeResult:
    """SOS bound plus minimizer extraction with a degenerate-face fallback.

    When several global minimizers exist the moment matrix converges to a
    mixture over all of them and the rank-one test fails; a deterministic
    tiny linear perturbation of the objective then isolates one vertex of
    the optimal face, and the candidate is still validated against the
    unperturbed bound.  A Newton polish tightens accepted points.
    """
    res = sos_lower_bound(f, opts)
    extraction = None
    refined = False
    if extract and not res.is_minus_infinity:
        extraction = extract_minimizer(res.moment_matrix, res.vector, f, res.value)
        if not extraction.found and extraction.reason == "moment matrix not rank one":
            perturbed = _perturbed_moment(f, res, opts)
            if perturbed is not None:
                candidate = extract_minimizer(perturbed, res.vector, f, res.value)
                if candidate.found:
                    extraction = candidate
        if extraction.found and refine:
            r = local_refine(f, extraction.point)
            if r.converged and r.value <= extraction.upper_bound + 1e-12 * (
                1.0 + abs(extraction.upper_bound)
            ):
                extraction = ExtractionResult(True, r.point, r.value,
                                              extraction.rank_ratio)
                refined = True
    return MinimizeResult(bound=res.value, status=res.status,
                          certificate=res.certificate, extraction=extraction,
                          refined=refined, tolerances=res.tolerances,
                          alpha=res.alpha)


def _perturbed_moment(f: Polynomial, res: SosResult,
                      opts: SdpOptions | None) -> np.ndarray | None:
    """Moment matrix of the objective nudged along a generic linear form."""
    gs = res.gram_sdp
    vec = res.vector
    two_d = 2 * vec.d
    lam_s = res.value / res.alpha**two_d
    eps = 1e-4 * (1.0 + abs(lam_s))
    F = gs.problem.F.copy()
    n = vec.n
    for i in range(n):
        mono = tuple(1 if t == i else 0 for t in range(n))
        j = vec.index[mono]
        F[0, j] += eps * (i + 1) / (2.0 * n)
        F[j, 0] += eps * (i + 1) / (2.0 * n)
    prob = SdpProblem(gs.problem.dim, F,
                      [(g, bk) for g, bk in gs.problem.constraints])
    sol = solve(prob, opts)
    if sol.status is not SdpStatus.OPTIMAL:
        return None
    return _unscale_moment(sol.X, vec, res.alpha) if res.alpha != 1.0 else sol.X


# ---------------------------------------------------------------------------
# Size tables
# ---------------------------------------------------------------------------

@dataclass
class SizeTables:
    max_n: int
    max_two_d: int

    @staticmethod
    def matrix_size(n: int, two_d: int) -> int:
        """Side length of the SOS Gram/moment matrices: C(n + d, d)."""
        if two_d % 2 != 0:
            raise ValueError("degree must be even")
        d = two_d // 2
        return math.comb(n + d, d)

    @staticmethod
    def bezout_number(n: int, two_d: int) -> int:
        """Generic count of complex critical points: (2d - 1)^n."""
        if two_d % 2 != 0:
            raise ValueError("degree must be even")
        return (two_d - 1) ** n

    def rows(self):
        for two_d in range(2, self.max_two_d + 1, 2):
            yield two_d, [
                (n, self.matrix_size(n, two_d), self.bezout_number(n, two_d))
                for n in range(1, self.max_n + 1)
            ]

    def format_text(self) -> str:
        lines = ["degree  n  matrix_size  critical_points"]
        for two_d, cells in self.rows():
            for n, N, mu in cells:
                lines.append(f"{two_d:6d} {n:2d} {N:12d} {mu:16d}")
        return "\n".join(lines)


def size_tables(max_n: int, max_two_d: int) -> SizeTables:
    return SizeTables(max_n=max_n, max_two_d=max_two_d)
