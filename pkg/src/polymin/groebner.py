"""Exact algebraic minimization oracle.

Verifies that the scaled partial derivatives form a Groebner basis under the
graded-lex order, enumerates standard monomials, reduces to normal form over
exact rationals, builds multiplication matrices of the quotient ring, and
minimizes globally by reading off the smallest real eigenvalue of the
multiplication matrix of the objective.  A fraction-free characteristic
polynomial gives the alternative univariate route to the same value.

No Buchberger completion is attempted: callers get a clean refusal when the
generators are not already a Groebner basis (the benchmark family always is).
All operations are pure; building the columns of a multiplication matrix is
embarrassingly parallel if a caller wants it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .linalg import EigenResult, eig_general
from .poly import (
    Monomial,
    Polynomial,
    grlex_key,
    monomial_div,
    monomial_divides,
    monomial_lcm,
    monomial_mul,
    scale_homogeneous,
    suggested_scaling,
)

DEFAULT_MU_CAP = 200_000
CHARPOLY_EXACT_CAP = 64


class NotGroebnerError(ValueError):
    """Generators fail the Buchberger criterion; completion is out of scope."""


class InfiniteQuotientError(ValueError):
    """Some variable has no pure-power leading term: quotient ring not finite."""


class MuCapExceededError(ValueError):
    pass


class NoRealCriticalPointsError(RuntimeError):
    """No real eigenvalue found, inconsistent with a polynomial bounded below."""


def _require_exact(polys: Sequence[Polynomial], what: str):
    for p in polys:
        if not p.is_exact():
            raise ValueError(f"{what} requires exact rational coefficients")


@dataclass
class GroebnerBasis:
    """Monic generators under graded lex, with cached leading monomials."""

    generators: list[Polynomial]
    leading_monomials: list[Monomial]

    @classmethod
    def from_generators(cls, gens: Sequence[Polynomial]) -> "GroebnerBasis":
        if not gens:
            raise ValueError("empty generator list")
        _require_exact(gens, "Groebner arithmetic")
        monic = []
        for g in gens:
            if g.is_zero():
                raise ValueError("zero generator")
            lc = g.leading_coefficient()
            monic.append(g * (Fraction(1) / Fraction(lc)) if lc != 1 else g)
        return cls(monic, [g.leading_monomial() for g in monic])

    @property
    def n(self) -> int:
        return self.generators[0].n


@dataclass
class StandardBasis:
    """Monomials not divisible by any leading term, ascending graded-lex."""

    monomials: list[Monomial]
    index: dict

    @classmethod
    def from_monomials(cls, monos: Sequence[Monomial]) -> "StandardBasis":
        ordered = sorted(monos, key=grlex_key)
        return cls(ordered, {m: i for i, m in enumerate(ordered)})

    @property
    def mu(self) -> int:
        return len(self.monomials)


def critical_ideal_generators(f: Polynomial) -> list[Polynomial]:
    """Generators of the critical ideal of f.

    When f has the benchmark-family shape (monic pure powers x_i^(2d) on top
    of lower-order terms) the partials are rescaled by 1/(2d) so each leading
    term is the bare power x_i^(2d-1); otherwise the raw partials are
    returned.
    """
    f = f.to_fraction() if not f.is_exact() else f
    n = f.n
    two_d = f.degree()
    partials = [f.differentiate(i) for i in range(n)]
    if two_d >= 2 and two_d % 2 == 0:
        top = {m: c for m, c in f.terms.items() if sum(m) == two_d}
        pure = {tuple(two_d if j == i else 0 for j in range(n)) for i in range(n)}
        if set(top) == pure and all(c == 1 for c in top.values()):
            scale = Fraction(1, two_d)
            return [p * scale for p in partials]
    return partials


def normal_form(p: Polynomial, G: GroebnerBasis) -> Polynomial:
    """Remainder of p on division by G; supported only on standard monomials.

    Exact rational arithmetic throughout; p minus the result lies in the
    ideal by construction (the loop only ever subtracts multiples of
    generators).
    """
    p = p.to_fraction() if not p.is_exact() else p
    work = dict(p.terms)
    remainder: dict = {}
    lms = G.leading_monomials
    gens = G.generators
    while work:
        mono = max(work, key=grlex_key)
        coef = work.pop(mono)
        for lm, g in zip(lms, gens):
            if monomial_divides(lm, mono):
                shift = monomial_div(mono, lm)
                for m2, c2 in g.terms.items():
                    if m2 == lm:
                        continue
                    mm = monomial_mul(shift, m2)
                    s = work.get(mm, 0) - coef * c2
                    if s == 0:
                        work.pop(mm, None)
                    else:
                        work[mm] = s
                break
        else:
            remainder[mono] = coef
    return Polynomial(p.n, remainder, _clean=True)


def is_groebner(gens: Sequence[Polynomial]) -> bool:
    """Buchberger criterion: every S-polynomial reduces to zero.

    Pairs with coprime leading terms are skipped (their S-polynomial always
    reduces to zero).
    """
    G = GroebnerBasis.from_generators(gens)
    k = len(G.generators)
    for i in range(k):
        for j in range(i + 1, k):
            lmi, lmj = G.leading_monomials[i], G.leading_monomials[j]
            lcm = monomial_lcm(lmi, lmj)
            if sum(lcm) == sum(lmi) + sum(lmj):
                continue  # coprime leading terms
            gi, gj = G.generators[i], G.generators[j]
            si = Polynomial.from_monomial(gi.n, monomial_div(lcm, lmi)) * gi
            sj = Polynomial.from_monomial(gj.n, monomial_div(lcm, lmj)) * gj
            if not normal_form(si - sj, G).is_zero():
                return False
    return True


def standard_monomials(G: GroebnerBasis, mu_cap: int = DEFAULT_MU_CAP) -> StandardBasis:
    """Enumerate monomials not divisible by any leading term of G."""
    n = G.n
    bounds = [None] * n
    for lm in G.leading_monomials:
        nz = [i for i, e in enumerate(lm) if e > 0]
        if len(nz) == 1:
            i = nz[0]
            if bounds[i] is None or lm[i] < bounds[i]:
                bounds[i] = lm[i]
    missing = [i for i, b in enumerate(bounds) if b is None]
    if missing:
        names = ", ".join(f"x{i + 1}" for i in missing)
        raise InfiniteQuotientError(
            f"no pure-power leading term for {names}; quotient is infinite-dimensional"
        )
    box = math.prod(bounds)
    if box > mu_cap:
        raise MuCapExceededError(f"candidate box {box} exceeds cap {mu_cap}")
    lms = G.leading_monomials
    monos = []
    for mono in _box_iter(bounds):
        if not any(monomial_divides(lm, mono) for lm in lms):
            monos.append(mono)
    return StandardBasis.from_monomials(monos)


def _box_iter(bounds):
    if len(bounds) == 1:
        for e in range(bounds[0]):
            yield (e,)
        return
    for e in range(bounds[0]):
        for rest in _box_iter(bounds[1:]):
            yield (e,) + rest


@dataclass
class MultiplicationMatrix:
    """Matrix of the multiply-by-g endomorphism of the quotient ring.

    Entry (row x^u, col x^v) is the coefficient of x^v in the normal form of
    x^u * g, so the column vector of monomial values at a critical point p is
    a right eigenvector with eigenvalue g(p).
    """

    g: Polynomial
    basis: StandardBasis
    entries: dict  # (row, col) -> Fraction

    @property
    def mu(self) -> int:
        return self.basis.mu

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def to_dense_float(self) -> np.ndarray:
        T = np.zeros((self.mu, self.mu))
        for (i, j), c in self.entries.items():
            T[i, j] = float(c)
        return T

    def to_dense_exact(self) -> np.ndarray:
        T = np.full((self.mu, self.mu), Fraction(0), dtype=object)
        for (i, j), c in self.entries.items():
            T[i, j] = c
        return T

    def matmul(self, other: "MultiplicationMatrix") -> "MultiplicationMatrix":
        """Exact product; represents multiplication by g*h on the quotient."""
        cols_of: dict = {}
        for (i, j), c in other.entries.items():
            cols_of.setdefault(i, []).append((j, c))
        res: dict = {}
        for (i, k), c1 in self.entries.items():
            for j, c2 in cols_of.get(k, ()):
                key = (i, j)
                s = res.get(key, 0) + c1 * c2
                if s == 0:
                    res.pop(key, None)
                else:
                    res[key] = s
        return MultiplicationMatrix(self.g * other.g, self.basis, res)

    def add(self, other: "MultiplicationMatrix") -> "MultiplicationMatrix":
        res = dict(self.entries)
        for key, c in other.entries.items():
            s = res.get(key, 0) + c
            if s == 0:
                res.pop(key, None)
            else:
                res[key] = s
        return MultiplicationMatrix(self.g + other.g, self.basis, res)

    def scale(self, c) -> "MultiplicationMatrix":
        if c == 0:
            return MultiplicationMatrix(self.g * 0, self.basis, {})
        return MultiplicationMatrix(
            self.g * c, self.basis, {k: v * c for k, v in self.entries.items()}
        )


def multiplication_matrix(
    g: Polynomial, G: GroebnerBasis, B: StandardBasis
) -> MultiplicationMatrix:
    entries: dict = {}
    for row, u in enumerate(B.monomials):
        shifted = Polynomial.from_monomial(g.n, u) * g
        nf = normal_form(shifted, G)
        for m, c in nf.terms.items():
            entries[(row, B.index[m])] = c
    return MultiplicationMatrix(g, B, entries)


@dataclass
class OracleResult:
    fstar: float
    points: list[tuple]
    mu: int
    eigen: EigenResult
    tf_nnz: int


def minimize_by_eigenvalues(
    f: Polynomial,
    *,
    point_tol: float = 1e-6,
    grad_tol: float | None = None,
    mu_cap: int = DEFAULT_MU_CAP,
    auto_scale: bool = True,
) -> OracleResult:
    """Global minimum of f as the smallest real eigenvalue of its
    multiplication matrix, with minimizers read off eigenvector coordinate
    ratios.

    The critical-ideal generators must already form a Groebner basis.  For a
    repeated smallest eigenvalue the eigenspace is split with the
    multiplication matrix of a generic linear form (which commutes with the
    objective's and therefore preserves the eigenspace); candidate vectors
    failing the coordinate-ratio or gradient residual tests are discarded.

    Large lower-order coefficients are tamed by an exact rational homogeneous
    scaling before any numerics (minimizers and the minimum transform back
    exactly); mildly scaled inputs are left untouched.
    """
    fe = f.to_fraction() if not f.is_exact() else f
    if auto_scale:
        two_d = fe.degree()
        if two_d >= 2 and two_d % 2 == 0:
            alpha_f = suggested_scaling(fe, two_d)
            if alpha_f >= 2.0:
                alpha = Fraction(alpha_f).limit_denominator(16)
                fs = scale_homogeneous(fe, alpha, two_d)
                inner = minimize_by_eigenvalues(
                    fs, point_tol=point_tol, grad_tol=grad_tol,
                    mu_cap=mu_cap, auto_scale=False,
                )
                factor = float(alpha) ** two_d
                eigen = inner.eigen
                # the scaled objective's matrix is similar to 1/factor times
                # the original one, so the spectrum maps back exactly
                unscaled = EigenResult(
                    values=eigen.values * factor,
                    vectors=eigen.vectors,
                    real_values=[v * factor for v in eigen.real_values],
                    real_multiplicities=list(eigen.real_multiplicities),
                    real_clusters=[list(c) for c in eigen.real_clusters],
                )
                return OracleResult(
                    fstar=inner.fstar * factor,
                    points=[tuple(float(alpha) * c for c in p) for p in inner.points],
                    mu=inner.mu,
                    eigen=unscaled,
                    tf_nnz=inner.tf_nnz,
                )
    gens = critical_ideal_generators(fe)
    if not is_groebner(gens):
        raise NotGroebnerError(
            "critical ideal generators are not a Groebner basis; refusing to complete"
        )
    G = GroebnerBasis.from_generators(gens)
    B = standard_monomials(G, mu_cap=mu_cap)
    mu = B.mu
    Tf = multiplication_matrix(fe, G, B)
    Txs = [
        multiplication_matrix(Polynomial.variable(fe.n, i), G, B) for i in range(fe.n)
    ]
    Tf_dense = Tf.to_dense_float()
    Tx_dense = [T.to_dense_float() for T in Txs]
    eigen = eig_general(Tf_dense)
    if not eigen.real_values:
        raise NoRealCriticalPointsError(
            "multiplication matrix has no real eigenvalue under the tolerance rule"
        )
    if grad_tol is None:
        grad_tol = 1e-6 * (1.0 + fe.max_abs_coefficient())
    grads = [fe.to_float().differentiate(i) for i in range(fe.n)]
    # Walk the real clusters in ascending order until one yields a validated
    # real critical point.  A complex critical point can carry a real
    # objective value (the eigenvalue is then real with no real point behind
    # it), so the smallest real eigenvalue alone is not trustworthy.
    for value, cluster in zip(eigen.real_values, eigen.real_clusters):
        candidates = _eigenspace_vectors(eigen, cluster, Tx_dense)
        points: list[tuple] = []
        for v in candidates:
            p = _point_from_vector(v, Tx_dense, point_tol)
            if p is None:
                continue
            if max(abs(g.evaluate(p)) for g in grads) > grad_tol:
                continue
            if not any(max(abs(a - b) for a, b in zip(p, q)) <= 1e-6 for q in points):
                points.append(p)
        if points:
            points.sort()
            return OracleResult(fstar=value, points=points, mu=mu, eigen=eigen,
                                tf_nnz=Tf.nnz)
    # The multiplication matrix of the objective can be too wild numerically
    # (its irrelevant eigenvalues may dwarf the minimum by many orders).  A
    # generic linear form has a tame matrix with the same joint eigenvectors,
    # so enumerate all candidate points from it and minimize over the
    # validated real critical points instead.
    result = _minimize_via_linear_form(fe, Tx_dense, grads, grad_tol, point_tol)
    if result is not None:
        vals, points = result
        return OracleResult(fstar=vals, points=points, mu=mu, eigen=eigen,
                            tf_nnz=Tf.nnz)
    raise NoRealCriticalPointsError(
        "no candidate eigenvector produced a validated real critical point"
    )


def _minimize_via_linear_form(fe, Tx_dense, grads, grad_tol, point_tol):
    n = len(Tx_dense)
    fl = fe.to_float()
    for attempt in range(3):
        coeffs = [float((i + 1 + 5 * attempt) % (2 * n + 3) + 1) for i in range(n)]
        Tl = sum(c * T for c, T in zip(coeffs, Tx_dense))
        try:
            _, vecs = np.linalg.eig(Tl)
        except np.linalg.LinAlgError:
            continue
        found: list[tuple] = []
        for k in range(vecs.shape[1]):
            v = _realize(vecs[:, k])
            p = _point_from_vector(v, Tx_dense, point_tol)
            if p is None:
                continue
            if max(abs(g.evaluate(p)) for g in grads) > grad_tol:
                continue
            if not any(max(abs(a - b) for a, b in zip(p, q)) <= 1e-6 for q in found):
                found.append(p)
        if found:
            best = min(float(fl.evaluate(p)) for p in found)
            points = sorted(
                p for p in found
                if float(fl.evaluate(p)) <= best + 1e-7 * (1.0 + abs(best))
            )
            return best, points
    return None


def _eigenspace_vectors(eigen: EigenResult, cluster: list[int], Tx_dense) -> list[np.ndarray]:
    """Real candidate eigenvectors for one real-eigenvalue cluster.

    For multiplicity one this is the eigenvector itself.  Otherwise the
    returned basis of the eigenspace is generally a mix of the per-point
    evaluation vectors, so we diagonalize the restriction of a generic
    linear-form multiplication matrix to the eigenspace and use its
    eigenvectors to un-mix.
    """
    cols = eigen.vectors[:, cluster]
    if len(cluster) == 1:
        return [_realize(cols[:, 0])]
    raw = np.hstack([cols.real, cols.imag])
    u, s, _ = np.linalg.svd(raw, full_matrices=False)
    rank = int(np.sum(s > 1e-9 * s[0]))
    V = u[:, :rank]
    n = len(Tx_dense)
    for attempt in range(4):
        coeffs = np.array(
            [float((i + 1 + 3 * attempt) % (2 * n + 3) + 1) for i in range(n)]
        )
        Tl = sum(c * T for c, T in zip(coeffs, Tx_dense))
        H = np.linalg.lstsq(V, Tl @ V, rcond=None)[0]
        w, vecs = np.linalg.eig(H)
        if len(w) > 1:
            dist = np.abs(w[:, None] - w[None, :])
            np.fill_diagonal(dist, np.inf)
            if np.min(dist) < 1e-8 * (1 + np.max(np.abs(w))):
                continue  # degenerate split, retry with another linear form
        return [_realize(V @ vecs[:, k]) for k in range(vecs.shape[1])]
    return [_realize(V @ vecs[:, k]) for k in range(vecs.shape[1])]


def _realize(v: np.ndarray) -> np.ndarray:
    j = int(np.argmax(np.abs(v)))
    phase = v[j] / abs(v[j])
    return (v / phase).real


def _point_from_vector(v: np.ndarray, Tx_dense, point_tol: float):
    scale = np.max(np.abs(v))
    if scale == 0:
        return None
    v = v / scale
    if abs(v[0]) < 1e-10:  # basis is graded-lex ascending, slot 0 is the monomial 1
        return None  # point at infinity
    j = int(np.argmax(np.abs(v)))
    point = []
    for Tx in Tx_dense:
        u = Tx @ v
        p_i = u[j] / v[j]
        if np.max(np.abs(u - p_i * v)) > point_tol * (1.0 + abs(p_i)):
            return None
        point.append(float(p_i))
    return tuple(point)


# ---------------------------------------------------------------------------
# Exact characteristic polynomial and univariate helpers
# ---------------------------------------------------------------------------

def characteristic_polynomial(
    T: MultiplicationMatrix, mu_cap: int = CHARPOLY_EXACT_CAP
) -> list[Fraction]:
    """Exact monic characteristic polynomial det(tI - T), ascending coefficients.

    Faddeev-LeVerrier over rationals; O(mu^4) arithmetic, so capped.
    """
    mu = T.mu
    if mu > mu_cap:
        raise MuCapExceededError(f"mu={mu} exceeds exact characteristic cap {mu_cap}")
    A = T.to_dense_exact()
    eye = np.full((mu, mu), Fraction(0), dtype=object)
    for i in range(mu):
        eye[i, i] = Fraction(1)
    coeffs = [Fraction(1)]  # descending: starts with t^mu coefficient
    M = A.copy()
    for k in range(1, mu + 1):
        ck = -_trace(M) / k
        coeffs.append(ck)
        if k < mu:
            M = A @ (M + ck * eye)
    return list(reversed(coeffs))


def _trace(M: np.ndarray) -> Fraction:
    t = Fraction(0)
    for i in range(M.shape[0]):
        t += M[i, i]
    return t


def poly1d_derivative(coeffs: Sequence[Fraction]) -> list[Fraction]:
    return [coeffs[k] * k for k in range(1, len(coeffs))]


def poly1d_divmod(num: Sequence[Fraction], den: Sequence[Fraction]):
    num = list(num)
    den = list(den)
    while den and den[-1] == 0:
        den.pop()
    if not den:
        raise ZeroDivisionError("polynomial division by zero")
    quot = [Fraction(0)] * max(0, len(num) - len(den) + 1)
    rem = list(num)
    dlead = den[-1]
    for k in range(len(num) - len(den), -1, -1):
        c = rem[k + len(den) - 1] / dlead
        quot[k] = c
        if c:
            for i, dc in enumerate(den):
                rem[k + i] -= c * dc
    while rem and rem[-1] == 0:
        rem.pop()
    return quot, rem


def poly1d_gcd(a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
    a = [Fraction(c) for c in a]
    b = [Fraction(c) for c in b]
    while b and any(c != 0 for c in b):
        _, r = poly1d_divmod(a, b)
        a, b = b, r
    if a and a[-1] != 1:
        lead = a[-1]
        a = [c / lead for c in a]
    return a if a else [Fraction(0)]


def squarefree_part(coeffs: Sequence[Fraction]) -> list[Fraction]:
    """p / gcd(p, p'): same roots, all simple.  Input/output ascending."""
    deriv = poly1d_derivative(coeffs)
    if not deriv:
        return list(coeffs)
    g = poly1d_gcd(list(coeffs), deriv)
    if len(g) <= 1:
        return list(coeffs)
    q, _ = poly1d_divmod(list(coeffs), g)
    return q


def real_roots_exact_poly(coeffs: Sequence[Fraction], im_tol: float = 1e-7) -> list[float]:
    """Real roots of an exact univariate polynomial via its squarefree part."""
    sf = squarefree_part(coeffs)
    arr = np.array([float(c) for c in sf[::-1]])  # descending for np.roots
    if len(arr) <= 1:
        return []
    roots = np.roots(arr)
    out = sorted(
        float(r.real) for r in roots if abs(r.imag) <= im_tol * (1.0 + abs(r))
    )
    return out


def write_matrix_market(T: MultiplicationMatrix, path: str, comment: str = ""):
    """Coordinate-format Matrix Market text export (1-based indices)."""
    lines = ["%%MatrixMarket matrix coordinate real general"]
    if comment:
        lines.append(f"% {comment}")
    items = sorted(T.entries.items())
    lines.append(f"{T.mu} {T.mu} {len(items)}")
    for (i, j), c in items:
        lines.append(f"{i + 1} {j + 1} {float(c):.17g}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
