"""Dense linear-algebra kernels for the SDP solver and the eigenvalue oracle.

Eigendecompositions delegate to LAPACK through numpy (`eigh` for symmetric
input, `eig` for general input, i.e. balancing + Hessenberg reduction +
shifted QR).  The pivoted semidefinite factorization and the SPD solve are
implemented directly so rank deficiency and indefiniteness surface as
explicit results rather than as exceptions from deep inside a solver loop.

Kernels are pure on owned inputs; independent factorizations and eigensolves
may run concurrently with no shared mutable state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_IM_TOL = 1e-7        # |Im| threshold for calling an eigenvalue real, relative to ||M||
DEFAULT_CLUSTER_GAP = 1e-6   # single-linkage gap for multiplicity clustering, relative to ||M||


class EigenConvergenceError(RuntimeError):
    """QR iteration failed to converge; never reported silently."""


class NotPositiveDefiniteError(RuntimeError):
    def __init__(self, index: int, pivot: float):
        super().__init__(f"non-positive pivot {pivot:.3e} at index {index}")
        self.index = index
        self.pivot = pivot


@dataclass
class EigenResult:
    """Eigenvalues (complex), optional right eigenvectors, and the real subset.

    ``real_values`` lists one representative per cluster of near-equal real
    eigenvalues (ascending), ``real_multiplicities`` the matching cluster
    sizes and ``real_clusters`` the column indices into ``values``/``vectors``
    belonging to each cluster.
    """

    values: np.ndarray
    vectors: np.ndarray | None
    real_values: list[float] = field(default_factory=list)
    real_multiplicities: list[int] = field(default_factory=list)
    real_clusters: list[list[int]] = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return len(self.values)

    def smallest_real(self) -> float:
        if not self.real_values:
            raise ValueError("no real eigenvalues under the tolerance rule")
        return self.real_values[0]


def _matrix_scale(m: np.ndarray) -> float:
    s = float(np.linalg.norm(m))
    return s if s > 0 else 1.0


def _classify_real(values: np.ndarray, vectors, scale: float,
                   im_tol: float, cluster_gap: float) -> EigenResult:
    # Tolerances are relative to each eigenvalue's own magnitude (plus one),
    # not to the matrix norm: multiplication matrices routinely carry huge
    # irrelevant eigenvalues next to the small real ones that matter, and a
    # norm-relative rule would misclassify everything near the origin.
    idx = [i for i, v in enumerate(values)
           if abs(v.imag) <= im_tol * (1.0 + abs(v.real))]
    reals = sorted(((values[i].real, i) for i in idx))
    clusters: list[list[int]] = []
    for v, i in reals:
        if clusters:
            prev = values[clusters[-1][-1]].real
            if v - prev <= cluster_gap * (1.0 + abs(v)):
                clusters[-1].append(i)
                continue
        clusters.append([i])
    reps = [float(np.mean([values[i].real for i in c])) for c in clusters]
    return EigenResult(
        values=values,
        vectors=vectors,
        real_values=reps,
        real_multiplicities=[len(c) for c in clusters],
        real_clusters=clusters,
    )


def sym_eig(S: np.ndarray, compute_vectors: bool = True,
            cluster_gap: float = DEFAULT_CLUSTER_GAP) -> EigenResult:
    """Symmetric eigendecomposition: all-real ascending values, orthonormal vectors."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("matrix must be square")
    scale = _matrix_scale(S)
    if np.max(np.abs(S - S.T)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    try:
        if compute_vectors:
            w, v = np.linalg.eigh(S)
        else:
            w, v = np.linalg.eigvalsh(S), None
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc
    return _classify_real(w.astype(complex), v, scale, im_tol=1.0, cluster_gap=cluster_gap)


def eig_general(M: np.ndarray, compute_vectors: bool = True,
                im_tol: float = DEFAULT_IM_TOL,
                cluster_gap: float = DEFAULT_CLUSTER_GAP) -> EigenResult:
    """General real eigendecomposition with tolerance-classified real subset.

    Eigenvalues are sorted by (real, imag) for determinism; the real subset
    keeps values with |Im| <= im_tol * ||M|| and reports clustered
    multiplicities (single linkage with gap cluster_gap * ||M||).
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    scale = _matrix_scale(M)
    try:
        if compute_vectors:
            w, v = np.linalg.eig(M)
        else:
            w, v = np.linalg.eigvals(M), None
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    if v is not None:
        v = v[:, order]
    return _classify_real(w, v, scale, im_tol=im_tol, cluster_gap=cluster_gap)


@dataclass
class PsdFactorization:
    """Outcome of the pivoted semidefinite factorization S ~= B^T B."""

    success: bool
    B: np.ndarray | None
    rank: int
    failure_pivot: float | None = None
    failure_index: int | None = None
    pivots: list[int] = field(default_factory=list)


def psd_factor(S: np.ndarray, tol: float = 1e-10) -> PsdFactorization:
    """Pivoted outer-product (Cholesky-like) factorization of a PSD matrix.

    Succeeds iff the smallest eigenvalue is >= -tol*||S||, returning B with
    S ~= B^T B and rank(B) = number of pivots exceeding tol*||S||.  On an
    indefinite input the offending negative pivot is reported instead of
    raising, since rank deficiency is the common case for optimal Gram
    matrices.
    """
    A = np.array(S, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("matrix must be square")
    scale = max(float(np.max(np.abs(A))), 1e-300) if n else 1.0
    if n and np.max(np.abs(A - A.T)) > 1e-12 * scale:
        raise ValueError("matrix is not symmetric")
    threshold = tol * scale
    rows = []
    pivots: list[int] = []
    active = np.ones(n, dtype=bool)
    for _ in range(n):
        diag = np.where(active, np.diag(A), -np.inf)
        j = int(np.argmax(diag))
        pivot = diag[j]
        if pivot <= threshold:
            break
        row = A[j, :] / np.sqrt(pivot)
        rows.append(row.copy())
        pivots.append(j)
        A -= np.outer(row, row)
        A[j, :] = 0.0
        A[:, j] = 0.0
        active[j] = False
    remaining = np.where(active, np.diag(A), 0.0)
    worst = float(np.min(remaining)) if n else 0.0
    if worst < -threshold:
        idx = int(np.argmin(remaining))
        return PsdFactorization(False, None, len(rows), failure_pivot=worst,
                                failure_index=idx, pivots=pivots)
    B = np.array(rows) if rows else np.zeros((0, n))
    return PsdFactorization(True, B, len(rows), pivots=pivots)


class CholeskyFactor:
    """Lower-triangular Cholesky factor with reusable triangular solves."""

    def __init__(self, L: np.ndarray):
        self.L = L

    @property
    def dimension(self) -> int:
        return self.L.shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        y = self.forward(rhs)
        return self.backward(y)

    def forward(self, rhs: np.ndarray) -> np.ndarray:
        L = self.L
        n = self.dimension
        y = np.array(rhs, dtype=float)
        for i in range(n):
            if i:
                y[i] -= L[i, :i] @ y[:i]
            y[i] /= L[i, i]
        return y

    def backward(self, rhs: np.ndarray) -> np.ndarray:
        L = self.L
        n = self.dimension
        x = np.array(rhs, dtype=float)
        for i in range(n - 1, -1, -1):
            if i < n - 1:
                x[i] -= L[i + 1 :, i] @ x[i + 1 :]
            x[i] /= L[i, i]
        return x


def spd_cholesky(S: np.ndarray) -> CholeskyFactor:
    """Plain (unpivoted) Cholesky; raises NotPositiveDefiniteError on pivot <= 0."""
    A = np.array(S, dtype=float)
    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        d = A[j, j] - L[j, :j] @ L[j, :j]
        if d <= 0 or not np.isfinite(d):
            raise NotPositiveDefiniteError(j, float(d))
        L[j, j] = np.sqrt(d)
        if j + 1 < n:
            L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return CholeskyFactor(L)


def solve_spd(S: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve S x = rhs for symmetric positive-definite S via Cholesky."""
    return spd_cholesky(S).solve(np.asarray(rhs, dtype=float))
