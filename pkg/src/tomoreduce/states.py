"""Linear-algebra primitives for pure and mixed quantum states.

Pure states live on a bipartite register pair X (dimension r) and Y
(dimension d); a flat state uses dims (1, d). Density matrices carry their
eigendecomposition. All constructors validate normalization, Hermiticity,
and positivity at fixed tolerances, and every array held by a state object
is frozen after construction, so instances are safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .seeding import rng_from_seed

__all__ = [
    "NORM_ATOL",
    "RECONSTRUCT_ATOL",
    "RANK_TOL",
    "SCHMIDT_TOL",
    "PureState",
    "DensityMatrix",
    "SchmidtDecomposition",
    "Projector",
    "haar_random_unitary",
    "random_pure_state",
    "random_rank_r_state",
    "partial_trace_x",
    "schmidt_decompose",
    "fidelity_pure_pure",
    "fidelity_pure_mixed",
    "fidelity_mixed",
    "trace_distance",
    "purify",
    "optimal_purification_against",
    "support_projector",
]

NORM_ATOL = 1e-9  # unit norm / unit trace / Hermiticity tolerance
RECONSTRUCT_ATOL = 1e-8  # eigenpair and Schmidt reconstruction tolerance
RANK_TOL = 1e-10  # eigenvalues at or below this do not count toward the rank
SCHMIDT_TOL = 1e-12  # Schmidt coefficients at or below this are dropped
_PHASE_TOL = 1e-12  # amplitudes below this are skipped when fixing the global phase


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit complex amplitude vector on an (r, d) register pair."""

    amplitudes: np.ndarray
    dims: tuple[int, int]

    def __post_init__(self) -> None:
        r, d = self.dims
        if r < 1 or d < 1:
            raise ValueError(f"register dimensions must be positive, got {self.dims!r}")
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size != r * d:
            raise ValueError(f"expected {r * d} amplitudes, got {amps.size}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_ATOL:
            raise ValueError(f"state is not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "dims", (int(r), int(d)))

    @property
    def r(self) -> int:
        return self.dims[0]

    @property
    def d(self) -> int:
        return self.dims[1]

    @property
    def total_dim(self) -> int:
        return self.dims[0] * self.dims[1]

    def as_matrix(self) -> np.ndarray:
        """Amplitudes reshaped to an (r, d) coefficient matrix."""
        return self.amplitudes.reshape(self.dims)

    def overlap(self, other: "PureState") -> complex:
        """Inner product <self|other>."""
        if self.total_dim != other.total_dim:
            raise ValueError("dimension mismatch")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def phase_normalized(self) -> "PureState":
        """Same ray with the first nonzero amplitude made real nonnegative."""
        nz = np.flatnonzero(np.abs(self.amplitudes) > _PHASE_TOL)
        if nz.size == 0:
            return self
        pivot = self.amplitudes[nz[0]]
        return PureState(self.amplitudes * (np.conj(pivot) / abs(pivot)), self.dims)

    def to_density_matrix(self) -> "DensityMatrix":
        """Rank-1 density matrix on the full r*d-dimensional space."""
        return DensityMatrix.from_eigensystem(
            np.array([1.0]), self.amplitudes.reshape(-1, 1)
        )


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian PSD unit-trace matrix with its eigendecomposition attached.

    ``eigenvalues`` are nonincreasing and ``eigenvectors`` holds the matching
    orthonormal columns. The pair may be truncated (fewer columns than the
    dimension) when the trailing eigenvalues are exactly zero by construction.
    """

    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    rank: int

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"matrix must be square, got shape {mat.shape}")
        herm_defect = np.max(np.abs(mat - mat.conj().T))
        if herm_defect > NORM_ATOL:
            raise ValueError(f"matrix is not Hermitian: defect {herm_defect:.3e}")
        trace = np.real(np.trace(mat))
        if abs(trace - 1.0) > NORM_ATOL:
            raise ValueError(f"trace must be 1, got {trace!r}")
        w = np.asarray(self.eigenvalues, dtype=float).reshape(-1)
        v = np.asarray(self.eigenvectors, dtype=complex)
        if v.ndim != 2 or v.shape[0] != mat.shape[0] or v.shape[1] != w.size:
            raise ValueError("eigenvector shape does not match eigenvalues")
        if w.size > 1 and np.any(np.diff(w) > 0):
            raise ValueError("eigenvalues must be nonincreasing")
        if w.size and w[-1] < -NORM_ATOL:
            raise ValueError(f"negative eigenvalue {w[-1]!r} beyond tolerance")
        recon = (v * w) @ v.conj().T
        defect = np.max(np.abs(recon - mat))
        if defect > RECONSTRUCT_ATOL:
            raise ValueError(f"eigenpairs do not reconstruct the matrix: defect {defect:.3e}")
        object.__setattr__(self, "matrix", _frozen(mat))
        object.__setattr__(self, "eigenvalues", _frozen(w))
        object.__setattr__(self, "eigenvectors", _frozen(v))
        object.__setattr__(self, "rank", int(self.rank))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "DensityMatrix":
        """Validate a raw matrix and attach its eigendecomposition."""
        mat = np.asarray(matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"matrix must be square, got shape {mat.shape}")
        herm_defect = np.max(np.abs(mat - mat.conj().T))
        if herm_defect > NORM_ATOL:
            raise ValueError(f"matrix is not Hermitian: defect {herm_defect:.3e}")
        herm = (mat + mat.conj().T) / 2.0
        w, v = np.linalg.eigh(herm)
        w = w[::-1]
        v = v[:, ::-1]
        rank = int(np.count_nonzero(w > RANK_TOL))
        return cls(matrix=herm, eigenvalues=w, eigenvectors=v, rank=rank)

    @classmethod
    def from_eigensystem(cls, eigenvalues: np.ndarray, eigenvectors: np.ndarray) -> "DensityMatrix":
        """Build from explicit orthonormal eigenpairs (possibly truncated)."""
        w = np.asarray(eigenvalues, dtype=float).reshape(-1)
        v = np.asarray(eigenvectors, dtype=complex)
        order = np.argsort(w)[::-1]
        w = w[order]
        v = v[:, order]
        mat = (v * w) @ v.conj().T
        mat = (mat + mat.conj().T) / 2.0
        rank = int(np.count_nonzero(w > RANK_TOL))
        return cls(matrix=mat, eigenvalues=w, eigenvectors=v, rank=rank)

    @classmethod
    def from_pure(cls, psi: PureState) -> "DensityMatrix":
        return psi.to_density_matrix()

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def sqrt_matrix(self) -> np.ndarray:
        """Principal square root, with rounding-noise negatives clamped to 0."""
        w = np.sqrt(np.clip(self.eigenvalues, 0.0, None))
        return (self.eigenvectors * w) @ self.eigenvectors.conj().T


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """Coefficients and orthonormal factor pairs of a bipartite pure state."""

    coefficients: np.ndarray  # nonincreasing positive reals, length k
    left_vectors: np.ndarray  # (r, k) orthonormal columns
    right_vectors: np.ndarray  # (d, k) orthonormal columns

    def __post_init__(self) -> None:
        lam = np.asarray(self.coefficients, dtype=float).reshape(-1)
        left = np.asarray(self.left_vectors, dtype=complex)
        right = np.asarray(self.right_vectors, dtype=complex)
        k = lam.size
        if k == 0:
            raise ValueError("at least one Schmidt coefficient is required")
        if left.shape[1] != k or right.shape[1] != k:
            raise ValueError("factor counts do not match the coefficients")
        if np.any(lam <= 0) or (k > 1 and np.any(np.diff(lam) > 0)):
            raise ValueError("coefficients must be positive and nonincreasing")
        if abs(np.sum(lam**2) - 1.0) > NORM_ATOL:
            raise ValueError("squared coefficients must sum to 1")
        for name, f in (("left", left), ("right", right)):
            gram = f.conj().T @ f
            if np.max(np.abs(gram - np.eye(k))) > NORM_ATOL:
                raise ValueError(f"{name} factors are not orthonormal")
        object.__setattr__(self, "coefficients", _frozen(lam))
        object.__setattr__(self, "left_vectors", _frozen(left))
        object.__setattr__(self, "right_vectors", _frozen(right))

    @property
    def k(self) -> int:
        return self.coefficients.size

    def reconstruct(self) -> np.ndarray:
        """Coefficient matrix sum_i lambda_i u_i v_i^T, shape (r, d)."""
        return (self.left_vectors * self.coefficients) @ self.right_vectors.T


@dataclass(frozen=True, eq=False)
class Projector:
    """Orthogonal projector given by an orthonormal basis of its support."""

    basis: np.ndarray  # (dimension, rank) orthonormal columns

    def __post_init__(self) -> None:
        basis = np.asarray(self.basis, dtype=complex)
        if basis.ndim != 2:
            raise ValueError("basis must be a 2-D column stack")
        dim, k = basis.shape
        if not 1 <= k <= dim:
            raise ValueError(f"need 1 <= rank <= dimension, got rank {k}, dimension {dim}")
        gram = basis.conj().T @ basis
        if np.max(np.abs(gram - np.eye(k))) > NORM_ATOL:
            raise ValueError("basis columns are not orthonormal")
        object.__setattr__(self, "basis", _frozen(basis))

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def dimension(self) -> int:
        return self.basis.shape[0]

    def matrix(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    @classmethod
    def identity(cls, dim: int) -> "Projector":
        return cls(np.eye(dim, dtype=complex))


def haar_random_unitary(dim: int, seed) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    if dim < 1:
        raise ValueError("dimension must be positive")
    rng = rng_from_seed(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r).copy()
    ph[np.abs(ph) == 0] = 1.0
    ph /= np.abs(ph)
    return q * ph


def random_pure_state(r: int, d: int, seed) -> PureState:
    """Haar-random unit vector on the (r, d) register pair, deterministic per seed."""
    if r < 1 or d < 1:
        raise ValueError("register dimensions must be positive")
    rng = rng_from_seed(seed)
    amps = rng.standard_normal(r * d) + 1j * rng.standard_normal(r * d)
    norm = np.linalg.norm(amps)
    if norm == 0.0:  # probability zero, but never divide by zero
        amps[0] = 1.0
        norm = 1.0
    return PureState(amps / norm, (r, d)).phase_normalized()


def random_rank_r_state(d: int, r: int, seed) -> DensityMatrix:
    """Random rank-r mixed state on dimension d.

    Equal by construction to ``partial_trace_x(random_pure_state(r, d, seed))``,
    so the purification behind any draw can be recovered from the same seed.
    """
    if not 1 <= r <= d:
        raise ValueError(f"need 1 <= r <= d, got r={r}, d={d}")
    return partial_trace_x(random_pure_state(r, d, seed))


def partial_trace_x(psi: PureState) -> DensityMatrix:
    """Reduced state on Y: rho[a, b] = sum_x psi[x, a] * conj(psi[x, b])."""
    m = psi.as_matrix()
    return DensityMatrix.from_matrix(m.T @ m.conj())


def schmidt_decompose(psi: PureState) -> SchmidtDecomposition:
    """SVD of the (r, d) coefficient matrix, with near-zero coefficients dropped."""
    u, s, vh = np.linalg.svd(psi.as_matrix(), full_matrices=False)
    k = max(1, int(np.count_nonzero(s > SCHMIDT_TOL)))
    return SchmidtDecomposition(s[:k], u[:, :k], vh[:k].T)


def fidelity_pure_pure(psi: PureState, phi: PureState) -> float:
    """Squared overlap |<phi|psi>|^2; symmetric and global-phase invariant."""
    if psi.total_dim != phi.total_dim:
        raise ValueError("dimension mismatch")
    return float(min(1.0, abs(np.vdot(phi.amplitudes, psi.amplitudes)) ** 2))


def fidelity_pure_mixed(psi: PureState, sigma: DensityMatrix) -> float:
    """Fidelity <psi|sigma|psi> between a pure state and a density matrix."""
    if psi.total_dim != sigma.dim:
        raise ValueError("dimension mismatch")
    val = np.real(np.vdot(psi.amplitudes, sigma.matrix @ psi.amplitudes))
    return float(np.clip(val, 0.0, 1.0))


def fidelity_mixed(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Squared-convention fidelity (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Computed as the squared nuclear norm of sqrt(rho) @ sqrt(sigma), which is
    the same quantity and symmetric in the arguments. Equals 1 exactly when
    the states coincide and |<phi|psi>|^2 on pure inputs.
    """
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    s = np.linalg.svd(rho.sqrt_matrix() @ sigma.sqrt_matrix(), compute_uv=False)
    return float(min(1.0, float(np.sum(s)) ** 2))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Half the sum of the absolute eigenvalues of rho - sigma."""
    if rho.dim != sigma.dim:
        raise ValueError("dimension mismatch")
    w = np.linalg.eigvalsh(rho.matrix - sigma.matrix)
    return float(np.clip(0.5 * np.sum(np.abs(w)), 0.0, 1.0))


def purify(sigma: DensityMatrix, purifier_dim: int) -> PureState:
    """Canonical purification sum_i sqrt(mu_i) |i> (x) |w_i> on (purifier_dim, d)."""
    if purifier_dim < sigma.rank:
        raise ValueError(
            f"purifier dimension {purifier_dim} is below the state's rank {sigma.rank}"
        )
    k = sigma.rank
    mu = np.clip(sigma.eigenvalues[:k], 0.0, None)
    m = np.zeros((purifier_dim, sigma.dim), dtype=complex)
    m[:k] = np.sqrt(mu)[:, None] * sigma.eigenvectors[:, :k].T
    m /= np.linalg.norm(m)
    return PureState(m.reshape(-1), (purifier_dim, sigma.dim)).phase_normalized()


def optimal_purification_against(sigma: DensityMatrix, psi: PureState) -> PureState:
    """Purification of sigma on psi's register pair with maximal overlap to psi.

    The canonical purification is rotated on the purifying register so that
    the overlap matrix's singular values add up coherently, which attains
    ``fidelity_mixed(partial_trace_x(psi), sigma)`` as |<psi|phi>|^2.
    """
    r, d = psi.dims
    if sigma.dim != d:
        raise ValueError("dimension mismatch")
    if sigma.rank > r:
        raise ValueError(
            f"purifying register of dimension {r} cannot hold a rank-{sigma.rank} state"
        )
    phi0 = purify(sigma, r).as_matrix()
    c = phi0 @ psi.as_matrix().conj().T  # c[y, x] = sum_a conj(psi[x,a]) phi0[y,a]
    w, _, vh = np.linalg.svd(c)
    u_opt = vh.conj().T @ w.conj().T
    return PureState((u_opt @ phi0).reshape(-1), (r, d)).phase_normalized()


def support_projector(sigma: DensityMatrix, rank_cap: int) -> Projector:
    """Projector onto the span of sigma's leading eigenvectors.

    Eigenvalues at or below the rank tolerance are excluded, so a state of
    lower numerical rank yields a lower-rank projector rather than one padded
    with arbitrary directions.
    """
    if rank_cap < 1:
        raise ValueError("rank cap must be at least 1")
    k = min(sigma.rank, rank_cap)
    if k < 1:
        raise ValueError("state has no eigenvalue above the rank tolerance")
    return Projector(sigma.eigenvectors[:, :k])
