"""Pluggable state estimators: calibrated synthetic oracles and a concrete
measurement-based estimator.

The oracle estimators return a randomly perturbed copy of the true state
whose infidelity (or trace distance) is driven by bisection into a requested
window. They stand in for an estimation procedure with a known guarantee, so
downstream analysis can be checked at an exact error level. The
measurement-based estimators simulate single-copy measurements in randomized
orthonormal bases and reconstruct by linear inversion; they realize the
error-vs-budget scaling shape without optimal constants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .seeding import child_seed, rng_from_seed
from .states import (
    RANK_TOL,
    DensityMatrix,
    Projector,
    PureState,
    fidelity_mixed,
    haar_random_unitary,
    trace_distance,
)

__all__ = [
    "BISECTION_MAX_ITER",
    "BackendKind",
    "TomographyBackend",
    "oracle_mixed_estimate",
    "oracle_pure_estimate",
    "oracle_trace_distance_estimate",
    "estimate_pure_state_from_measurements",
    "estimate_mixed_state_from_measurements",
]

BISECTION_MAX_ITER = 200
_EIGENVALUE_FLOOR = 1e-7  # relative floor keeping perturbed eigenvalues above the rank tolerance


class BackendKind(Enum):
    ORACLE_EXACT_INFIDELITY = "oracle_exact_infidelity"
    MEASUREMENT_LINEAR_INVERSION = "measurement_linear_inversion"


@dataclass(frozen=True)
class TomographyBackend:
    """Estimator selection plus its parameters.

    Oracle backends need a target infidelity in (0, 1); measurement backends
    need a default shot budget of at least 1 and optionally a fixed design
    seed (so the measurement bases stay the same across trials while the shot
    noise varies).
    """

    kind: BackendKind
    epsilon_target: float | None = None
    shots: int | None = None
    design_seed: int | None = None

    def __post_init__(self) -> None:
        if self.kind is BackendKind.ORACLE_EXACT_INFIDELITY:
            if self.epsilon_target is None or not 0.0 < self.epsilon_target < 1.0:
                raise ValueError("oracle backend needs a target infidelity in (0, 1)")
        elif self.kind is BackendKind.MEASUREMENT_LINEAR_INVERSION:
            if self.shots is None or self.shots < 1:
                raise ValueError("measurement backend needs a shot budget of at least 1")
        else:  # pragma: no cover - enum covers all kinds
            raise ValueError(f"unknown backend kind {self.kind!r}")

    @classmethod
    def oracle(cls, epsilon_target: float) -> "TomographyBackend":
        return cls(kind=BackendKind.ORACLE_EXACT_INFIDELITY, epsilon_target=epsilon_target)

    @classmethod
    def linear_inversion(cls, shots: int, design_seed: int | None = None) -> "TomographyBackend":
        return cls(
            kind=BackendKind.MEASUREMENT_LINEAR_INVERSION,
            shots=shots,
            design_seed=design_seed,
        )

    def estimate_mixed(
        self, rho: DensityMatrix, rank: int, seed, shots: int | None = None
    ) -> DensityMatrix:
        if self.kind is BackendKind.ORACLE_EXACT_INFIDELITY:
            return oracle_mixed_estimate(rho, self.epsilon_target, seed)
        budget = shots if shots is not None else self.shots
        return estimate_mixed_state_from_measurements(
            rho, rank, budget, seed, design_seed=self.design_seed
        )

    def estimate_pure(self, psi: PureState, seed, shots: int | None = None) -> PureState:
        if self.kind is BackendKind.ORACLE_EXACT_INFIDELITY:
            return oracle_pure_estimate(psi, self.epsilon_target, seed)
        budget = shots if shots is not None else self.shots
        return estimate_pure_state_from_measurements(
            psi, budget, seed, design_seed=self.design_seed
        )


def _perturbation_family(
    rho: DensityMatrix, rng: np.random.Generator
) -> Callable[[float], DensityMatrix]:
    """One-parameter family sigma(theta) with sigma(0) = rho and rank preserved.

    The eigenbasis is rotated by exp(i theta H) for a random Hermitian H of
    unit spectral norm, and the eigenvalues drift along a random log-direction
    (a softmax in theta, so no scale overflows), floored so the numerical
    rank never drops.
    """
    k = rho.rank
    g = rng.standard_normal((rho.dim, rho.dim)) + 1j * rng.standard_normal((rho.dim, rho.dim))
    h = (g + g.conj().T) / 2.0
    lam, q = np.linalg.eigh(h)
    lam = lam / max(float(np.max(np.abs(lam))), 1e-30)
    drift = rng.standard_normal(k)
    base_log = np.log(np.clip(rho.eigenvalues[:k], RANK_TOL, None))
    coords = q.conj().T @ rho.eigenvectors[:, :k]

    def sigma_at(theta: float) -> DensityMatrix:
        vecs = q @ (np.exp(1j * theta * lam)[:, None] * coords)
        logits = base_log + theta * drift
        vals = np.exp(logits - logits.max())
        vals = np.maximum(vals, _EIGENVALUE_FLOOR * vals.max())
        vals = vals / vals.sum()
        return DensityMatrix.from_eigensystem(vals, vecs)

    return sigma_at


def _bracket_and_bisect(
    rho: DensityMatrix,
    sigma_at: Callable[[float], DensityMatrix],
    discrepancy: Callable[[DensityMatrix, DensityMatrix], float],
    lo: float,
    hi: float,
) -> DensityMatrix | None:
    """Walk theta up a geometric ladder until the discrepancy exceeds the
    window, then bisect into it. Returns None when the family never reaches
    the window (the caller redraws a fresh family)."""
    theta_lo = 0.0
    theta_hi = None
    theta = max(lo, 1e-4)
    for _ in range(140):
        sig = sigma_at(theta)
        val = discrepancy(rho, sig)
        if lo <= val <= hi:
            return sig
        if val > hi:
            theta_hi = theta
            break
        theta_lo = theta
        theta *= 1.35  # fine enough not to hop over oscillation peaks
    if theta_hi is None:
        return None
    for _ in range(BISECTION_MAX_ITER):
        mid = 0.5 * (theta_lo + theta_hi)
        sig = sigma_at(mid)
        val = discrepancy(rho, sig)
        if lo <= val <= hi:
            return sig
        if val < lo:
            theta_lo = mid
        else:
            theta_hi = mid
    raise RuntimeError(
        f"calibration failed to land in [{lo:g}, {hi:g}] after {BISECTION_MAX_ITER} bisection steps"
    )


def _calibrate(
    rho: DensityMatrix,
    rng: np.random.Generator,
    discrepancy: Callable[[DensityMatrix, DensityMatrix], float],
    lo: float,
    hi: float,
    families: int = 8,
) -> DensityMatrix:
    """Draw perturbation families until one can be bisected into [lo, hi]."""
    for _ in range(families):
        sig = _bracket_and_bisect(rho, _perturbation_family(rho, rng), discrepancy, lo, hi)
        if sig is not None:
            return sig
    raise RuntimeError(
        f"no perturbation of the state reached the target window [{lo:g}, {hi:g}] "
        f"after {families} attempts"
    )


def oracle_mixed_estimate(rho: DensityMatrix, epsilon: float, seed) -> DensityMatrix:
    """Estimate of rho with the same rank and fidelity in [1 - eps, 1 - eps/2].

    The window's lower edge is what stresses downstream bounds; exact equality
    with 1 - eps is measure zero under float arithmetic, so a window is used.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"target infidelity must be in (0, 1), got {epsilon!r}")
    rng = rng_from_seed(seed)
    return _calibrate(
        rho,
        rng,
        lambda a, b: 1.0 - fidelity_mixed(a, b),
        epsilon / 2.0,
        epsilon,
    )


def oracle_trace_distance_estimate(rho: DensityMatrix, delta: float, seed) -> DensityMatrix:
    """Same-rank estimate of rho with trace distance in [delta/2, delta]."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"target trace distance must be in (0, 1), got {delta!r}")
    rng = rng_from_seed(seed)
    return _calibrate(rho, rng, trace_distance, delta / 2.0, delta)


def oracle_pure_estimate(
    psi: PureState, epsilon: float, seed, subspace: Projector | None = None
) -> PureState:
    """Pure estimate with |<phi|psi>|^2 in [1 - eps, 1 - eps/2].

    The state is rotated toward a random orthogonal unit vector by the angle
    whose cosine meets a target overlap drawn uniformly from the window. When
    a subspace projector is supplied, psi must lie inside it and the estimate
    stays inside it.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"target infidelity must be in (0, 1), got {epsilon!r}")
    total = psi.total_dim
    rng = rng_from_seed(seed)
    if subspace is not None:
        if subspace.dimension != total:
            raise ValueError("subspace projector does not match the state's dimension")
        inside = subspace.basis @ (subspace.basis.conj().T @ psi.amplitudes)
        if np.linalg.norm(psi.amplitudes - inside) > 1e-9:
            raise ValueError("state lies outside the requested subspace")
        ambient = subspace.rank
    else:
        ambient = total
    if ambient < 2:
        raise ValueError("no orthogonal direction available in a one-dimensional space")

    target = rng.uniform(1.0 - epsilon, 1.0 - epsilon / 2.0)
    for _ in range(32):
        raw = rng.standard_normal(ambient) + 1j * rng.standard_normal(ambient)
        if subspace is not None:
            raw = subspace.basis @ raw
        chi = raw - np.vdot(psi.amplitudes, raw) * psi.amplitudes
        norm = np.linalg.norm(chi)
        if norm > 1e-12:
            break
    else:  # pragma: no cover - probability zero
        raise RuntimeError("could not draw a direction orthogonal to the state")
    chi = chi / norm
    phi = math.sqrt(target) * psi.amplitudes + math.sqrt(1.0 - target) * chi
    return PureState(phi, psi.dims).phase_normalized()


def _design_and_shot_rngs(seed, design_seed: int | None) -> tuple[np.random.Generator, np.random.Generator]:
    seed = int(seed)  # estimators need a splittable integer seed, not a live generator
    if design_seed is None:
        design_seed = child_seed(seed, 0)
    return rng_from_seed(design_seed), rng_from_seed(child_seed(seed, 1))


def _measurement_design(dim: int, num_bases: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Unitaries whose columns are the measurement vectors; the first is the
    standard basis, the rest are Haar random."""
    bases = [np.eye(dim, dtype=complex)]
    for _ in range(num_bases - 1):
        bases.append(haar_random_unitary(dim, rng))
    return bases


def _split_budget(n: int, num_bases: int) -> np.ndarray:
    per = np.full(num_bases, n // num_bases, dtype=int)
    per[: n % num_bases] += 1
    return per


def _linear_inversion(rows: list[np.ndarray], freqs: list[float], dim: int) -> np.ndarray:
    """Least-squares solve of tr(P_k X) = f_k, Hermitized."""
    a = np.array(rows)
    b = np.array(freqs, dtype=float)
    x, *_ = np.linalg.lstsq(a, b.astype(complex), rcond=None)
    x = x.reshape(dim, dim)
    return (x + x.conj().T) / 2.0


def _simulate_inversion(
    probabilities: Callable[[np.ndarray], np.ndarray],
    dim: int,
    n: int,
    design_rng: np.random.Generator,
    shot_rng: np.random.Generator,
) -> np.ndarray:
    num_bases = max(6, int(math.ceil(3.0 * math.log(dim))) * dim)
    bases = _measurement_design(dim, num_bases, design_rng)
    budgets = _split_budget(n, num_bases)
    rows: list[np.ndarray] = []
    freqs: list[float] = []
    for u, shots in zip(bases, budgets):
        if shots == 0:
            continue
        p = np.clip(probabilities(u), 0.0, None)
        p = p / p.sum()
        counts = shot_rng.multinomial(shots, p)
        f = counts / shots
        for j in range(dim):
            # row is vec(P^T) so that row . vec(X) = tr(P X)
            rows.append(np.outer(u[:, j].conj(), u[:, j]).reshape(-1))
            freqs.append(float(f[j]))
    return _linear_inversion(rows, freqs, dim)


def estimate_pure_state_from_measurements(
    psi_true: PureState, n: int, seed, design_seed: int | None = None
) -> PureState:
    """Reconstruct a pure state from n simulated single-copy measurements.

    Shots are split evenly across ceil(3 ln d) * d randomized orthonormal
    bases (at least 6), the empirical density matrix is recovered by linear
    inversion, and its top eigenvector is returned.
    """
    dim = psi_true.total_dim
    if n < dim * dim:
        raise ValueError(f"budget {n} is below the informational floor {dim * dim}")
    design_rng, shot_rng = _design_and_shot_rngs(seed, design_seed)
    amps = psi_true.amplitudes
    x = _simulate_inversion(
        lambda u: np.abs(u.conj().T @ amps) ** 2, dim, n, design_rng, shot_rng
    )
    _, v = np.linalg.eigh(x)
    top = v[:, -1]
    return PureState(top / np.linalg.norm(top), psi_true.dims).phase_normalized()


def estimate_mixed_state_from_measurements(
    rho_true: DensityMatrix, r: int, n: int, seed, design_seed: int | None = None
) -> DensityMatrix:
    """Rank-capped linear-inversion estimate of a mixed state.

    The raw inversion is projected to the physical set: negative eigenvalues
    are clamped to zero, the spectrum is truncated to the top r eigenpairs,
    and the trace is renormalized.
    """
    dim = rho_true.dim
    if not 1 <= r <= dim:
        raise ValueError(f"need 1 <= r <= d, got r={r}, d={dim}")
    if n < dim * dim:
        raise ValueError(f"budget {n} is below the informational floor {dim * dim}")
    design_rng, shot_rng = _design_and_shot_rngs(seed, design_seed)
    mat = rho_true.matrix
    x = _simulate_inversion(
        lambda u: np.real(np.sum(u.conj() * (mat @ u), axis=0)),
        dim,
        n,
        design_rng,
        shot_rng,
    )
    w, v = np.linalg.eigh(x)
    w = np.clip(w[::-1], 0.0, None)
    v = v[:, ::-1]
    w = w[:r]
    v = v[:, :r]
    total = w.sum()
    if total <= 0.0:  # pragma: no cover - requires adversarial shot data
        raise RuntimeError("all truncated eigenvalues vanished; cannot renormalize")
    return DensityMatrix.from_eigensystem(w / total, v)
