"""Independent numerical oracles used by the test suite.

Everything here is written against raw numpy arrays and deliberately avoids
the library's own fidelity/purification code paths, so it can serve as a
second opinion on them.
"""

from __future__ import annotations

import numpy as np


def eigh_desc(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(mat)
    return w[::-1], v[:, ::-1]


def canonical_purification(sigma_mat: np.ndarray, purifier_dim: int) -> np.ndarray:
    """(purifier_dim, d) coefficient matrix of a purification of sigma."""
    w, v = eigh_desc(sigma_mat)
    w = np.clip(w, 0.0, None)
    out = np.zeros((purifier_dim, sigma_mat.shape[0]), dtype=complex)
    k = min(purifier_dim, sigma_mat.shape[0])
    out[:k] = np.sqrt(w[:k])[:, None] * v[:, :k].T
    return out / np.linalg.norm(out)


def _random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r).copy()
    ph[np.abs(ph) == 0] = 1.0
    return q * (ph / np.abs(ph))


def _ascend(c: np.ndarray, u: np.ndarray, iters: int) -> float:
    """Hill-climb |tr(U C)|^2 over unitaries U along geodesics U exp(t*Om)."""
    z = np.trace(u @ c)
    f = abs(z) ** 2
    steps = (1.0, 0.5, 0.25, 0.1, 0.05, 0.02, 0.005, 0.001)
    for _ in range(iters):
        m = c @ u
        x = np.conj(z) * m
        om = -(x - x.conj().T) / 2.0  # steepest anti-Hermitian ascent direction
        norm = np.linalg.norm(om)
        if norm < 1e-14:
            break
        om = om / norm
        lam, q = np.linalg.eigh(-1j * om)  # om = i * herm, exp via eigenphases
        qh = q.conj().T
        improved = False
        for t in steps:
            e = q @ (np.exp(1j * t * lam)[:, None] * qh)
            u_new = u @ e
            z_new = np.trace(u_new @ c)
            if abs(z_new) ** 2 > f + 1e-15:
                u, z, f = u_new, z_new, abs(z_new) ** 2
                improved = True
                break
        if not improved:
            break
    return f


def uhlmann_fidelity_search(
    rho_mat: np.ndarray,
    sigma_mat: np.ndarray,
    restarts: int = 200,
    iters: int = 80,
    seed: int = 0,
) -> float:
    """Brute-force max of |<psi|phi>|^2 over purifications of sigma.

    psi is a fixed purification of rho; phi ranges over (U (x) I) phi0 for
    unitaries U on the purifying register, optimized by random-restart
    geodesic hill climbing. The overlap reduces to tr(U C) for the fixed
    overlap matrix C of the two canonical purifications.
    """
    d = rho_mat.shape[0]
    psi = canonical_purification(rho_mat, d)
    phi0 = canonical_purification(sigma_mat, d)
    c = phi0 @ psi.conj().T  # c[y, x] = sum_a conj(psi[x, a]) phi0[y, a]
    rng = np.random.default_rng(seed)
    best = 0.0
    for k in range(restarts):
        start = np.eye(d, dtype=complex) if k == 0 else _random_unitary(d, rng)
        best = max(best, _ascend(c, start, iters))
    return best


def random_density_matrix(d: int, rank: int, rng: np.random.Generator) -> np.ndarray:
    """Random rank-capped density matrix built directly from Gaussian factors."""
    a = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    mat = a @ a.conj().T
    return mat / np.real(np.trace(mat))
