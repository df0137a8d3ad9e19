"""Two-outcome projective measurement {P, I - P} on the Y register.

The measurement acts on the second register of a bipartite pure state.
Because copies are i.i.d. and the post-measurement state is the same for
every kept copy, shots are simulated as independent Bernoulli draws on the
analytic keep probability; this is exact, not an approximation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .seeding import rng_from_seed
from .states import Projector, PureState

__all__ = [
    "PROB_TOL",
    "ProjectionError",
    "MeasurementOutcome",
    "outcome_probability",
    "project_and_renormalize",
    "sample_shots",
    "measure",
]

PROB_TOL = 1e-12  # outcome probabilities at or below this cannot be renormalized


class ProjectionError(RuntimeError):
    """The projection norm is too small to renormalize.

    Signals that the support estimate behind the projector misses the state;
    dividing by a near-zero norm would amplify rounding noise past any
    tolerance, so the condition is reported instead.
    """


@dataclass(frozen=True, eq=False)
class MeasurementOutcome:
    """One projective shot: which outcome fired and the collapsed state."""

    kept: bool  # True means the P outcome
    probability_kept: float
    post_state: PureState


def _check_dims(psi: PureState, pi: Projector) -> None:
    if pi.dimension != psi.d:
        raise ValueError(
            f"projector acts on dimension {pi.dimension}, state's Y register has {psi.d}"
        )


def outcome_probability(psi: PureState, pi: Projector) -> float:
    """Probability <psi|(I (x) P)|psi> of the keep outcome."""
    _check_dims(psi, pi)
    g = psi.as_matrix() @ pi.basis.conj()
    return float(np.clip(np.sum(np.abs(g) ** 2), 0.0, 1.0))


def project_and_renormalize(psi: PureState, pi: Projector) -> PureState:
    """Post-measurement state (I (x) P)|psi> / ||(I (x) P)|psi>||."""
    _check_dims(psi, pi)
    m = psi.as_matrix()
    g = m @ pi.basis.conj()
    p = float(np.sum(np.abs(g) ** 2))
    if p <= PROB_TOL:
        raise ProjectionError(f"projection norm squared {p:.3e} is below {PROB_TOL:g}")
    projected = g @ pi.basis.T
    return PureState((projected / np.sqrt(p)).reshape(-1), psi.dims).phase_normalized()


def sample_shots(psi: PureState, pi: Projector, shots: int, seed) -> tuple[int, np.ndarray]:
    """i.i.d. keep/discard outcomes for `shots` copies, deterministic per seed.

    Returns (kept_count, outcomes) where outcomes is a boolean array with
    True marking the keep outcome. All kept copies collapse to the one state
    returned by :func:`project_and_renormalize`.
    """
    if shots < 0:
        raise ValueError("shot count must be nonnegative")
    p = outcome_probability(psi, pi)
    rng = rng_from_seed(seed)
    outcomes = rng.random(shots) < p
    return int(np.count_nonzero(outcomes)), outcomes


def measure(psi: PureState, pi: Projector, seed) -> MeasurementOutcome:
    """Perform one projective shot and return the collapsed state either way."""
    p = outcome_probability(psi, pi)
    rng = rng_from_seed(seed)
    kept = bool(rng.random() < p)
    if kept:
        post = project_and_renormalize(psi, pi)
    else:
        m = psi.as_matrix()
        residual = m - (m @ pi.basis.conj()) @ pi.basis.T
        q = float(np.sum(np.abs(residual) ** 2))
        if q <= PROB_TOL:
            raise ProjectionError(
                f"discard-outcome norm squared {q:.3e} is below {PROB_TOL:g}"
            )
        post = PureState((residual / np.sqrt(q)).reshape(-1), psi.dims).phase_normalized()
    return MeasurementOutcome(kept=kept, probability_kept=p, post_state=post)
