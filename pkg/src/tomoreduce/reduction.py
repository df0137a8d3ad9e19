"""Reduction of mixed-state estimation to pure-state estimation, with a
verifier for every inequality its fidelity guarantee rests on.

Given a bipartite pure input, the protocol (1) forms the reduced state on the
Y register, (2) estimates it with a mixed-state backend, (3) projects the
input onto the estimate's support via a two-outcome measurement, keeping the
copies where the support outcome fired, and (4) re-estimates the
post-measurement state with a pure-state backend inside the surviving
subspace. When both backends achieve infidelity eps, the final estimate has
squared overlap at least 1 - 16*eps with the input; this module checks that
bound, the Cauchy-Schwarz step behind it, the projection identity, the
geometric composition it composes through, and the trace-distance behaviour
of the projection (the gentle-measurement question).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .measurement import (
    PROB_TOL,
    outcome_probability,
    project_and_renormalize,
    sample_shots,
)
from .seeding import child_seed, rng_from_seed
from .states import (
    DensityMatrix,
    PureState,
    fidelity_mixed,
    fidelity_pure_pure,
    optimal_purification_against,
    partial_trace_x,
    support_projector,
    trace_distance,
)
from .tomography import (
    BackendKind,
    TomographyBackend,
    oracle_trace_distance_estimate,
)

__all__ = [
    "CHAIN_SLACK",
    "ReductionError",
    "ReductionConfig",
    "ChainCheck",
    "ReductionReport",
    "ChainReport",
    "OverlapTriple",
    "GeometricCheck",
    "PropositionSearchResult",
    "GentleMeasurementResult",
    "run_reduction",
    "verify_chain",
    "geometric_composition",
    "proposition_search",
    "gentle_measurement_experiment",
]

CHAIN_SLACK = 1e-9  # absolute slack separating genuine violations from rounding
_WINDOW_SLACK = 1e-12  # float slack when testing whether a backend hit its window


class ReductionError(RuntimeError):
    """The support estimate is incompatible with the input state."""


@dataclass(frozen=True)
class ReductionConfig:
    """Parameters of one reduction run.

    ``n_copies`` is the sample count consumed by the mixed-state stage (in
    simulation those copies collapse to one classical reduced state, but the
    count enters the sample accounting). The projection stage consumes
    ``ceil(extra_copy_factor * r^2 / epsilon)`` additional copies.
    """

    r: int
    d: int
    n_copies: int
    epsilon: float
    extra_copy_factor: float = 4.0
    mixed_backend: TomographyBackend | None = None
    pure_backend: TomographyBackend | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if not 1 <= self.r <= self.d:
            raise ValueError(f"need 1 <= r <= d, got r={self.r}, d={self.d}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon!r}")
        if self.n_copies < 1:
            raise ValueError("n_copies must be at least 1")
        if self.extra_copy_factor <= 0.0:
            raise ValueError("extra_copy_factor must be positive")
        if self.mixed_backend is None:
            object.__setattr__(self, "mixed_backend", TomographyBackend.oracle(self.epsilon))
        if self.pure_backend is None:
            object.__setattr__(self, "pure_backend", TomographyBackend.oracle(self.epsilon))

    @property
    def extra_copies(self) -> int:
        return int(math.ceil(self.extra_copy_factor * self.r**2 / self.epsilon))


@dataclass(frozen=True)
class ChainCheck:
    """One inequality of the fidelity chain: value, bound, and the verdict.

    ``advisory`` marks checks that are recorded but never counted as
    violations (bounds stronger than the guaranteed one)."""

    name: str
    value: float
    bound: float
    satisfied: bool
    applicable: bool = True
    advisory: bool = False

    @property
    def violated(self) -> bool:
        return self.applicable and not self.advisory and not self.satisfied


def _chain_checks(
    epsilon: float,
    fidelity_mixed_estimate: float,
    keep_probability: float,
    projected_fidelity: float,
    estimate_fidelity: float | None,
    final_fidelity: float | None,
) -> tuple[ChainCheck, ...]:
    window_held = fidelity_mixed_estimate >= 1.0 - epsilon - _WINDOW_SLACK
    checks = [
        ChainCheck(
            name="keep_vs_mixed_fidelity",
            value=keep_probability,
            bound=fidelity_mixed_estimate,
            satisfied=keep_probability >= fidelity_mixed_estimate - CHAIN_SLACK,
        ),
        ChainCheck(
            name="keep_vs_epsilon",
            value=keep_probability,
            bound=1.0 - epsilon,
            satisfied=keep_probability >= 1.0 - epsilon - CHAIN_SLACK,
            applicable=window_held,
        ),
        ChainCheck(
            name="projection_identity",
            value=projected_fidelity,
            bound=keep_probability,
            satisfied=abs(projected_fidelity - keep_probability) <= CHAIN_SLACK,
        ),
    ]
    if estimate_fidelity is not None and final_fidelity is not None:
        final_applicable = window_held and estimate_fidelity >= 1.0 - epsilon - _WINDOW_SLACK
        checks.append(
            ChainCheck(
                name="final_vs_guaranteed_bound",
                value=final_fidelity,
                bound=1.0 - 16.0 * epsilon,
                satisfied=final_fidelity >= 1.0 - 16.0 * epsilon - CHAIN_SLACK,
                applicable=final_applicable,
            )
        )
        checks.append(
            ChainCheck(
                name="final_vs_tightened_bound",
                value=final_fidelity,
                bound=1.0 - 8.0 * epsilon,
                satisfied=final_fidelity >= 1.0 - 8.0 * epsilon - CHAIN_SLACK,
                applicable=final_applicable,
                advisory=True,
            )
        )
    return tuple(checks)


@dataclass(frozen=True, eq=False)
class ReductionReport:
    """Full trace of one reduction run.

    ``projected_fidelity`` is |<psi_tilde|psi>|^2 for the post-measurement
    state psi_tilde, ``estimate_fidelity`` is |<phi|psi_tilde>|^2 for the
    final estimate phi, and ``final_fidelity`` is |<phi|psi>|^2. The estimate
    fields are None when the pure-state stage was starved of copies.
    """

    sigma: DensityMatrix
    projector_rank: int
    fidelity_mixed_estimate: float
    keep_probability: float
    extra_copies: int
    kept_count: int
    projected_fidelity: float
    estimate_fidelity: float | None
    final_fidelity: float | None
    chain: tuple[ChainCheck, ...]
    samples_total: int
    low_yield: bool
    starved: bool
    projected_state: PureState
    estimate: PureState | None

    @property
    def violations(self) -> int:
        return sum(1 for c in self.chain if c.violated)


def run_reduction(psi: PureState, config: ReductionConfig) -> ReductionReport:
    """Run the four-stage reduction on one bipartite pure input.

    Stage seeds are derived from the config seed, so a run is a pure function
    of (psi, config). A keep probability at or below the projection tolerance
    raises :class:`ReductionError` (the support estimate misses the state
    entirely); a starved pure-state stage is reported, not raised.
    """
    if psi.dims != (config.r, config.d):
        raise ValueError(f"state dims {psi.dims} do not match config ({config.r}, {config.d})")
    seed_mixed, seed_shots, seed_pure = (child_seed(config.seed, k) for k in (2, 4, 5))

    rho = partial_trace_x(psi)
    sigma = config.mixed_backend.estimate_mixed(
        rho, rank=config.r, seed=seed_mixed, shots=config.n_copies
    )
    f_rho_sigma = fidelity_mixed(rho, sigma)

    pi = support_projector(sigma, config.r)
    keep_probability = outcome_probability(psi, pi)
    if keep_probability <= PROB_TOL:
        raise ReductionError(
            f"keep probability {keep_probability:.3e} is below {PROB_TOL:g}; "
            "the support estimate is disjoint from the input state"
        )
    extra_copies = config.extra_copies
    kept_count, _ = sample_shots(psi, pi, extra_copies, seed_shots)
    psi_tilde = project_and_renormalize(psi, pi)
    projected_fidelity = fidelity_pure_pure(psi_tilde, psi)
    low_yield = kept_count < math.ceil(extra_copies / 2)

    # The pure-state stage runs in coordinates on (X register) x supp(Pi),
    # a subspace of dimension r * rank(Pi) <= r^2.
    sub_dim = config.r * pi.rank
    if config.pure_backend.kind is BackendKind.MEASUREMENT_LINEAR_INVERSION:
        starved = kept_count < sub_dim * sub_dim
    else:
        starved = kept_count == 0

    estimate: PureState | None = None
    estimate_fidelity: float | None = None
    final_fidelity: float | None = None
    if not starved:
        if sub_dim == 1:
            # One-dimensional subspace: tomography is trivially exact.
            estimate = psi_tilde
        else:
            embed = np.kron(np.eye(config.r, dtype=complex), pi.basis)
            coords = embed.conj().T @ psi_tilde.amplitudes
            coords = coords / np.linalg.norm(coords)
            sub_state = PureState(coords, (config.r, pi.rank))
            phi_sub = config.pure_backend.estimate_pure(
                sub_state, seed=seed_pure, shots=kept_count
            )
            estimate = PureState(embed @ phi_sub.amplitudes, psi.dims).phase_normalized()
        estimate_fidelity = fidelity_pure_pure(estimate, psi_tilde)
        final_fidelity = fidelity_pure_pure(estimate, psi)

    chain = _chain_checks(
        config.epsilon,
        f_rho_sigma,
        keep_probability,
        projected_fidelity,
        estimate_fidelity,
        final_fidelity,
    )
    return ReductionReport(
        sigma=sigma,
        projector_rank=pi.rank,
        fidelity_mixed_estimate=f_rho_sigma,
        keep_probability=keep_probability,
        extra_copies=extra_copies,
        kept_count=kept_count,
        projected_fidelity=projected_fidelity,
        estimate_fidelity=estimate_fidelity,
        final_fidelity=final_fidelity,
        chain=chain,
        samples_total=config.n_copies + extra_copies,
        low_yield=low_yield,
        starved=starved,
        projected_state=psi_tilde,
        estimate=estimate,
    )


@dataclass(frozen=True, eq=False)
class ChainReport:
    """Outcome of a standalone chain verification on (psi, sigma, phi)."""

    fidelity_mixed_estimate: float
    uhlmann_overlap: float
    keep_probability: float
    usable: bool
    projected_fidelity: float | None
    estimate_fidelity: float | None
    final_fidelity: float | None
    epsilon: float | None
    checks: tuple[ChainCheck, ...]

    @property
    def violations(self) -> int:
        return sum(1 for c in self.checks if c.violated)


def verify_chain(
    psi: PureState,
    sigma: DensityMatrix,
    phi: PureState,
    epsilon: float | None = None,
) -> ChainReport:
    """Check every step of the fidelity chain on an explicit (psi, sigma, phi).

    Violations are reported, never raised. When epsilon is not supplied it is
    derived as the smallest value for which both chain hypotheses hold,
    namely max(1 - F(rho, sigma), 1 - |<phi|psi_tilde>|^2); the final-bound
    check is marked not applicable if that reaches 1.
    """
    rho = partial_trace_x(psi)
    f_rho_sigma = fidelity_mixed(rho, sigma)
    phi_opt = optimal_purification_against(sigma, psi)
    uhlmann_overlap = fidelity_pure_pure(psi, phi_opt)
    pi = support_projector(sigma, psi.r)
    keep_probability = outcome_probability(psi, pi)

    checks = [
        ChainCheck(
            name="uhlmann_attains_fidelity",
            value=uhlmann_overlap,
            bound=f_rho_sigma,
            satisfied=abs(uhlmann_overlap - f_rho_sigma) <= 1e-6,
        ),
        ChainCheck(
            name="keep_vs_mixed_fidelity",
            value=keep_probability,
            bound=f_rho_sigma,
            satisfied=keep_probability >= f_rho_sigma - CHAIN_SLACK,
        ),
    ]

    usable = keep_probability > PROB_TOL
    projected_fidelity: float | None = None
    estimate_fidelity: float | None = None
    final_fidelity: float | None = None
    if usable:
        psi_tilde = project_and_renormalize(psi, pi)
        projected_fidelity = fidelity_pure_pure(psi_tilde, psi)
        estimate_fidelity = fidelity_pure_pure(phi, psi_tilde)
        final_fidelity = fidelity_pure_pure(phi, psi)
        checks.append(
            ChainCheck(
                name="projection_identity",
                value=projected_fidelity,
                bound=keep_probability,
                satisfied=abs(projected_fidelity - keep_probability) <= CHAIN_SLACK,
            )
        )
        eps_eff = epsilon
        if eps_eff is None:
            eps_eff = max(1.0 - f_rho_sigma, 1.0 - estimate_fidelity, 1e-15)
        final_applicable = (
            eps_eff < 1.0
            and f_rho_sigma >= 1.0 - eps_eff - _WINDOW_SLACK
            and estimate_fidelity >= 1.0 - eps_eff - _WINDOW_SLACK
        )
        checks.append(
            ChainCheck(
                name="final_vs_guaranteed_bound",
                value=final_fidelity,
                bound=1.0 - 16.0 * eps_eff,
                satisfied=final_fidelity >= 1.0 - 16.0 * eps_eff - CHAIN_SLACK,
                applicable=final_applicable,
            )
        )
    else:
        eps_eff = epsilon
    return ChainReport(
        fidelity_mixed_estimate=f_rho_sigma,
        uhlmann_overlap=uhlmann_overlap,
        keep_probability=keep_probability,
        usable=usable,
        projected_fidelity=projected_fidelity,
        estimate_fidelity=estimate_fidelity,
        final_fidelity=final_fidelity,
        epsilon=eps_eff,
        checks=tuple(checks),
    )


@dataclass(frozen=True)
class OverlapTriple:
    """Overlap moduli a = |<psi_tilde|psi>|, b = |<phi|psi_tilde>|,
    c = |<phi|psi>| plus the phases aligning the first two overlaps."""

    a: float
    b: float
    c: float
    alpha: float
    beta: float

    @classmethod
    def from_states(cls, psi_tilde: PureState, psi: PureState, phi: PureState) -> "OverlapTriple":
        ip_a = psi_tilde.overlap(psi)
        ip_b = phi.overlap(psi_tilde)
        ip_c = phi.overlap(psi)
        # e^{i alpha} <psi_tilde|psi> and e^{i beta} <psi_tilde|phi> are real >= 0
        alpha = float(np.mod(-np.angle(ip_a), 2.0 * np.pi))
        beta = float(np.mod(np.angle(ip_b), 2.0 * np.pi))
        return cls(a=abs(ip_a), b=abs(ip_b), c=abs(ip_c), alpha=alpha, beta=beta)


@dataclass(frozen=True)
class GeometricCheck:
    """Verdict of the composition bound |<phi|psi>| >= 1 - 4*eta.

    dist_sq_* are the squared chordal distances 2 - 2*moduli after phase
    alignment; ``triangle_bound`` is 2*dist_sq_a + 2*dist_sq_b, which must
    dominate dist_sq_c for any genuine state triple.
    """

    lower_bound: float
    satisfied: bool
    applicable: bool
    dist_sq_a: float
    dist_sq_b: float
    dist_sq_c: float
    triangle_bound: float
    intermediates_satisfied: bool


def geometric_composition(t: OverlapTriple, eta: float) -> GeometricCheck:
    """Check c >= 1 - 4*eta for a triple with a, b >= 1 - eta.

    A triple that misses the precondition is reported as not applicable
    rather than as a failure. The intermediate steps are checked too: each
    aligned squared distance must stay below 2*eta and their doubled sum
    (at most 8*eta) must dominate the total squared distance.
    """
    if eta < 0.0:
        raise ValueError("eta must be nonnegative")
    applicable = t.a >= 1.0 - eta - _WINDOW_SLACK and t.b >= 1.0 - eta - _WINDOW_SLACK
    lower_bound = 1.0 - 4.0 * eta
    dist_sq_a = 2.0 - 2.0 * t.a
    dist_sq_b = 2.0 - 2.0 * t.b
    dist_sq_c = 2.0 - 2.0 * t.c
    triangle_bound = 2.0 * dist_sq_a + 2.0 * dist_sq_b
    # the triangle step holds for any genuine state triple; the 2*eta and
    # 8*eta caps additionally require the precondition
    triangle_ok = dist_sq_c <= triangle_bound + CHAIN_SLACK
    eta_caps_ok = (
        dist_sq_a <= 2.0 * eta + CHAIN_SLACK
        and dist_sq_b <= 2.0 * eta + CHAIN_SLACK
        and triangle_bound <= 8.0 * eta + CHAIN_SLACK
    )
    return GeometricCheck(
        lower_bound=lower_bound,
        satisfied=t.c >= lower_bound - CHAIN_SLACK,
        applicable=applicable,
        dist_sq_a=dist_sq_a,
        dist_sq_b=dist_sq_b,
        dist_sq_c=dist_sq_c,
        triangle_bound=triangle_bound,
        intermediates_satisfied=triangle_ok and (not applicable or eta_caps_ok),
    )


@dataclass(frozen=True)
class PropositionSearchResult:
    """Aggregate of a randomized search for composition-bound violations."""

    checked: int
    violations: int
    min_slack: float  # min over triples of c - (1 - 4*eta)
    min_c: float
    max_triangle_excess: float  # max of dist_sq_c - (2*dist_sq_a + 2*dist_sq_b)


def _random_unit_rows(rng: np.random.Generator, m: int, d: int) -> np.ndarray:
    z = rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _orthogonal_unit_rows(rng: np.random.Generator, base: np.ndarray) -> np.ndarray:
    m, d = base.shape
    z = rng.standard_normal((m, d)) + 1j * rng.standard_normal((m, d))
    ip = np.sum(base.conj() * z, axis=1)
    z = z - ip[:, None] * base
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    return z / np.maximum(norms, 1e-300)


def proposition_search(
    d: int,
    eta: float,
    count: int,
    seed,
    edge_fraction: float = 0.125,
    batch_size: int = 65536,
) -> PropositionSearchResult:
    """Randomized search over state triples satisfying a, b >= 1 - eta.

    Each triple is built by rotating a Haar-random state toward random
    orthogonal directions with overlap moduli drawn from [1 - eta, 1] (a
    fraction pinned exactly at the edge) and random relative phases, then
    c = |<phi|psi>| is tested against 1 - 4*eta with slack 1e-9.
    """
    if d < 2:
        raise ValueError("need dimension at least 2")
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must be in (0, 1)")
    if count < 1:
        raise ValueError("count must be positive")
    rng = rng_from_seed(seed)
    checked = 0
    violations = 0
    min_slack = np.inf
    min_c = np.inf
    max_excess = -np.inf
    lower_bound = 1.0 - 4.0 * eta
    while checked < count:
        m = min(batch_size, count - checked)
        n_edge = int(edge_fraction * m)
        psi = _random_unit_rows(rng, m, d)
        chi1 = _orthogonal_unit_rows(rng, psi)
        a = rng.uniform(1.0 - eta, 1.0, m)
        a[:n_edge] = 1.0 - eta
        th1 = rng.uniform(0.0, 2.0 * np.pi, m)
        psi_t = np.exp(1j * th1)[:, None] * (
            a[:, None] * psi + np.sqrt(1.0 - a**2)[:, None] * chi1
        )
        chi2 = _orthogonal_unit_rows(rng, psi_t)
        b = rng.uniform(1.0 - eta, 1.0, m)
        b[:n_edge] = 1.0 - eta
        th2 = rng.uniform(0.0, 2.0 * np.pi, m)
        phi = np.exp(1j * th2)[:, None] * (
            b[:, None] * psi_t + np.sqrt(1.0 - b**2)[:, None] * chi2
        )
        c = np.abs(np.sum(phi.conj() * psi, axis=1))
        slack = c - lower_bound
        violations += int(np.count_nonzero(slack < -CHAIN_SLACK))
        min_slack = min(min_slack, float(slack.min()))
        min_c = min(min_c, float(c.min()))
        excess = (2.0 - 2.0 * c) - (2.0 * (2.0 - 2.0 * a) + 2.0 * (2.0 - 2.0 * b))
        max_excess = max(max_excess, float(excess.max()))
        checked += m
    return PropositionSearchResult(
        checked=checked,
        violations=violations,
        min_slack=float(min_slack),
        min_c=float(min_c),
        max_triangle_excess=float(max_excess),
    )


@dataclass(frozen=True, eq=False)
class GentleMeasurementResult:
    """Trace-distance statistics of support projection under a calibrated
    trace-distance-delta support estimate."""

    delta: float
    requested_trials: int
    skipped: int
    trace_distances: np.ndarray
    ratios_sqrt: np.ndarray  # T / sqrt(delta)
    ratios_linear: np.ndarray  # T / delta

    def __post_init__(self) -> None:
        for name in ("trace_distances", "ratios_sqrt", "ratios_linear"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def completed(self) -> int:
        return self.trace_distances.size

    @property
    def max_trace_distance(self) -> float:
        return float(self.trace_distances.max()) if self.completed else float("nan")

    def ratio_sqrt_stats(self) -> tuple[float, float, float]:
        r = self.ratios_sqrt
        return float(r.min()), float(np.median(r)), float(r.max())

    def ratio_linear_stats(self) -> tuple[float, float, float]:
        r = self.ratios_linear
        return float(r.min()), float(np.median(r)), float(r.max())


def gentle_measurement_experiment(
    psi: PureState, delta: float, trials: int, seed
) -> GentleMeasurementResult:
    """How far does projecting onto an estimate's support move the state?

    Each trial builds a same-rank sigma with trace_distance(rho, sigma) in
    [delta/2, delta], projects psi onto sigma's support, and records the
    trace distance T between the projected and the original state together
    with the ratios T/sqrt(delta) and T/delta. Trials whose keep probability
    vanishes are skipped and counted. The T/delta trend is data, not a
    pass/fail: whether linear-in-delta closeness holds is an open question.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta!r}")
    if trials < 1:
        raise ValueError("trials must be positive")
    rho = partial_trace_x(psi)
    psi_dm = psi.to_density_matrix()
    sqrt_delta = math.sqrt(delta)
    distances: list[float] = []
    skipped = 0
    for t in range(trials):
        sigma = oracle_trace_distance_estimate(rho, delta, child_seed(int(seed), t))
        pi = support_projector(sigma, psi.r)
        if outcome_probability(psi, pi) <= PROB_TOL:
            skipped += 1
            continue
        psi_tilde = project_and_renormalize(psi, pi)
        distances.append(trace_distance(psi_tilde.to_density_matrix(), psi_dm))
    arr = np.array(distances, dtype=float)
    return GentleMeasurementResult(
        delta=delta,
        requested_trials=trials,
        skipped=skipped,
        trace_distances=arr,
        ratios_sqrt=arr / sqrt_delta,
        ratios_linear=arr / delta,
    )
