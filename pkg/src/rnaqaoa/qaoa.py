"""Alternating-layer solver loop: warm starts, level climbing, postselection.

The solver optimizes a level-p schedule (p cost angles, p mixer angles) with
SLSQP, samples the optimized circuit, drops rare outcomes, and either stops
(one outcome dominates) or grows the schedule to level p+1 by barycentric
interpolation on Chebyshev nodes and repeats, up to p_max.  The reported
solution is the lowest-energy bitstring among the retained samples of all
visited levels.

Parameter bounds are beta in [0, pi] (the X rotation has period pi up to a
global phase) and gamma in [-2*pi, 2*pi]; interpolated schedules are clipped
back into the box before re-optimization.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib.resources import files

import numpy as np
from scipy.optimize import minimize

from .errors import ResourceLimitError
from .qubo import (
    DEGENERACY_ATOL,
    MAX_QUBITS,
    IsingModel,
    QuboModel,
    QuboParams,
    brute_force_solve,
    build_qubo,
    ising_energy,
    to_ising,
)
from .rna import Domain, StemSet, partition_domains
from .simulator import (
    CostLayerSpec,
    MixerSpec,
    QuantumState,
    SampleSet,
    apply_cost_layer,
    apply_mixer,
    cost_layer_ops,
    init_uniform,
    mixer_layer_ops,
    prepare_w_states,
    ring_pairs,
    sample,
    two_qubit_gate_count,
)

BETA_BOUNDS = (0.0, math.pi)
GAMMA_BOUNDS = (-2.0 * math.pi, 2.0 * math.pi)

MIXER_KINDS = ("x", "parity_xy")


@dataclass(frozen=True)
class QaoaConfig:
    p_start: int = 2
    p_max: int = 8
    shots: int = 1000
    dropoff: float = 0.10
    stop_frequency: float = 0.90
    mixer: str = "x"
    max_evaluations: int = 400
    fd_step: float = 1e-3
    seed: int = 0
    #: "exact" evaluates the optimizer objective on the exact final-state
    #: distribution; "sampled" re-samples `shots` measurements per evaluation.
    loss_mode: str = "exact"
    #: Drop-off applied inside the optimizer objective.  Postselection is a
    #: sample-processing step; baking it into the objective flattens the
    #: landscape (one retained entry makes it locally constant), so the
    #: optimizer defaults to the plain energy expectation.  The reported
    #: per-level losses always use `dropoff`.
    optimizer_dropoff: float = 0.0

    def __post_init__(self):
        if not 1 <= self.p_start <= self.p_max:
            raise ValueError("need 1 <= p_start <= p_max")
        if not 0.0 <= self.dropoff < self.stop_frequency <= 1.0:
            raise ValueError("need 0 <= dropoff < stop_frequency <= 1")
        if not 0.0 <= self.optimizer_dropoff <= 1.0:
            raise ValueError("optimizer_dropoff must be a proportion")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.mixer not in MIXER_KINDS:
            raise ValueError(f"mixer must be one of {MIXER_KINDS}")
        if self.loss_mode not in ("exact", "sampled"):
            raise ValueError("loss_mode must be 'exact' or 'sampled'")


@dataclass(frozen=True)
class ParameterSchedule:
    """One (beta, gamma) angle pair per level."""

    betas: tuple[float, ...]
    gammas: tuple[float, ...]

    def __post_init__(self):
        if len(self.betas) != len(self.gammas):
            raise ValueError("betas and gammas must have equal length")
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))

    @property
    def p(self) -> int:
        return len(self.betas)


# ---------------------------------------------------------------------------
# loss


def retained_entries(samples: SampleSet, dropoff: float) -> tuple[tuple[str, int], ...]:
    """Entries with frequency >= dropoff; all entries if none survive."""
    kept = tuple(e for e in samples.entries if e[1] / samples.shots >= dropoff)
    return kept if kept else samples.entries


def loss(samples: SampleSet, ising: IsingModel, dropoff: float) -> float:
    """Frequency-weighted mean energy over the post-dropoff samples."""
    if not samples.entries:
        raise ValueError("empty sample set")
    kept = retained_entries(samples, dropoff)
    total = sum(c for _, c in kept)
    return sum(c * ising_energy(ising, b) for b, c in kept) / total


def _expected_loss(probs: np.ndarray, energies: np.ndarray, dropoff: float) -> float:
    """Same postselection rule evaluated on the exact distribution."""
    mask = probs >= dropoff
    if mask.any():
        w = probs[mask]
        return float(w @ energies[mask] / w.sum())
    return float(probs @ energies)


# ---------------------------------------------------------------------------
# schedule interpolation


def chebyshev_nodes(p: int) -> np.ndarray:
    """Abscissae cos(i*pi/p) for i = 1..p (descending, last is -1)."""
    return np.cos(np.arange(1, p + 1) * np.pi / p)


def _barycentric_resample(values: tuple[float, ...], new_nodes: np.ndarray) -> tuple[float, ...]:
    old = chebyshev_nodes(len(values))
    weights = np.array(
        [1.0 / np.prod([old[j] - old[k] for k in range(len(old)) if k != j])
         for j in range(len(old))]
    )
    vals = np.asarray(values, dtype=float)
    out = []
    for t in new_nodes:
        diff = t - old
        exact = np.flatnonzero(diff == 0.0)
        if exact.size:
            out.append(float(vals[exact[0]]))
            continue
        share = weights / diff
        share /= share.sum()
        # anchored form: constants reproduce exactly, not just to roundoff
        out.append(float(vals[0] + share @ (vals - vals[0])))
    return tuple(out)


def resample_schedule(schedule: ParameterSchedule, new_p: int) -> ParameterSchedule:
    """Evaluate the schedule's interpolating polynomial at the new-level nodes."""
    if new_p < 1:
        raise ValueError("levels must be >= 1")
    nodes = chebyshev_nodes(new_p)
    return ParameterSchedule(
        betas=_barycentric_resample(schedule.betas, nodes),
        gammas=_barycentric_resample(schedule.gammas, nodes),
    )


def interpolate_schedule(schedule: ParameterSchedule) -> ParameterSchedule:
    """Grow a level-p schedule to level p+1 (pure interpolation, no clipping)."""
    return resample_schedule(schedule, schedule.p + 1)


def clip_schedule(schedule: ParameterSchedule) -> ParameterSchedule:
    return ParameterSchedule(
        betas=tuple(min(max(b, BETA_BOUNDS[0]), BETA_BOUNDS[1]) for b in schedule.betas),
        gammas=tuple(min(max(g, GAMMA_BOUNDS[0]), GAMMA_BOUNDS[1]) for g in schedule.gammas),
    )


def shipped_warmup(mixer: str) -> ParameterSchedule:
    """Level-2 warm-start schedule shipped with the package.

    Regenerate with scripts/regenerate_warmup.py (or the `warmup` CLI
    subcommand) after changing the benchmark set or objective defaults.
    """
    raw = json.loads(files("rnaqaoa").joinpath("data/warmup_defaults.json").read_text())
    entry = raw[mixer]
    return ParameterSchedule(betas=tuple(entry["betas"]), gammas=tuple(entry["gammas"]))


# ---------------------------------------------------------------------------
# problem assembly


@dataclass(frozen=True)
class Problem:
    """Everything needed to run circuits for one stem set and mixer.

    phase_scale is half the spread of the energy diagonal; cost layers are
    driven with gamma/phase_scale so that a gamma interval of a few radians
    explores comparable landscapes regardless of the instance's energy
    scale.  Losses and reported energies always use the raw diagonal.
    """

    stems: StemSet
    params: QuboParams
    mixer: MixerSpec
    qubo: QuboModel
    ising: IsingModel
    cost: CostLayerSpec
    domains: tuple[Domain, ...] | None
    initial: QuantumState
    phase_scale: float

    @property
    def n_stems(self) -> int:
        return len(self.stems)

    @property
    def n_qubits(self) -> int:
        return self.ising.n

    def effective_gammas(self, schedule: ParameterSchedule) -> tuple[float, ...]:
        """Angles that reproduce the normalized phase layer on raw energies."""
        return tuple(g / self.phase_scale for g in schedule.gammas)


def build_problem(stems: StemSet, params: QuboParams, mixer_kind: str) -> Problem:
    if mixer_kind not in MIXER_KINDS:
        raise ValueError(f"mixer must be one of {MIXER_KINDS}")
    qubo = build_qubo(stems, params)
    domains = tuple(partition_domains(stems)) if mixer_kind == "parity_xy" else None
    ising = to_ising(qubo, list(domains) if domains else None)
    if ising.n > MAX_QUBITS:
        raise ResourceLimitError(
            f"{ising.n} qubits (stems {qubo.n}"
            + (f" + {len(domains)} dummies" if domains else "")
            + f") exceed the dense limit of {MAX_QUBITS}"
        )
    cost = CostLayerSpec.from_ising(ising)
    spread = float(cost.diagonal.max() - cost.diagonal.min())
    if mixer_kind == "x":
        mixer = MixerSpec.x_mixer(ising.n)
        initial = init_uniform(ising.n)
    else:
        mixer = MixerSpec.parity_xy(list(domains), ising.n)
        initial = prepare_w_states(list(domains), ising.n)
    return Problem(
        stems=stems, params=params, mixer=mixer, qubo=qubo, ising=ising,
        cost=cost, domains=domains, initial=initial,
        phase_scale=spread / 2 if spread > 0 else 1.0,
    )


def run_schedule(problem: Problem, schedule: ParameterSchedule) -> QuantumState:
    """Alternating cost/mixer layers applied to the problem's initial state."""
    state = problem.initial
    for beta, gamma in zip(schedule.betas, problem.effective_gammas(schedule)):
        state = apply_cost_layer(state, problem.cost, gamma)
        state = apply_mixer(state, problem.mixer, beta)
    return state


def circuit_for_schedule(problem: Problem, schedule: ParameterSchedule):
    """Gate-level circuit equivalent to run_schedule (up to global phase)."""
    from .simulator import qaoa_circuit_ops

    return qaoa_circuit_ops(
        problem.cost, problem.mixer, schedule.betas, problem.effective_gammas(schedule)
    )


# ---------------------------------------------------------------------------
# classical optimization


class _BudgetExhausted(Exception):
    pass


#: Scale of the Gaussian perturbation used to seed follow-up descents.
_RESTART_JITTER = 0.25


def optimize(
    problem: Problem,
    schedule: ParameterSchedule,
    config: QaoaConfig,
    seed: int = 0,
) -> tuple[ParameterSchedule, QuantumState, float]:
    """SLSQP over the 2p angles, capped at `max_evaluations` loss evaluations.

    The first descent starts from the given schedule; any budget left after
    it converges funds further descents from seeded random starts, which
    keeps one bad warm-start basin from being inherited level after level.
    Returns the best schedule seen (the input counts as evaluation zero, so
    a zero budget returns it unchanged), its final state and its loss.
    """
    p = schedule.p
    clipped = clip_schedule(schedule)
    x0 = np.array(clipped.betas + clipped.gammas)
    bounds = [BETA_BOUNDS] * p + [GAMMA_BOUNDS] * p
    rng = np.random.default_rng(seed)

    def state_at(x: np.ndarray) -> QuantumState:
        return run_schedule(problem, ParameterSchedule(tuple(x[:p]), tuple(x[p:])))

    def loss_at(x: np.ndarray) -> float:
        state = state_at(x)
        if config.loss_mode == "exact":
            return _expected_loss(
                state.probabilities(), problem.cost.diagonal, config.optimizer_dropoff
            )
        drawn = sample(state, config.shots, int(rng.integers(2**63)))
        return loss(drawn, problem.ising, config.optimizer_dropoff)

    evals: list[tuple[float, np.ndarray]] = [(loss_at(x0), x0)]

    def fun(x: np.ndarray) -> float:
        if len(evals) > config.max_evaluations:
            raise _BudgetExhausted
        val = loss_at(x)
        evals.append((val, x.copy()))
        return val

    lo = np.array([BETA_BOUNDS[0]] * p + [GAMMA_BOUNDS[0]] * p)
    hi = np.array([BETA_BOUNDS[1]] * p + [GAMMA_BOUNDS[1]] * p)
    start = x0
    while len(evals) <= config.max_evaluations:
        try:
            minimize(
                fun, start, method="SLSQP", bounds=bounds,
                options={"maxiter": 500, "eps": config.fd_step, "ftol": 1e-8},
            )
        except _BudgetExhausted:
            break
        if len(evals) + 2 * p + 2 > config.max_evaluations:
            break  # not enough budget left for another descent to move
        _, anchor = min(evals, key=lambda t: t[0])
        start = np.clip(anchor + rng.normal(0.0, _RESTART_JITTER, 2 * p), lo, hi)
    best_val, best_x = min(evals, key=lambda t: t[0])
    best = ParameterSchedule(tuple(best_x[:p]), tuple(best_x[p:]))
    return best, state_at(best_x), best_val


# ---------------------------------------------------------------------------
# warm-up calibration


def warmup_parameters(
    instances: list[StemSet],
    params: QuboParams,
    mixer_kind: str,
    grid_points: int = 16,
    dropoff: float = 0.0,
) -> ParameterSchedule:
    """Average of per-instance exhaustive level-2 grid optima.

    Near-optimal angles concentrate across instances, so the component-wise
    mean of per-instance grid argmins is a good start for any instance.  The
    gamma grid covers [0, 2*pi] only: the distribution is invariant under
    (beta, gamma) -> (pi - beta, -gamma), so every optimum has a mirror in
    the non-negative half and averaging across mirrors would cancel.
    """
    if not instances:
        raise ValueError("need at least one calibration instance")
    betas_axis = np.linspace(BETA_BOUNDS[0], BETA_BOUNDS[1], grid_points)
    gammas_axis = np.linspace(0.0, 2.0 * math.pi, grid_points)
    optima = []
    for stems in instances:
        problem = build_problem(stems, params, mixer_kind)
        diag = problem.cost.diagonal
        scale = problem.phase_scale
        best = (math.inf, None)
        for g1 in gammas_axis:
            for b1 in betas_axis:
                mid = apply_mixer(
                    apply_cost_layer(problem.initial, problem.cost, g1 / scale),
                    problem.mixer, b1,
                )
                for g2 in gammas_axis:
                    cooled = apply_cost_layer(mid, problem.cost, g2 / scale)
                    for b2 in betas_axis:
                        final = apply_mixer(cooled, problem.mixer, b2)
                        val = _expected_loss(final.probabilities(), diag, dropoff)
                        if val < best[0]:
                            best = (val, (b1, b2, g1, g2))
        optima.append(best[1])
    arr = np.array(optima)
    return ParameterSchedule(
        betas=(float(arr[:, 0].mean()), float(arr[:, 1].mean())),
        gammas=(float(arr[:, 2].mean()), float(arr[:, 3].mean())),
    )


# ---------------------------------------------------------------------------
# full solver loop


@dataclass(frozen=True)
class LevelRecord:
    level: int
    schedule: ParameterSchedule
    samples: SampleSet
    loss: float
    ground_state_frequency: float
    stopped: bool


@dataclass(frozen=True)
class QaoaResult:
    best_bitstrings: tuple[str, ...]
    best_energy: float
    levels: tuple[LevelRecord, ...]
    terminating_level: int
    termination_reason: str
    ground_state_energy: float
    mixer: str
    n_stems: int
    n_qubits: int

    @property
    def best_objective(self) -> float:
        return -self.best_energy


def _ground_state_frequency(
    samples: SampleSet, qubo: QuboModel, optimum: float, n_stems: int
) -> float:
    hits = 0
    for bits, count in samples.entries:
        if qubo.evaluate(bits[:n_stems]) >= optimum - DEGENERACY_ATOL:
            hits += count
    return hits / samples.shots


def solve(
    stems: StemSet,
    params: QuboParams = QuboParams(),
    config: QaoaConfig = QaoaConfig(),
    warmup: ParameterSchedule | None = None,
) -> QaoaResult:
    """Run the full level-climbing loop and report the best retained sample.

    Stops early once one sampled outcome exceeds `stop_frequency`, otherwise
    climbs to p_max.  Dummy bits are stripped from reported bitstrings; all
    degenerate lowest-energy solutions are returned.
    """
    if len(stems) == 0:
        return QaoaResult(
            best_bitstrings=("",), best_energy=0.0, levels=(),
            terminating_level=0, termination_reason="empty",
            ground_state_energy=0.0, mixer=config.mixer, n_stems=0, n_qubits=0,
        )
    problem = build_problem(stems, params, config.mixer)
    _, optimum = brute_force_solve(problem.qubo)
    rng = np.random.default_rng(config.seed)
    if warmup is None:
        warmup = shipped_warmup(config.mixer)
    schedule = clip_schedule(
        warmup if warmup.p == config.p_start else resample_schedule(warmup, config.p_start)
    )

    records: list[LevelRecord] = []
    reason = "p_max"
    p = config.p_start
    while True:
        opt_seed = int(rng.integers(2**63))
        schedule, state, _ = optimize(problem, schedule, config, seed=opt_seed)
        samples = sample(state, config.shots, int(rng.integers(2**63)))
        stopped = samples.max_frequency() > config.stop_frequency
        records.append(
            LevelRecord(
                level=p,
                schedule=schedule,
                samples=samples,
                loss=loss(samples, problem.ising, config.dropoff),
                ground_state_frequency=_ground_state_frequency(
                    samples, problem.qubo, optimum, problem.n_stems
                ),
                stopped=stopped,
            )
        )
        if stopped:
            reason = "stop_frequency"
            break
        if p >= config.p_max:
            break
        schedule = clip_schedule(interpolate_schedule(schedule))
        p += 1

    pool: dict[str, float] = {}
    for rec in records:
        for bits, _ in retained_entries(rec.samples, config.dropoff):
            pool[bits] = float(problem.cost.diagonal[int(bits, 2)])
    best_energy = min(pool.values())
    winners = sorted(
        {bits[: problem.n_stems] for bits, e in pool.items() if e <= best_energy + DEGENERACY_ATOL}
    )
    return QaoaResult(
        best_bitstrings=tuple(winners),
        best_energy=best_energy,
        levels=tuple(records),
        terminating_level=records[-1].level,
        termination_reason=reason,
        ground_state_energy=-optimum,
        mixer=config.mixer,
        n_stems=problem.n_stems,
        n_qubits=problem.n_qubits,
    )


def level_for_pmax(result: QaoaResult, p_max: int) -> LevelRecord:
    """Level record an identical run capped at `p_max` would have ended on.

    Per-level work never looks ahead (seeds are drawn lazily, interpolation
    only uses earlier levels), so truncating the history reproduces a
    smaller-p_max run exactly.
    """
    eligible = [r for r in result.levels if r.level <= p_max]
    if not eligible:
        raise ValueError(f"run started above p_max={p_max}")
    for rec in eligible:
        if rec.stopped:
            return rec
    return eligible[-1]


# ---------------------------------------------------------------------------
# gate-count report


@dataclass(frozen=True)
class DomainGateCount:
    size: int
    cost_two_qubit: int      # same-domain ZZ terms, 2 gates each
    mixer_two_qubit: int     # XX+YY ring sublayers, 4 gates per pair
    state_prep_two_qubit: int


@dataclass(frozen=True)
class GateCountReport:
    mixer: str
    levels: int
    n_qubits: int
    cost_two_qubit_per_level: int
    mixer_two_qubit_per_level: int
    state_prep_two_qubit: int
    domains: tuple[DomainGateCount, ...]

    @property
    def total_two_qubit(self) -> int:
        return self.state_prep_two_qubit + self.levels * (
            self.cost_two_qubit_per_level + self.mixer_two_qubit_per_level
        )


def gate_count_report(
    stems: StemSet, params: QuboParams, mixer_kind: str, levels: int
) -> GateCountReport:
    """Two-qubit gate counts per layer, from the actual circuit structure.

    Every ZZ coupling costs 2 gates, each XX+YY pair rotation costs 4, and
    preparing one domain's weight-1 state costs 2d.  For a domain of size d
    that means d^2-d cost gates per level under the plain mixer versus
    4(d+1) mixer gates (and no same-domain cost gates) under the
    excitation-preserving one; the latter is cheaper per level for d >= 6.
    """
    if len(stems) == 0:
        return GateCountReport(
            mixer=mixer_kind, levels=levels, n_qubits=0,
            cost_two_qubit_per_level=0, mixer_two_qubit_per_level=0,
            state_prep_two_qubit=0, domains=(),
        )
    problem = build_problem(stems, params, mixer_kind)
    all_domains = partition_domains(stems)
    member_sets = [set(d.members) for d in all_domains]

    per_domain = []
    for dom, members in zip(all_domains, member_sets):
        same = sum(
            1 for (i, j) in problem.qubo.quadratic
            if i in members and j in members
        )
        ring = dom.ring()
        per_domain.append(
            DomainGateCount(
                size=dom.size,
                cost_two_qubit=2 * same,
                mixer_two_qubit=4 * len(ring_pairs(ring)),
                state_prep_two_qubit=2 * (len(ring) - 1),
            )
        )

    cost_per_level = 2 * sum(1 for v in problem.ising.J.values() if v)
    if mixer_kind == "x":
        mixer_per_level = 0
        prep = 0
    else:
        mixer_per_level = sum(d.mixer_two_qubit for d in per_domain)
        prep = sum(d.state_prep_two_qubit for d in per_domain)
    report = GateCountReport(
        mixer=mixer_kind,
        levels=levels,
        n_qubits=problem.n_qubits,
        cost_two_qubit_per_level=cost_per_level,
        mixer_two_qubit_per_level=mixer_per_level,
        state_prep_two_qubit=prep,
        domains=tuple(per_domain),
    )
    # sanity: counts above must match the emitted circuits
    assert cost_per_level == two_qubit_gate_count(cost_layer_ops(problem.ising, 1.0))
    assert mixer_per_level == two_qubit_gate_count(mixer_layer_ops(problem.mixer, 1.0))
    return report
