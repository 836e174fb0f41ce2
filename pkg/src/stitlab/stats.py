"""Goodness-of-fit machinery and the Monte Carlo equivalence harness.

The harness turns the distributional claims about the processes into
executable checks: conditional jump-count laws on frozen weight sequences,
unconditional cell-count comparison of the two continuous models, the
geometric law of the equally-likely clock, the deterministic tail-vs-CDF
identity, and the selection probabilities of the discrete process.  Checks
are seeded per replica so every report is reproducible from (seed, config).

Negative controls are built in: a mutated clock (`poisson-clock` or
`wrong-rate`) must make the stochastic checks fail, so the harness cannot
pass vacuously.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy import special
from scipy.stats import chi2 as _chi2

from .distributions import (
    TruncationPolicy,
    cowan_count_pmf,
    discrete_jump_pmf_mass,
    discrete_waiting_pmf_mass,
    mecke_jump_tail,
    nu_pmf,
    stit_jump_cdf,
    verify_binomial_gamma_identity,
    verify_lagrange_gamma_identity,
    verify_lagrange_identity,
    verify_telescoping_identity,
)
from .errors import DegenerateBins, DomainError, LCollision, StitlabError, TooFewSamples
from .geometry import ConvexPolygon
from .line_measure import LineMeasureSpec, hitting_measure, measure_to_json
from .processes import (
    LSequence,
    final_state,
    initial_quasi_state,
    l_sequence,
    mecke_continuous_simulate,
    mecke_discrete_simulate,
    mecke_discrete_step,
    stit_simulate,
)

MUTATIONS = (None, "poisson-clock", "wrong-rate")
WRONG_RATE_FACTOR = 1.2


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one identity or goodness-of-fit check."""

    check_name: str
    statistic: float
    p_value: float | None
    tolerance: float
    passed: bool
    sample_size: int
    seed: int
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "check_name": self.check_name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "sample_size": self.sample_size,
            "seed": self.seed,
            "note": self.note,
        }


def format_report_table(reports: Sequence[VerificationReport]) -> str:
    lines = [f"{'check':<28} {'statistic':>12} {'p-value':>10} {'tol':>9} {'n':>8}  result"]
    for r in reports:
        p_txt = f"{r.p_value:.3g}" if r.p_value is not None else "-"
        lines.append(
            f"{r.check_name:<28} {r.statistic:>12.4g} {p_txt:>10} {r.tolerance:>9.3g}"
            f" {r.sample_size:>8d}  {'PASS' if r.passed else 'FAIL'}"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# test statistics


def ks_test(samples: Iterable[float], cdf: Callable) -> tuple[float, float]:
    """One-sample Kolmogorov-Smirnov statistic and asymptotic p-value."""
    x = np.sort(np.asarray(list(samples), dtype=float))
    n = x.size
    if n < 10:
        raise TooFewSamples(f"need >= 10 samples, got {n}")
    f = np.asarray(cdf(x), dtype=float)
    if f.shape != x.shape:
        f = np.array([float(cdf(v)) for v in x])
    d_plus = float(np.max(np.arange(1, n + 1) / n - f))
    d_minus = float(np.max(f - np.arange(0, n) / n))
    d = max(d_plus, d_minus)
    return d, float(special.kolmogorov(math.sqrt(n) * d))


def counts_from_values(values: Iterable[int]) -> dict[int, int]:
    """Integer histogram as a plain dict."""
    uniq, cnt = np.unique(np.asarray(list(values), dtype=np.int64), return_counts=True)
    return {int(k): int(c) for k, c in zip(uniq, cnt)}


def _merge_bins(raw: list[list[float]], min_expected: float, expected_col: int) -> list[list[float]]:
    """Greedy left-to-right merge until each bin's expected column reaches the floor."""
    merged: list[list[float]] = []
    acc = [0.0] * len(raw[0])
    for row in raw:
        acc = [a + b for a, b in zip(acc, row)]
        if acc[expected_col] >= min_expected:
            merged.append(acc)
            acc = [0.0] * len(raw[0])
    if any(acc):
        if merged:
            merged[-1] = [a + b for a, b in zip(merged[-1], acc)]
        else:
            merged.append(acc)
    return merged


def chi_square_gof(
    counts: Mapping[int, int],
    pmf: Callable[[int], float],
    *,
    min_expected: float = 5.0,
    support_lo: int | None = None,
) -> tuple[float, float, int]:
    """Pearson test of an integer histogram against a pmf.

    Bins run from `support_lo` (default: smallest observed value, which must
    be the start of the pmf's support) to the largest observed value; the
    pmf mass beyond that range is folded into the last bin.  Adjacent bins
    are merged until every expected count reaches `min_expected`.
    """
    if not counts:
        raise DegenerateBins("empty histogram")
    lo = min(counts) if support_lo is None else support_lo
    hi = max(counts)
    n = sum(counts.values())
    raw = []
    cum = 0.0
    for k in range(lo, hi + 1):
        q = float(pmf(k))
        cum += q
        raw.append([float(counts.get(k, 0)), n * q])
    raw[-1][1] += n * max(0.0, 1.0 - cum)
    merged = _merge_bins(raw, min_expected, expected_col=1)
    if len(merged) < 2:
        raise DegenerateBins(f"only {len(merged)} bin(s) after merging")
    stat = math.fsum((o - e) ** 2 / e for o, e in merged)
    dof = len(merged) - 1
    return stat, float(_chi2.sf(stat, dof)), dof


def two_sample_chi_square(
    counts_a: Mapping[int, int],
    counts_b: Mapping[int, int],
    *,
    min_expected: float = 5.0,
) -> tuple[float, float]:
    """Contingency-table test that two integer histograms share a law."""
    if not counts_a or not counts_b:
        raise DegenerateBins("empty histogram")
    lo = min(min(counts_a), min(counts_b))
    hi = max(max(counts_a), max(counts_b))
    n_a = sum(counts_a.values())
    n_b = sum(counts_b.values())
    total = n_a + n_b
    raw = []
    for k in range(lo, hi + 1):
        o_a = float(counts_a.get(k, 0))
        o_b = float(counts_b.get(k, 0))
        col = o_a + o_b
        raw.append([o_a, o_b, min(n_a, n_b) * col / total])
    merged = _merge_bins(raw, min_expected, expected_col=2)
    if len(merged) < 2:
        raise DegenerateBins(f"only {len(merged)} bin(s) after merging")
    stat = 0.0
    for o_a, o_b, _ in merged:
        col = o_a + o_b
        e_a = n_a * col / total
        e_b = n_b * col / total
        stat += (o_a - e_a) ** 2 / e_a + (o_b - e_b) ** 2 / e_b
    dof = len(merged) - 1
    return stat, float(_chi2.sf(stat, dof))


# ---------------------------------------------------------------------------
# vectorized replica simulators (time/counting layer only)


def simulate_cowan_counts(
    rate: float, t: float, n_replicas: int, rng: np.random.Generator
) -> np.ndarray:
    """Jump counts of the equally-likely clock: races of Exp(k * rate) waits."""
    if not rate > 0.0 or t < 0.0 or n_replicas < 1:
        raise DomainError("need rate > 0, t >= 0, n_replicas >= 1")
    remaining = np.full(n_replicas, t, dtype=float)
    counts = np.zeros(n_replicas, dtype=np.int64)
    active = np.arange(n_replicas)
    k = 1
    while active.size:
        waits = rng.exponential(1.0 / (k * rate), size=active.size)
        remaining[active] -= waits
        alive = remaining[active] >= 0.0
        counts[active[alive]] += 1
        active = active[alive]
        k += 1
    return counts


def simulate_conditional_jump_decisions(
    lseq: LSequence,
    ell: int,
    n_replicas: int,
    rng: np.random.Generator,
    *,
    max_decisions: int = 10**4,
) -> np.ndarray:
    """Decision index of the ell-th jump per replica; -1 when censored.

    The conditional decision chain succeeds at decision n with probability
    values[j]/n where j is the number of jumps so far.
    """
    if not 1 <= ell <= len(lseq):
        raise DomainError(f"ell={ell} outside 1..{len(lseq)}")
    vals = np.asarray(lseq.values, dtype=float)
    jumps = np.zeros(n_replicas, dtype=np.int64)
    out = np.full(n_replicas, -1, dtype=np.int64)
    active = np.arange(n_replicas)
    for n in range(1, max_decisions + 1):
        u = rng.random(active.size)
        hit = u < vals[jumps[active]] / n
        idx = active[hit]
        jumps[idx] += 1
        done = jumps[idx] == ell
        out[idx[done]] = n
        active = active[jumps[active] < ell]
        if not active.size:
            break
    return out


def simulate_conditional_mecke_counts(
    lseq: LSequence, t: float, n_replicas: int, rng: np.random.Generator
) -> np.ndarray:
    """Jumps among the geometric number of decisions by time t, capped at len(lseq)."""
    cap = len(lseq)
    vals = np.asarray(lseq.values, dtype=float)
    p_zero = math.exp(-lseq.rate * t)
    decisions = rng.geometric(p_zero, size=n_replicas).astype(np.int64) - 1
    jumps = np.zeros(n_replicas, dtype=np.int64)
    horizon = int(decisions.max(initial=0))
    active = np.arange(n_replicas)
    for n in range(1, horizon + 1):
        active = active[(decisions[active] >= n) & (jumps[active] < cap)]
        if not active.size:
            break
        u = rng.random(active.size)
        hit = u < vals[jumps[active]] / n
        jumps[active[hit]] += 1
    return jumps


def simulate_conditional_stit_counts(
    lseq: LSequence, t: float, n_replicas: int, rng: np.random.Generator
) -> np.ndarray:
    """Jumps by time t from Exp(rate * values[k]) waits, capped at len(lseq)."""
    cap = len(lseq)
    scales = 1.0 / (lseq.rate * np.asarray(lseq.values, dtype=float))
    waits = rng.exponential(scales, size=(n_replicas, cap))
    return (np.cumsum(waits, axis=1) <= t).sum(axis=1).astype(np.int64)


def random_l_sequence(
    rng: np.random.Generator,
    length: int,
    rate: float,
    *,
    min_rel_gap: float = 0.05,
) -> LSequence:
    """Seeded random weight sequence with a guaranteed relative gap."""
    if length < 1:
        raise DomainError(f"length must be >= 1, got {length}")
    values = [1.0]
    while len(values) < length:
        prev = values[-1]
        k_next = len(values) + 1
        lo = prev * min_rel_gap / (1.0 - min_rel_gap) + 1e-3
        hi = min(0.8, k_next - prev - 1e-3)
        step = lo if hi <= lo else float(rng.uniform(lo, hi))
        values.append(prev + step)
    return LSequence(values=tuple(values), rate=rate)


# ---------------------------------------------------------------------------
# the equivalence harness


@dataclass(frozen=True)
class EquivalenceConfig:
    window: ConvexPolygon
    measure: LineMeasureSpec
    time_grid: tuple[float, ...] = (0.2, 0.5, 1.0)
    replicas: int = 20_000
    conditional_replicas: int = 20_000
    conditional_depth: int = 4
    n_conditional_sequences: int = 3
    cowan_replicas: int = 100_000
    selection_events: int = 100_000
    identity_sequences: int = 20
    seed: int = 0
    p_threshold: float = 1e-3
    identity_tol: float = 1e-6
    tail_policy: TruncationPolicy = field(
        default_factory=lambda: TruncationPolicy(tail_bound=1e-10, max_terms=10**7)
    )
    mutation: str | None = None

    def __post_init__(self) -> None:
        if self.mutation not in MUTATIONS:
            raise DomainError(f"unknown mutation {self.mutation!r}; options: {MUTATIONS}")
        if any(t < 0.0 for t in self.time_grid):
            raise DomainError("time grid must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "window": {"vertices": [list(v) for v in self.window.vertices]},
            "measure": measure_to_json(self.measure),
            "time_grid": list(self.time_grid),
            "replicas": self.replicas,
            "conditional_replicas": self.conditional_replicas,
            "conditional_depth": self.conditional_depth,
            "n_conditional_sequences": self.n_conditional_sequences,
            "cowan_replicas": self.cowan_replicas,
            "selection_events": self.selection_events,
            "identity_sequences": self.identity_sequences,
            "seed": self.seed,
            "p_threshold": self.p_threshold,
            "identity_tol": self.identity_tol,
            "mutation": self.mutation,
        }


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _frozen_sequences(config: EquivalenceConfig) -> list[LSequence]:
    """Weight sequences frozen from seeded discrete-process traces."""
    out: list[LSequence] = []
    attempt = 0
    while len(out) < config.n_conditional_sequences:
        rng = _rng(config.seed, 1, attempt)
        attempt += 1
        trace = mecke_discrete_simulate(
            config.window, config.measure, rng, max_jumps=config.conditional_depth - 1
        )
        try:
            out.append(l_sequence(trace))
        except LCollision:
            continue  # re-run with the next child seed
    return out


def _capped_count_pmf(lseq: LSequence, t: float, tail: Callable) -> list[float]:
    """pmf of min(jump count by t, len(lseq)) from a tail evaluator P(count >= j)."""
    ell = len(lseq)
    upper = [1.0] + [float(tail(lseq, j, t)) for j in range(1, ell + 1)]
    pmf = [upper[j] - upper[j + 1] for j in range(ell)]
    pmf.append(upper[ell])
    return pmf


def _check_conditional(config: EquivalenceConfig) -> VerificationReport:
    sequences = _frozen_sequences(config)
    worst_p = 1.0
    n_total = 0
    stit_tail = lambda lseq, j, t: stit_jump_cdf(lseq, j, t)
    mecke_tail_fn = lambda lseq, j, t: mecke_jump_tail(lseq, j, t, config.tail_policy)
    for s_idx, lseq in enumerate(sequences):
        for t_idx, t in enumerate(config.time_grid):
            if -math.expm1(-lseq.rate * t) <= 0.0:
                continue  # no jumps can have happened; trivially consistent
            rng = _rng(config.seed, 2, s_idx, t_idx)
            stit_counts = simulate_conditional_stit_counts(
                lseq, t, config.conditional_replicas, rng
            )
            mecke_counts = simulate_conditional_mecke_counts(
                lseq, t, config.conditional_replicas, rng
            )
            n_total += 2 * config.conditional_replicas
            pmf_s = _capped_count_pmf(lseq, t, stit_tail)
            pmf_m = _capped_count_pmf(lseq, t, mecke_tail_fn)
            for counts, pmf in (
                (counts_from_values(stit_counts), pmf_s),
                (counts_from_values(mecke_counts), pmf_m),
            ):
                _, p, _ = chi_square_gof(
                    counts, lambda k: pmf[k] if 0 <= k < len(pmf) else 0.0, support_lo=0
                )
                worst_p = min(worst_p, p)
            _, p2 = two_sample_chi_square(
                counts_from_values(stit_counts), counts_from_values(mecke_counts)
            )
            worst_p = min(worst_p, p2)
    return VerificationReport(
        check_name="conditional-jump-counts",
        statistic=worst_p,
        p_value=worst_p,
        tolerance=config.p_threshold,
        passed=worst_p > config.p_threshold,
        sample_size=n_total,
        seed=config.seed,
    )


def _mutated_mecke_jump_times(
    config: EquivalenceConfig, t_max: float, rng: np.random.Generator
) -> list[float]:
    """Composed-process jump times under a deliberately wrong decision clock."""
    rate = hitting_measure(config.measure, config.window)
    state = initial_quasi_state(config.window)
    clock = 0.0
    times: list[float] = []
    while True:
        n = state.decision_count + 1
        if config.mutation == "poisson-clock":
            lam = rate  # arrivals ignore how many quasi-cells exist
        else:  # wrong-rate
            lam = n * rate * WRONG_RATE_FACTOR
        clock += rng.exponential(1.0 / lam)
        if clock > t_max:
            return times
        state, event = mecke_discrete_step(state, config.measure, config.window, rng)
        if event.jump:
            times.append(clock)


def _counts_at_grid(times: Sequence[float], grid: Sequence[float]) -> list[int]:
    return [1 + sum(1 for x in times if x <= t) for t in grid]


def _check_unconditional(config: EquivalenceConfig) -> VerificationReport:
    grid = config.time_grid
    t_max = max(grid)
    n_grid = len(grid)
    stit_cc = np.empty((config.replicas, n_grid), dtype=np.int64)
    mecke_cc = np.empty((config.replicas, n_grid), dtype=np.int64)
    for r in range(config.replicas):
        rng = _rng(config.seed, 3, r)
        trace = stit_simulate(config.window, config.measure, rng, max_time=t_max)
        stit_cc[r] = _counts_at_grid([e.time for e in trace.events], grid)
        if config.mutation is None:
            _, mtrace = mecke_continuous_simulate(config.window, config.measure, t_max, rng)
            jump_times = [e.time for e in mtrace.events if e.jump]
        else:
            jump_times = _mutated_mecke_jump_times(config, t_max, rng)
        mecke_cc[r] = _counts_at_grid(jump_times, grid)
    worst_p = 1.0
    worst_z = 0.0
    for j, t in enumerate(grid):
        a, b = stit_cc[:, j], mecke_cc[:, j]
        ca, cb = counts_from_values(a), counts_from_values(b)
        if ca == cb and len(ca) == 1:
            continue  # e.g. t = 0: every replica still shows the bare window
        _, p = two_sample_chi_square(ca, cb)
        worst_p = min(worst_p, p)
        spread = math.sqrt(a.var(ddof=1) / a.size + b.var(ddof=1) / b.size)
        if spread > 0.0:
            worst_z = max(worst_z, abs(float(a.mean() - b.mean())) / spread)
    passed = worst_p > config.p_threshold and worst_z <= 3.0
    return VerificationReport(
        check_name="unconditional-cell-counts",
        statistic=worst_p,
        p_value=worst_p,
        tolerance=config.p_threshold,
        passed=passed,
        sample_size=2 * config.replicas * n_grid,
        seed=config.seed,
        note=f"max mean z-score {worst_z:.2f} (limit 3)",
    )


def _check_cowan(config: EquivalenceConfig) -> VerificationReport:
    rate = hitting_measure(config.measure, config.window)
    sim_rate = rate
    if config.mutation == "wrong-rate":
        sim_rate = rate * WRONG_RATE_FACTOR
    worst_p = 1.0
    n_total = 0
    for t_idx, t in enumerate(config.time_grid):
        if -math.expm1(-rate * t) <= 0.0:
            continue
        rng = _rng(config.seed, 4, t_idx)
        if config.mutation == "poisson-clock":
            counts = rng.poisson(sim_rate * t, size=config.cowan_replicas)
        else:
            counts = simulate_cowan_counts(sim_rate, t, config.cowan_replicas, rng)
        n_total += config.cowan_replicas
        _, p, _ = chi_square_gof(
            counts_from_values(counts), lambda k: nu_pmf(rate, t, k), support_lo=0
        )
        worst_p = min(worst_p, p)
    return VerificationReport(
        check_name="cowan-geometric",
        statistic=worst_p,
        p_value=worst_p,
        tolerance=config.p_threshold,
        passed=worst_p > config.p_threshold,
        sample_size=n_total,
        seed=config.seed,
    )


def _check_identity(config: EquivalenceConfig) -> VerificationReport:
    rate = hitting_measure(config.measure, config.window)
    rng = _rng(config.seed, 5)
    worst = 0.0
    count = 0
    for _ in range(config.identity_sequences):
        length = int(rng.integers(2, 7))
        lseq = random_l_sequence(rng, length, rate)
        for ell in range(1, length + 1):
            for t in config.time_grid:
                lhs = mecke_jump_tail(lseq, ell, t, config.tail_policy)
                rhs = stit_jump_cdf(lseq, ell, t)
                worst = max(worst, abs(lhs - rhs))
                count += 1
    return VerificationReport(
        check_name="tail-vs-cdf-identity",
        statistic=worst,
        p_value=None,
        tolerance=config.identity_tol,
        passed=worst <= config.identity_tol,
        sample_size=count,
        seed=config.seed,
    )


def _check_selection(config: EquivalenceConfig) -> VerificationReport:
    rng = _rng(config.seed, 6)
    trace = mecke_discrete_simulate(config.window, config.measure, rng, max_jumps=2)
    state = final_state(trace)
    cells = [(i, c) for i, c in enumerate(state.quasi_cells) if c is not None]
    weights = [hitting_measure(config.measure, c) for _, c in cells]
    total_w = sum(weights)
    hits = {i: 0 for i, _ in cells}
    n_events = 0
    while n_events < config.selection_events:
        _, event = mecke_discrete_step(state, config.measure, config.window, rng)
        if event.jump:
            hits[event.cell_index] += 1
            n_events += 1
    worst_z = 0.0
    for (idx, _), w in zip(cells, weights):
        p = w / total_w
        sigma = math.sqrt(config.selection_events * p * (1.0 - p))
        worst_z = max(worst_z, abs(hits[idx] - config.selection_events * p) / sigma)
    return VerificationReport(
        check_name="selection-probabilities",
        statistic=worst_z,
        p_value=None,
        tolerance=3.0,
        passed=worst_z <= 3.0,
        sample_size=config.selection_events,
        seed=config.seed,
    )


def _spaced_nodes(rng: np.random.Generator, count: int, lo: float = 1.0) -> np.ndarray:
    """Random increasing nodes in [lo, lo+9] with spacing >= 0.35 (well conditioned)."""
    steps = rng.uniform(0.35, 0.9, size=count - 1) if count > 1 else np.empty(0)
    return lo + rng.uniform(0.0, 0.5) + np.concatenate([[0.0], np.cumsum(steps)])


def _non_integer_uniform(rng: np.random.Generator, lo: float, hi: float) -> float:
    while True:
        x = float(rng.uniform(lo, hi))
        if 0.05 < x % 1.0 < 0.95:
            return x


def run_identity_suite(seed: int = 0, *, instances: int = 200) -> list[VerificationReport]:
    """Deterministic residual checks of the interpolation/telescoping identities,
    the tail-vs-CDF identity, and the series normalizations."""
    reports: list[VerificationReport] = []

    def residual_report(name: str, worst: float, tol: float, count: int) -> VerificationReport:
        return VerificationReport(
            check_name=name, statistic=worst, p_value=None, tolerance=tol,
            passed=worst <= tol, sample_size=count, seed=seed,
        )

    rng = _rng(seed, 100)
    worst = verify_lagrange_identity([1.0, 2.0, 3.0], 4.0)
    for _ in range(instances):
        nodes = _spaced_nodes(rng, int(rng.integers(2, 11)))
        x_eval = float(rng.uniform(nodes[0] - 1.0, nodes[-1] + 1.0))
        if float(np.min(np.abs(nodes - x_eval))) < 1e-6:
            continue
        worst = max(worst, verify_lagrange_identity(nodes, x_eval))
    reports.append(residual_report("lagrange-constant", worst, 1e-9, instances + 1))

    rng = _rng(seed, 101)
    worst = 0.0
    for _ in range(instances):
        lseq = random_l_sequence(rng, int(rng.integers(2, 11)), 1.0)
        nodes = np.asarray(lseq.values[1:])
        x_eval = float(nodes[-1] + rng.uniform(0.1, 0.9))
        worst = max(worst, verify_lagrange_gamma_identity(nodes, x_eval))
    reports.append(residual_report("lagrange-gamma", worst, 1e-9, instances))

    rng = _rng(seed, 102)
    worst = verify_telescoping_identity(1.3, 2.7, 3, 4)  # base case: one-term sum
    for _ in range(instances):
        ell = int(rng.integers(1, 11))
        l_i = _non_integer_uniform(rng, 1.0, max(1.5, float(ell)))
        l_next = _non_integer_uniform(rng, 1.0, ell + 1.0)
        if abs(l_i - l_next) < 0.05:
            continue
        n = ell + int(rng.integers(1, 13))
        worst = max(worst, verify_telescoping_identity(l_i, l_next, ell, n))
    reports.append(residual_report("telescoping", worst, 1e-9, instances + 1))

    rng = _rng(seed, 103)
    worst = max(
        verify_binomial_gamma_identity(2, 0, 1.4),
        verify_binomial_gamma_identity(2, 1, 1.4),
    )
    for _ in range(instances):
        ell = int(rng.integers(2, 11))
        k = int(rng.integers(0, ell))
        l_value = _non_integer_uniform(rng, 1.0, float(ell))
        worst = max(worst, verify_binomial_gamma_identity(ell, k, l_value))
    reports.append(residual_report("binomial-gamma", worst, 1e-9, instances + 2))

    rng = _rng(seed, 104)
    policy = TruncationPolicy(tail_bound=1e-10, max_terms=10**7)
    worst = 0.0
    count = 0
    for _ in range(10):
        lseq = random_l_sequence(rng, int(rng.integers(2, 7)), 1.0)
        for ell in range(1, len(lseq) + 1):
            for t in (0.1, 0.5, 1.0, 2.0):
                diff = abs(
                    mecke_jump_tail(lseq, ell, t, policy) - stit_jump_cdf(lseq, ell, t)
                )
                worst = max(worst, diff)
                count += 1
    reports.append(residual_report("tail-vs-cdf", worst, 1e-6, count))

    worst = 0.0
    count = 0
    for n in (2, 4, 6):
        for l_k in (1.5, 1.9, 2.7):
            k = max(2, math.ceil(l_k))
            if k > n:
                continue
            mass = discrete_waiting_pmf_mass(n, k, l_k, 10**8, stop_mass=1.0 - 1e-8)
            worst = max(worst, 1.0 - mass)
            count += 1
    reports.append(residual_report("waiting-normalization", worst, 1e-8, count))

    lseq = LSequence((1.0, 1.5, 2.2), rate=1.0)
    mass = discrete_jump_pmf_mass(lseq, 3, 10**7, stop_mass=1.0 - 1e-8)
    reports.append(residual_report("jump-normalization", 1.0 - mass, 1e-8, 1))

    worst = 0.0
    for rate in (0.5, 1.0, 4.0):
        for t in (0.0, 0.3, 1.0):
            for k in range(0, 20):
                worst = max(worst, abs(cowan_count_pmf(rate, t, k) - nu_pmf(rate, t, k)))
    reports.append(residual_report("count-pmf-match", worst, 0.0, 180))

    return reports


def run_equivalence_suite(config: EquivalenceConfig) -> list[VerificationReport]:
    """Run the five equivalence checks; failures are reported, not raised.

    Thresholds are applied per check, not family-wise: under the null each
    p-valued sub-test trips with probability about equal to the threshold
    (0.1% by default), so across the roughly two dozen sub-tests a *fresh*
    seed carries a few-percent false-alarm rate.  The fixed seeds recorded
    in the reports make the shipped configuration deterministic.
    """
    reports: list[VerificationReport] = []
    for check in (
        _check_conditional,
        _check_unconditional,
        _check_cowan,
        _check_identity,
        _check_selection,
    ):
        try:
            reports.append(check(config))
        except StitlabError as exc:
            reports.append(
                VerificationReport(
                    check_name=check.__name__.removeprefix("_check_"),
                    statistic=math.nan,
                    p_value=None,
                    tolerance=math.nan,
                    passed=False,
                    sample_size=0,
                    seed=config.seed,
                    note=f"{type(exc).__name__}: {exc}",
                )
            )
    return reports
