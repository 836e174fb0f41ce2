"""The tessellation processes and their cell-configuration statistics.

Four models share one trace schema:

* STIT: with cells C_1..C_k extant, the state waits Exp(sum_j W(C_j)) where
  W(C) is the hitting weight, then a cell is picked proportionally to its
  weight and split by a line from its normalized hitting distribution.
  Every event is a jump.
* Mecke discrete: at decision n one of the n quasi-cells (possibly empty) is
  picked uniformly and cut by a line drawn from the window's hitting
  distribution; the far part replaces the slot, the origin part is appended.
  The decision is a jump only when the picked quasi-cell is nonempty and the
  line actually hits it.
* Cowan equally-likely clock: waiting times Exp(k * rate) between the
  (k-1)-th and k-th event; the event count by time t is geometric.
* Mecke continuous: the discrete process driven by the equally-likely clock
  at rate W(window), one decision per clock event.

The normalized hitting-weight sequence (values[k-1] = sum of cell weights
just before the k-th jump, divided by the window weight) is the sufficient
statistic for every conditional jump-time law, so both continuous models
also come in a conditional flavor that takes a frozen sequence and
re-simulates only the time/counting layer.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DegenerateSplit, DomainError, GeometryError, LCollision
from .geometry import ConvexPolygon, Line, split
from .line_measure import LineMeasureSpec, hitting_measure, sample_hitting_line

L_MIN_RELATIVE_GAP = 1e-9


class ModelTag(enum.Enum):
    STIT = "STIT"
    MECKE_DISCRETE = "MeckeDiscrete"
    MECKE_CONTINUOUS = "MeckeContinuous"
    COWAN_EL = "CowanEL"


@dataclass(frozen=True)
class TraceEvent:
    """One decision/jump: `time` is a real time for continuous models and a
    1-based decision index for the discrete model."""

    time: float | int
    cell_index: int
    line: Line
    jump: bool


@dataclass(frozen=True)
class ProcessTrace:
    window: ConvexPolygon
    measure: LineMeasureSpec
    events: tuple[TraceEvent, ...]
    model_tag: ModelTag
    seed: int | None = None

    @property
    def jump_count(self) -> int:
        return sum(1 for e in self.events if e.jump)


@dataclass(frozen=True)
class QuasiCellState:
    """Mecke state: one slot per quasi-cell, empty slots are None."""

    quasi_cells: tuple[ConvexPolygon | None, ...]
    decision_count: int
    jump_count: int

    @property
    def cells(self) -> tuple[ConvexPolygon, ...]:
        return tuple(c for c in self.quasi_cells if c is not None)

    def validate(self, window: ConvexPolygon, rel_tol: float = 1e-9) -> None:
        if len(self.quasi_cells) != self.decision_count + 1:
            raise GeometryError("quasi-cell count must equal decision count + 1")
        cells = self.cells
        if len(cells) != self.jump_count + 1:
            raise GeometryError("cell count must equal jump count + 1")
        total = sum(c.area for c in cells)
        if abs(total - window.area) > rel_tol * window.area:
            raise GeometryError("cells do not tile the window")


@dataclass(frozen=True)
class LSequence:
    """Normalized cumulative hitting weights of a nested cell configuration.

    values[k-1] is the total hitting weight of the k cells present just
    before the k-th jump, divided by the window weight `rate`; it always
    starts at exactly 1, stays within [1, k] and increases strictly.
    """

    values: tuple[float, ...]
    rate: float

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise DomainError("sequence must not be empty")
        if vals[0] != 1.0:
            raise DomainError(f"first value must be exactly 1.0, got {vals[0]!r}")
        if not self.rate > 0.0:
            raise DomainError(f"rate must be positive, got {self.rate!r}")
        for k, v in enumerate(vals, start=1):
            if not 1.0 <= v <= k * (1.0 + 1e-12):
                raise DomainError(f"value {v!r} at position {k} outside [1, {k}]")
        for a, b in zip(vals, vals[1:]):
            if b - a <= L_MIN_RELATIVE_GAP * b:
                raise LCollision(f"values {a!r} and {b!r} closer than the minimum gap")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)


def replica_rng(seed: int, index: int = 0) -> np.random.Generator:
    """Deterministic child stream for replica `index` of master `seed`."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _check_stop(max_a, max_b) -> None:
    if max_a is None and max_b is None:
        raise DomainError("a stopping rule is required")


# ---------------------------------------------------------------------------
# full simulators


def stit_simulate(
    window: ConvexPolygon,
    measure: LineMeasureSpec,
    rng: np.random.Generator,
    *,
    max_time: float | None = None,
    max_jumps: int | None = None,
    seed: int | None = None,
) -> ProcessTrace:
    """Global-clock STIT run; stops at `max_time` or after `max_jumps` jumps."""
    _check_stop(max_time, max_jumps)
    cells: list[ConvexPolygon] = [window]
    rates: list[float] = [hitting_measure(measure, window)]
    total_rate = rates[0]
    t = 0.0
    events: list[TraceEvent] = []
    while True:
        if max_jumps is not None and len(events) >= max_jumps:
            break
        t += rng.exponential(1.0 / total_rate)
        if max_time is not None and t > max_time:
            break
        while True:  # retry degenerate splits without re-advancing the clock
            u = total_rate * rng.random()
            acc = 0.0
            idx = len(cells) - 1
            for j, r in enumerate(rates):
                acc += r
                if u < acc:
                    idx = j
                    break
            cell = cells[idx]
            line = sample_hitting_line(measure, cell, rng)
            try:
                parts = split(cell, line)
            except DegenerateSplit:
                continue
            if parts.positive_part is not None and parts.negative_part is not None:
                break
        cells[idx] = parts.negative_part
        cells.append(parts.positive_part)
        r_neg = hitting_measure(measure, parts.negative_part)
        r_pos = hitting_measure(measure, parts.positive_part)
        total_rate += r_neg + r_pos - rates[idx]
        rates[idx] = r_neg
        rates.append(r_pos)
        events.append(TraceEvent(time=t, cell_index=idx, line=line, jump=True))
    return ProcessTrace(window, measure, tuple(events), ModelTag.STIT, seed)


def cowan_el_simulate(
    window: ConvexPolygon,
    measure: LineMeasureSpec,
    rng: np.random.Generator,
    *,
    max_time: float | None = None,
    max_jumps: int | None = None,
    seed: int | None = None,
) -> ProcessTrace:
    """Equally-likely continuous model: Exp(k * rate) waits, uniform cell choice."""
    _check_stop(max_time, max_jumps)
    rate = hitting_measure(measure, window)
    cells: list[ConvexPolygon] = [window]
    t = 0.0
    events: list[TraceEvent] = []
    while True:
        if max_jumps is not None and len(events) >= max_jumps:
            break
        t += rng.exponential(1.0 / (len(cells) * rate))
        if max_time is not None and t > max_time:
            break
        while True:
            idx = int(rng.integers(len(cells)))
            line = sample_hitting_line(measure, cells[idx], rng)
            try:
                parts = split(cells[idx], line)
            except DegenerateSplit:
                continue
            if parts.positive_part is not None and parts.negative_part is not None:
                break
        cells[idx] = parts.negative_part
        cells.append(parts.positive_part)
        events.append(TraceEvent(time=t, cell_index=idx, line=line, jump=True))
    return ProcessTrace(window, measure, tuple(events), ModelTag.COWAN_EL, seed)


def initial_quasi_state(window: ConvexPolygon) -> QuasiCellState:
    return QuasiCellState(quasi_cells=(window,), decision_count=0, jump_count=0)


def mecke_discrete_step(
    state: QuasiCellState,
    measure: LineMeasureSpec,
    window: ConvexPolygon,
    rng: np.random.Generator,
) -> tuple[QuasiCellState, TraceEvent]:
    """One decision: uniform quasi-cell choice, one window-hitting line."""
    n = state.decision_count + 1  # number of quasi-cells available
    idx = int(rng.integers(n))
    line = sample_hitting_line(measure, window, rng)
    slots = list(state.quasi_cells)
    target = slots[idx]
    jump = False
    if target is None:
        slots.append(None)
    else:
        parts = split(target, line)
        slots[idx] = parts.negative_part
        slots.append(parts.positive_part)
        jump = parts.positive_part is not None and parts.negative_part is not None
    new_state = QuasiCellState(
        quasi_cells=tuple(slots),
        decision_count=state.decision_count + 1,
        jump_count=state.jump_count + (1 if jump else 0),
    )
    event = TraceEvent(time=n, cell_index=idx, line=line, jump=jump)
    return new_state, event


def mecke_discrete_simulate(
    window: ConvexPolygon,
    measure: LineMeasureSpec,
    rng: np.random.Generator,
    *,
    max_decisions: int | None = None,
    max_jumps: int | None = None,
    initial_state: QuasiCellState | None = None,
    seed: int | None = None,
) -> ProcessTrace:
    """Run decisions until the stop rule; events carry 1-based decision indices.

    With `initial_state` the trace records only the continuation; such a
    trace cannot be replayed standalone (replay assumes a bare window).
    """
    _check_stop(max_decisions, max_jumps)
    state = initial_state if initial_state is not None else initial_quasi_state(window)
    events: list[TraceEvent] = []
    while True:
        if max_decisions is not None and state.decision_count >= max_decisions:
            break
        if max_jumps is not None and state.jump_count >= max_jumps:
            break
        state, event = mecke_discrete_step(state, measure, window, rng)
        events.append(event)
    return ProcessTrace(window, measure, tuple(events), ModelTag.MECKE_DISCRETE, seed)


def cowan_jump_count(rate: float, t: float, rng: np.random.Generator) -> int:
    """Number of completed Exp(k * rate) waits, k = 1, 2, ..., within [0, t]."""
    if not rate > 0.0:
        raise DomainError(f"rate must be positive, got {rate!r}")
    if t < 0.0:
        raise DomainError(f"time must be nonnegative, got {t!r}")
    s = 0.0
    n = 0
    while True:
        s += rng.exponential(1.0 / ((n + 1) * rate))
        if s > t:
            return n
        n += 1


def mecke_continuous_simulate(
    window: ConvexPolygon,
    measure: LineMeasureSpec,
    t: float,
    rng: np.random.Generator,
    *,
    seed: int | None = None,
) -> tuple[QuasiCellState, ProcessTrace]:
    """Discrete Mecke process driven by the equally-likely clock up to time t.

    With n quasi-cells extant the next decision arrives after an
    Exp(n * rate) wait, so the decision count by time t is geometric and the
    trajectory for a smaller horizon is a prefix of the same run.
    """
    if t < 0.0:
        raise DomainError(f"time must be nonnegative, got {t!r}")
    rate = hitting_measure(measure, window)
    state = initial_quasi_state(window)
    events: list[TraceEvent] = []
    clock = 0.0
    while True:
        n = state.decision_count + 1
        clock += rng.exponential(1.0 / (n * rate))
        if clock > t:
            break
        state, event = mecke_discrete_step(state, measure, window, rng)
        events.append(
            TraceEvent(time=clock, cell_index=event.cell_index, line=event.line, jump=event.jump)
        )
    trace = ProcessTrace(window, measure, tuple(events), ModelTag.MECKE_CONTINUOUS, seed)
    return state, trace


# ---------------------------------------------------------------------------
# replay and derived statistics


def replay(
    trace: ProcessTrace,
) -> Iterator[tuple[TraceEvent, ConvexPolygon | None, list[ConvexPolygon | None]]]:
    """Yield (event, split target before the event, slots after the event).

    The slot update rule is shared by all models: the split slot keeps the
    far part and the origin part is appended (absent parts stay None).  The
    yielded slot list is live; copy it if it must survive the iteration.
    """
    slots: list[ConvexPolygon | None] = [trace.window]
    for event in trace.events:
        target = slots[event.cell_index]
        if target is None:
            slots.append(None)
        else:
            parts = split(target, event.line)
            slots[event.cell_index] = parts.negative_part
            slots.append(parts.positive_part)
        yield event, target, slots


def final_state(trace: ProcessTrace) -> QuasiCellState:
    slots: list[ConvexPolygon | None] = [trace.window]
    for _, _, slots_now in replay(trace):
        slots = slots_now
    return QuasiCellState(
        quasi_cells=tuple(slots),
        decision_count=len(trace.events),
        jump_count=trace.jump_count,
    )


def l_sequence(trace: ProcessTrace) -> LSequence:
    """Normalized hitting-weight sequence of the trace's cell configurations."""
    rate = hitting_measure(trace.measure, trace.window)
    values = [1.0]
    for event, _, slots in replay(trace):
        if not event.jump:
            continue
        total = sum(hitting_measure(trace.measure, c) for c in slots if c is not None)
        values.append(total / rate)
    return LSequence(values=tuple(values), rate=rate)


# ---------------------------------------------------------------------------
# conditional re-simulation: time/counting layer on a frozen sequence


def conditional_stit_jump_time(lseq: LSequence, n: int, rng: np.random.Generator) -> float:
    """Sample the n-th jump time: a sum of Exp(rate * values[k]) waits."""
    if not 1 <= n <= len(lseq):
        raise DomainError(f"n={n} outside 1..{len(lseq)}")
    return sum(rng.exponential(1.0 / (lseq.rate * lseq.values[k])) for k in range(n))


def conditional_stit_jump_count(lseq: LSequence, t: float, rng: np.random.Generator) -> int:
    """Jumps by time t under the frozen sequence, capped at len(lseq)."""
    s = 0.0
    for k, v in enumerate(lseq.values):
        s += rng.exponential(1.0 / (lseq.rate * v))
        if s > t:
            return k
    return len(lseq)


def conditional_mecke_jump_decision(
    lseq: LSequence,
    ell: int,
    rng: np.random.Generator,
    *,
    max_decisions: int = 10**6,
) -> int | None:
    """Decision index of the ell-th jump in the conditional decision chain.

    With j jumps so far, decision n succeeds with probability
    values[j] / n.  Returns None when the jump has not occurred within
    `max_decisions` (the caller bins this as a censored tail).
    """
    if not 1 <= ell <= len(lseq):
        raise DomainError(f"ell={ell} outside 1..{len(lseq)}")
    jumps = 0
    for n in range(1, max_decisions + 1):
        if rng.random() < lseq.values[jumps] / n:
            jumps += 1
            if jumps == ell:
                return n
    return None


def conditional_mecke_jump_count(lseq: LSequence, t: float, rng: np.random.Generator) -> int:
    """Jumps among the geometric number of decisions by time t, capped at len(lseq)."""
    p_zero = math.exp(-lseq.rate * t)
    decisions = int(rng.geometric(p_zero)) - 1 if p_zero < 1.0 else 0
    jumps = 0
    for n in range(1, decisions + 1):
        if jumps >= len(lseq):
            break
        if rng.random() < lseq.values[jumps] / n:
            jumps += 1
    return min(jumps, len(lseq))
