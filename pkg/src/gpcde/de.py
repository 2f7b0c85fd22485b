"""Decoding-evolution engine for GPCs.

Tracks, per CN position, the probability ``x_i`` that a component code at
position ``i`` fails to recover a bit it protects, as the channel/decoding
asymptotics reduce to a Poisson-tail recursion over the connection
tensors:

    x_i  <-  Psi_{>=t}( p * sum_types A[i, type\\i] * prod_j x_j )

with ``Psi_{>=t}(lam) = P(Poisson(lam) >= t)`` and ``x^(0) = 1``.  Two
update disciplines are provided: the plain parallel ("flooding") update,
where every position in a window is refreshed from the previous state,
and the position-sequential update, where positions are refreshed in
ascending order and later positions see the values already refreshed in
the same sweep.  Window schedules compose either discipline into sliding
window decoders for spatially coupled chains.

All arithmetic is plain scalar float and iteration order is fixed, so
runs are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .model import GpcSpec

__all__ = [
    "poisson_tail",
    "DeState",
    "DeConfig",
    "ScheduleStep",
    "SchedulePlan",
    "lambda_of_position",
    "poisson_rates",
    "de_step",
    "de_step_scheduled",
    "de_run",
    "DeRunResult",
    "predict_ber",
    "find_threshold",
    "ThresholdResult",
    "flooding_plan",
    "sliding_window_plan",
    "mid_chain_positions",
]


def poisson_tail(lam: float, t: int) -> float:
    """P(Poisson(lam) >= t), clamped to [0, 1].

    Computed as one minus the first ``t`` pmf terms accumulated with the
    scaled recurrence term_k = term_{k-1} * lam / k.  Accurate for the
    moderate rates produced by connection tensors; for lam large enough
    that exp(-lam) underflows the tail saturates to 1.
    """
    if lam < 0:
        raise ValueError(f"Poisson rate must be >= 0, got {lam}")
    if t <= 0:
        return 1.0
    term = math.exp(-lam)
    cdf = term
    for k in range(1, t):
        term *= lam / k
        cdf += term
    tail = 1.0 - cdf
    if tail < 0.0:
        return 0.0
    if tail > 1.0:
        return 1.0
    return tail


@dataclass(frozen=True)
class DeState:
    """Per-position survival probabilities after ``iteration`` updates."""

    x: tuple[float, ...]
    iteration: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        bad = [v for v in self.x if not 0.0 <= v <= 1.0]
        if bad:
            raise ValueError(f"survival probabilities outside [0,1]: {bad}")

    @classmethod
    def ones(cls, num_positions: int) -> "DeState":
        return cls(x=(1.0,) * num_positions, iteration=0)


@dataclass(frozen=True)
class DeConfig:
    """Channel parameter, correction radius, and iteration control."""

    p: float
    t: int
    max_iterations: int = 200
    epsilon: float = 1e-12

    def __post_init__(self) -> None:
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"channel parameter p must be in [0,1], got {self.p}")
        if self.t < 1:
            raise ValueError(f"correction radius t must be >= 1, got {self.t}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if not self.epsilon > 0:
            raise ValueError("convergence tolerance must be > 0")


@dataclass(frozen=True)
class ScheduleStep:
    """One window of positions decoded for ``iterations`` sweeps.

    ``parallel=False`` applies the position-sequential discipline
    (ascending order, updated values visible within the sweep);
    ``parallel=True`` refreshes every window position from the previous
    sweep's values.
    """

    window: tuple[int, ...]
    iterations: int
    parallel: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "window", tuple(int(i) for i in self.window))
        if not self.window:
            raise ValueError("schedule window must be nonempty")
        if any(a >= b for a, b in zip(self.window, self.window[1:])):
            raise ValueError(f"window must be strictly ascending, got {self.window}")
        if self.iterations < 1:
            raise ValueError("step iterations must be >= 1")


@dataclass(frozen=True)
class SchedulePlan:
    """Ordered window steps driving a DE run (and, mirrored, a decoder)."""

    steps: tuple[ScheduleStep, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))


def flooding_plan(num_positions: int, iterations: int, parallel: bool = True) -> SchedulePlan:
    """Single full-window step: classic flooding for ``iterations`` sweeps."""
    window = tuple(range(1, num_positions + 1))
    return SchedulePlan(steps=(ScheduleStep(window, iterations, parallel=parallel),))


def sliding_window_plan(
    position_blocks: Sequence[int],
    window_blocks: int = 7,
    iterations: int = 8,
    parallel: bool = True,
) -> SchedulePlan:
    """Sliding-window schedule over a spatially coupled chain.

    ``position_blocks[i-1]`` is the chain block of position ``i``.  Window
    ``w`` covers every position whose block lies in ``w .. w+window_blocks-1``,
    runs ``iterations`` sweeps, then slides by one block until the chain end.
    """
    blocks = [int(b) for b in position_blocks]
    if not blocks:
        raise ValueError("position_blocks must be nonempty")
    lo, hi = min(blocks), max(blocks)
    if hi - lo + 1 < window_blocks:
        raise ValueError(
            f"chain spans {hi - lo + 1} blocks, shorter than window {window_blocks}"
        )
    steps = []
    for w in range(lo, hi - window_blocks + 2):
        window = tuple(
            i for i, b in enumerate(blocks, start=1) if w <= b < w + window_blocks
        )
        steps.append(ScheduleStep(window=window, iterations=iterations, parallel=parallel))
    return SchedulePlan(steps=tuple(steps))


def mid_chain_positions(position_blocks: Sequence[int]) -> tuple[int, ...]:
    """Positions whose block lies in the middle third of the chain.

    Used to evaluate steady-state chain metrics away from termination
    boundaries.
    """
    blocks = [int(b) for b in position_blocks]
    lo, hi = min(blocks), max(blocks)
    span = hi - lo + 1
    first = lo + span // 3
    last = hi - span // 3
    return tuple(i for i, b in enumerate(blocks, start=1) if first <= b <= last)


def _position_terms(spec: GpcSpec) -> tuple[tuple[tuple[int, tuple[int, ...]], ...], ...]:
    """Per position (0-based), the (count, tail) terms of its update sum.

    Terms are sorted so that accumulation order never depends on tensor
    construction order.
    """
    terms: list[list[tuple[int, tuple[int, ...]]]] = [
        [] for _ in range(spec.num_positions)
    ]
    for tensor in spec.tensors:
        for (head, tail), count in tensor.entries.items():
            terms[head - 1].append((count, tail))
    return tuple(tuple(sorted(ts, key=lambda e: (len(e[1]), e[1]))) for ts in terms)


def _rate(terms_i, x: list[float], p: float) -> float:
    acc = 0.0
    for count, tail in terms_i:
        prod = 1.0
        for j in tail:
            prod *= x[j - 1]
        acc += count * prod
    return p * acc


def poisson_rates(spec: GpcSpec, x: Sequence[float], p: float) -> tuple[float, ...]:
    """Poisson rates feeding the next update, one per position.

    Rate_i = p * sum over stored entries with head i of count * prod of
    ``x`` over the tail.  Exposed separately because finite-size survival
    predictions reuse the same rates with a shifted tail index.
    """
    if len(x) != spec.num_positions:
        raise ValueError(f"state has {len(x)} entries, spec has {spec.num_positions}")
    terms = _position_terms(spec)
    xs = list(x)
    return tuple(_rate(terms[i], xs, p) for i in range(spec.num_positions))


def lambda_of_position(spec: GpcSpec, i: int, p: float) -> float:
    """Initial Poisson rate of position ``i``: p times its tensor row sum."""
    if not 1 <= i <= spec.num_positions:
        raise ValueError(f"position {i} out of range 1..{spec.num_positions}")
    ones = [1.0] * spec.num_positions
    return _rate(_position_terms(spec)[i - 1], ones, p)


def de_step(spec: GpcSpec, state: DeState, config: DeConfig) -> DeState:
    """One flooding update: every position refreshed from the old state."""
    if len(state.x) != spec.num_positions:
        raise ValueError(
            f"state has {len(state.x)} entries, spec has {spec.num_positions}"
        )
    terms = _position_terms(spec)
    old = list(state.x)
    new = tuple(
        poisson_tail(_rate(terms[i], old, config.p), config.t)
        for i in range(spec.num_positions)
    )
    return DeState(x=new, iteration=state.iteration + 1)


def _check_window(window: tuple[int, ...], num_positions: int) -> None:
    if not window:
        raise ValueError("window must be nonempty")
    if list(window) != sorted(set(window)):
        raise ValueError(f"window must be strictly ascending, got {window}")
    if window[0] < 1 or window[-1] > num_positions:
        raise ValueError(f"window {window} out of range 1..{num_positions}")


def de_step_scheduled(
    spec: GpcSpec, state: DeState, config: DeConfig, window: Iterable[int]
) -> DeState:
    """One position-sequential sweep over ``window``.

    Positions are refreshed in ascending order; a position's update sees
    the values already refreshed earlier in the same sweep and the old
    values of everything else.  Positions outside the window keep their
    values.
    """
    win = tuple(int(i) for i in window)
    _check_window(win, spec.num_positions)
    if len(state.x) != spec.num_positions:
        raise ValueError(
            f"state has {len(state.x)} entries, spec has {spec.num_positions}"
        )
    terms = _position_terms(spec)
    x = list(state.x)
    for i in win:
        x[i - 1] = poisson_tail(_rate(terms[i - 1], x, config.p), config.t)
    return DeState(x=tuple(x), iteration=state.iteration + 1)


@dataclass(frozen=True)
class DeRunResult:
    """Final DE state plus the state recorded after every plan step."""

    state: DeState
    trace: tuple[DeState, ...]


def de_run(
    spec: GpcSpec,
    plan: SchedulePlan,
    config: DeConfig,
    initial: DeState | None = None,
) -> DeRunResult:
    """Run a schedule plan; each step sweeps its window ``iterations`` times.

    A step ends early once the largest elementwise change of a sweep drops
    below ``config.epsilon``.
    """
    terms = _position_terms(spec)
    state = initial if initial is not None else DeState.ones(spec.num_positions)
    if len(state.x) != spec.num_positions:
        raise ValueError(
            f"state has {len(state.x)} entries, spec has {spec.num_positions}"
        )
    x = list(state.x)
    iteration = state.iteration
    trace: list[DeState] = []
    for step in plan.steps:
        _check_window(step.window, spec.num_positions)
        for _ in range(step.iterations):
            delta = 0.0
            if step.parallel:
                old = list(x)
                for i in step.window:
                    new = poisson_tail(_rate(terms[i - 1], old, config.p), config.t)
                    d = abs(new - x[i - 1])
                    if d > delta:
                        delta = d
                    x[i - 1] = new
            else:
                for i in step.window:
                    new = poisson_tail(_rate(terms[i - 1], x, config.p), config.t)
                    d = abs(new - x[i - 1])
                    if d > delta:
                        delta = d
                    x[i - 1] = new
            iteration += 1
            if delta < config.epsilon:
                break
        trace.append(DeState(x=tuple(x), iteration=iteration))
    final = trace[-1] if trace else state
    return DeRunResult(state=final, trace=tuple(trace))


def predict_ber(
    spec: GpcSpec,
    state: DeState,
    p: float,
    owner_positions: Iterable[int] | None = None,
) -> float:
    """Post-decoding bit error rate predicted from a DE state.

    A bit stays in error iff all of its component codes remain stalled, so
    the predictor is the VN-count-weighted average of ``prod_j x_j`` over
    distinct sorted VN types, scaled by the channel parameter.  With
    ``owner_positions`` given, only types whose smallest position is in
    the set contribute; for chains this selects the bits owned by those
    positions' blocks.
    """
    from .model import vn_type_counts

    if len(state.x) != spec.num_positions:
        raise ValueError(
            f"state has {len(state.x)} entries, spec has {spec.num_positions}"
        )
    owners = None if owner_positions is None else frozenset(owner_positions)
    num = 0.0
    den = 0.0
    for typ, m in vn_type_counts(spec).items():
        if m == 0:
            continue
        if owners is not None and typ[0] not in owners:
            continue
        prod = 1.0
        for j in typ:
            prod *= state.x[j - 1]
        num += m * prod
        den += m
    if den == 0.0:
        raise ValueError("no VNs selected; BER undefined")
    return p * num / den


@dataclass(frozen=True)
class ThresholdResult:
    """Bisection outcome: largest channel parameter meeting the BER target."""

    p_star: float
    saturated: bool
    ber_low: float
    ber_high: float


def find_threshold(
    spec: GpcSpec,
    plan: SchedulePlan,
    t: int,
    p_lo: float,
    p_hi: float,
    ber_target: float = 1e-4,
    tol: float = 1e-5,
    owner_positions: Iterable[int] | None = None,
    epsilon: float = 1e-12,
) -> ThresholdResult:
    """Bisect for the largest p whose post-DE BER stays below the target.

    Requires BER(p_lo) < target; if even BER(p_hi) < target the bracket is
    saturated and p_hi is returned with the flag set.  BER is assumed
    monotone in p inside the bracket (checked at the endpoints).
    """
    if not p_lo < p_hi:
        raise ValueError(f"need p_lo < p_hi, got {p_lo} >= {p_hi}")
    owners = None if owner_positions is None else tuple(owner_positions)

    def ber_at(p: float) -> float:
        config = DeConfig(p=p, t=t, epsilon=epsilon)
        result = de_run(spec, plan, config)
        return predict_ber(spec, result.state, p, owner_positions=owners)

    ber_lo = ber_at(p_lo)
    if ber_lo >= ber_target:
        raise ValueError(
            f"bracket does not straddle target: BER({p_lo}) = {ber_lo} >= {ber_target}"
        )
    ber_hi = ber_at(p_hi)
    if ber_hi < ber_target:
        return ThresholdResult(p_star=p_hi, saturated=True, ber_low=ber_lo, ber_high=ber_hi)
    lo, hi = p_lo, p_hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ber_at(mid) < ber_target:
            lo = mid
        else:
            hi = mid
    return ThresholdResult(p_star=lo, saturated=False, ber_low=ber_lo, ber_high=ber_hi)
