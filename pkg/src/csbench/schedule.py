"""Per-iteration targets for the synthetic l1-norm observation.

The Kalman solver never observes real data; it observes its own l1 norm
and is fed a target slightly below it. Two policies are provided.

``geometric``
    y(k) = gamma * l1_current with a constant 0 < gamma < 1: a fixed
    relative shrink every step. Robust, but the push never stops, so the
    filter can only track the constrained minimum up to a band whose
    width scales with (1 - gamma).

``aitken-steffensen``
    Starts from the same shrink with gamma = 1 - r_tilde. The second
    step switches to a trend-extrapolated target: the current norm plus
    omega times its latest decrement, scaled by (1 - r_tilde).
    ``negate_trend_target`` flips the sign of that one target, turning
    the second step into a hard push toward zero; it is the default,
    and the third step's extrapolation takes over from whatever state
    that push produces. Set it False for the unsigned variant. From
    the third step on, the provisional target
    (1 - r_tilde) * l1_current is replaced by the Aitken delta-squared
    extrapolant of the last three targets whenever the recent history is
    consistent with a decaying sequence (strictly falling magnitudes and
    an extrapolant between zero and the provisional value); otherwise
    the provisional target is used unchanged.

    Extrapolated jumps are kept inside a trust region scaled by the
    current push rate: with r_tilde > 0 the target may demand at most
    min(0.5, trust_mult * r_tilde) relative shrink in one step, and is
    never above the current norm. Without the region, a jump straight
    to the predicted limit overshoots across the kinks of the l1
    surface and the filter falls into a persistent limit cycle instead
    of settling. With r_tilde = 0 there is no scheduled push and the
    extrapolant is returned untouched.

    r_tilde itself is not changed per step. The solver calls
    contract_push whenever its stall detector fires, which multiplies
    r_tilde by (1 - r_hat), r_hat being the clipped ratio of the
    Steffensen extrapolant to the previous target. r_tilde -> 0 under
    repeated contraction, so the target sequence approaches a finite
    limit instead of pushing forever, which is what lets the filter
    settle instead of orbiting its optimum.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

MODE_GEOMETRIC = "geometric"
MODE_AITKEN = "aitken-steffensen"
_MODES = (MODE_GEOMETRIC, MODE_AITKEN)

# Relative guard on the Aitken denominator; below it the provisional
# target is returned unchanged.
_DENOM_GUARD = 1e-14


@dataclass(frozen=True)
class ScheduleState:
    """Immutable target-schedule state; next_target returns a new one."""

    mode: str = MODE_GEOMETRIC
    gamma: float = 0.99
    omega: float = 0.5
    r_tilde: float = 0.01
    trust_mult: float = 3.0
    negate_trend_target: bool = True
    k: int = 0
    y_hist: tuple = ()      # most recent first, at most 3
    norm_hist: tuple = ()   # most recent first, at most 2

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if not 0.0 <= self.r_tilde < 1.0:
            raise ValueError("r_tilde must lie in [0, 1)")
        if self.omega < 0.0:
            raise ValueError("omega must be nonnegative")
        if self.trust_mult <= 0.0:
            raise ValueError("trust_mult must be positive")


def geometric_target(l_emp: float, gamma: float) -> float:
    """Constant relative shrink: gamma * l_emp."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    if l_emp < 0.0:
        raise ValueError("l_emp must be nonnegative")
    return gamma * l_emp


def steffensen_extrapolate(y_k: float, y_km1: float, y_km2: float) -> float:
    """Aitken delta-squared estimate of the sequence limit.

    Returns (y_k * y_km2 - y_km1^2) / (y_k - 2 y_km1 + y_km2), or y_k
    unchanged when the denominator is negligible relative to the inputs
    (a constant or near-constant sequence carries no trend to remove).
    """
    denom = y_k - 2.0 * y_km1 + y_km2
    scale = max(abs(y_k), abs(y_km1), abs(y_km2), 1.0)
    if abs(denom) <= _DENOM_GUARD * scale:
        return y_k
    return (y_k * y_km2 - y_km1 * y_km1) / denom


def _trust_clamp(y: float, l_cur: float, r_tilde: float,
                 trust_mult: float) -> float:
    if r_tilde <= 0.0:
        return y
    cap = min(0.5, trust_mult * r_tilde)
    return min(max(y, (1.0 - cap) * l_cur), l_cur)


def next_target(sched: ScheduleState, l_emp_current: float,
                l_emp_previous: float) -> tuple[float, ScheduleState]:
    """Target for the next filter update, plus the advanced state.

    ``l_emp_current`` is the l1 norm the filter currently sits at;
    ``l_emp_previous`` the one before the last update (pass the current
    value again on the first call).
    """
    k = sched.k + 1
    if sched.mode == MODE_GEOMETRIC:
        y = geometric_target(l_emp_current, sched.gamma)
        new = replace(
            sched,
            k=k,
            y_hist=(y,) + sched.y_hist[:2],
            norm_hist=(l_emp_current,) + sched.norm_hist[:1],
        )
        return y, new

    r_tilde = sched.r_tilde
    if k == 1:
        y = (1.0 - r_tilde) * l_emp_current
    elif k == 2:
        trend = l_emp_current + sched.omega * (l_emp_current - l_emp_previous)
        y = (1.0 - r_tilde) * trend
        if sched.negate_trend_target:
            y = -y
    else:
        provisional = (1.0 - r_tilde) * l_emp_current
        y_ext = steffensen_extrapolate(provisional, sched.y_hist[0],
                                       sched.y_hist[1])
        decaying = abs(provisional) < abs(sched.y_hist[0]) < abs(sched.y_hist[1])
        if decaying and 0.0 <= y_ext <= provisional:
            y = y_ext
        else:
            y = provisional
    y = _trust_clamp(y, l_emp_current, r_tilde, sched.trust_mult)

    new = replace(
        sched,
        k=k,
        y_hist=(y,) + sched.y_hist[:2],
        norm_hist=(l_emp_current,) + sched.norm_hist[:1],
    )
    return y, new


def contract_push(sched: ScheduleState, l_emp: float,
                  r_hat_max: float = 0.5,
                  r_tilde_min: float = 2e-4) -> ScheduleState:
    """Shrink the push rate after the solver detects a stall.

    r_hat is the ratio of the Steffensen extrapolant of the recent
    targets to the previous target, clipped into [0, r_hat_max];
    r_tilde is multiplied by (1 - r_hat) and floored at r_tilde_min.
    The clip keeps each contraction a gradual rate change: near a stall
    the raw ratio approaches 1 and would wipe out the push in a single
    step, freezing the filter far from its optimum.
    """
    if len(sched.y_hist) < 2:
        r_hat = 0.0
    else:
        provisional = (1.0 - sched.r_tilde) * l_emp
        y_ext = steffensen_extrapolate(provisional, sched.y_hist[0],
                                       sched.y_hist[1])
        ratio = y_ext / sched.y_hist[0] if sched.y_hist[0] != 0.0 else 0.0
        r_hat = min(max(ratio, 0.0), r_hat_max)
    new_r = max((1.0 - r_hat) * sched.r_tilde, r_tilde_min)
    return replace(sched, r_tilde=new_r)
