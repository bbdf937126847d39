"""Streaming stopping-rule engines (rules A through F).

Each rule compares a divergence kernel of the running sample mean against
a per-stage threshold ln(b_l / 2) / m_l and stops at the first stage
where the inequality holds.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import kernels
from .schedules import StageSchedule

__all__ = [
    "EstimationGoal",
    "RunningSample",
    "StopDecision",
    "feed",
    "check_rule_a",
    "check_rule_b",
    "check_rule_c",
    "check_rule_d",
    "check_rule_e",
    "check_rule_f",
    "stop_stage",
    "run_to_stop",
    "STAGE_SCAN_FACTOR",
]

# Unbounded rules scan stages up to the first m_l >= n * STAGE_SCAN_FACTOR;
# beyond that the threshold has shrunk toward 0- while the kernel argument
# gap closes, so skipping can only delay stopping, never break coverage.
STAGE_SCAN_FACTOR = 64


@dataclass(frozen=True)
class EstimationGoal:
    """Target parameter, error kind and precision/confidence levels."""

    parameter: str  # "bounded" | "geometric" | "poisson"
    error: str      # "abs" | "rel"
    epsilon: float
    delta: float

    def __post_init__(self) -> None:
        if self.parameter not in ("bounded", "geometric", "poisson"):
            raise ValueError(f"unknown parameter kind {self.parameter!r}")
        if self.error not in ("abs", "rel"):
            raise ValueError(f"unknown error kind {self.error!r}")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.parameter == "bounded" and self.error == "abs" and self.epsilon >= 0.5:
            raise ValueError("absolute bounded-mean estimation needs epsilon < 1/2")
        if self.error == "rel" and self.epsilon >= 1.0:
            raise ValueError("relative error needs epsilon < 1")
        if self.parameter == "geometric" and self.epsilon >= 1.0:
            raise ValueError("geometric-mean estimation needs epsilon < 1")

    def validate_observation(self, x: float) -> None:
        if self.parameter == "bounded":
            if not 0.0 <= x <= 1.0:
                raise ValueError(f"observation {x!r} outside [0, 1]")
        elif self.parameter == "geometric":
            if x < 1.0 or x != int(x):
                raise ValueError(f"observation {x!r} not a positive integer")
        else:
            if x < 0.0 or x != int(x):
                raise ValueError(f"observation {x!r} not a nonnegative integer")


@dataclass
class RunningSample:
    """Streaming sufficient statistics: count, sum, sum of squares."""

    n: int = 0
    total: float = 0.0
    total_sq: float = 0.0

    @property
    def mean(self) -> float:
        return self.total / self.n

    @property
    def var(self) -> float:
        """Population-style variance, clamped at 0 against rounding."""
        m = self.mean
        return max(0.0, self.total_sq / self.n - m * m)


def feed(state: RunningSample, x: float, goal: EstimationGoal) -> RunningSample:
    """Validate x against the goal's support and fold it into state."""
    goal.validate_observation(x)
    state.n += 1
    state.total += x
    state.total_sq += x * x
    return state


@dataclass(frozen=True)
class StopDecision:
    status: str  # stopped | continue | cap-reached | stream-exhausted | no-inclusion
    n: int
    stage: Optional[int]
    estimate: Optional[float]
    rule: str
    epsilon: float
    delta: float
    lower: Optional[float] = None
    upper: Optional[float] = None
    truncated: bool = field(default=False)

    def to_dict(self) -> dict:
        doc = {
            "status": self.status,
            "n": self.n,
            "stage": self.stage,
            "estimate": self.estimate,
            "rule": self.rule,
            "epsilon": self.epsilon,
            "delta": self.delta,
        }
        if self.lower is not None:
            doc["L"] = self.lower
        if self.upper is not None:
            doc["U"] = self.upper
        if self.truncated:
            doc["truncated"] = True
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


# -- per-stage conditions --------------------------------------------------

def _threshold(m: int, budget: float) -> float:
    return math.log(budget / 2.0) / m


def _cond_a(xbar: float, n: int, m: int, eps: float, thr: float) -> bool:
    base = 0.5 - abs(0.5 - xbar) + eps
    z = base - n * eps / max(n, m)
    return kernels.mb(z, base) <= thr


def _cond_b(xbar: float, n: int, m: int, eps: float, delta: float, s: int) -> bool:
    nv = max(n, m)
    lhs = (abs(xbar - 0.5) - eps + n * eps / (3.0 * nv)) ** 2
    rhs = 0.25 - (n / nv) ** 2 * m * eps * eps / (2.0 * math.log(2.0 * s / delta))
    return lhs >= rhs


def _cond_c(xbar: float, n: int, m: int, eps: float, thr: float) -> bool:
    if xbar <= 0.0:
        return False
    theta = xbar / (1.0 + eps)
    z = theta * (1.0 + n * eps / max(n, m))
    return kernels.mb(z, theta) <= thr


def _cond_d(xbar: float, n: int, m: int, eps: float, thr: float) -> bool:
    z = (1.0 + eps - n * eps / max(n, m)) * xbar
    return kernels.mg(z, (1.0 + eps) * xbar) <= thr


def _cond_e(xbar: float, n: int, m: int, eps: float, thr: float) -> bool:
    z = xbar + eps - n * eps / max(n, m)
    return kernels.mp(z, xbar + eps) <= thr


def _cond_f(xbar: float, n: int, m: int, eps: float, thr: float) -> bool:
    if xbar <= 0.0:
        return False
    theta = xbar / (1.0 + eps)
    z = theta * (1.0 + n * eps / max(n, m))
    return kernels.mp(z, theta) <= thr


def stop_stage(rule: str, state: RunningSample, schedule: StageSchedule,
               goal: EstimationGoal) -> Optional[int]:
    """Smallest stage index at which the rule's inequality holds, else None.

    Finite rules scan all s stages; unbounded rules scan until
    m_l >= n * STAGE_SCAN_FACTOR.
    """
    if state.n == 0:
        return None
    xbar = state.mean
    n = state.n
    eps = goal.epsilon
    for ell, m, budget in schedule.iter_stages():
        if schedule.unbounded and m >= n * STAGE_SCAN_FACTOR and ell > 1:
            return None
        if rule == "A":
            hit = _cond_a(xbar, n, m, eps, _threshold(m, budget))
        elif rule == "B":
            hit = _cond_b(xbar, n, m, eps, goal.delta, schedule.s)
        elif rule == "C":
            hit = _cond_c(xbar, n, m, eps, _threshold(m, budget))
        elif rule == "D":
            hit = _cond_d(xbar, n, m, eps, _threshold(m, budget))
        elif rule == "E":
            hit = _cond_e(xbar, n, m, eps, _threshold(m, budget))
        elif rule == "F":
            hit = _cond_f(xbar, n, m, eps, _threshold(m, budget))
        else:
            raise ValueError(f"unknown rule {rule!r}")
        if hit:
            return ell
    return None


def check_rule_a(state, schedule, goal):
    return stop_stage("A", state, schedule, goal) is not None


def check_rule_b(state, schedule, goal):
    return stop_stage("B", state, schedule, goal) is not None


def check_rule_c(state, schedule, goal):
    return stop_stage("C", state, schedule, goal) is not None


def check_rule_d(state, schedule, goal):
    return stop_stage("D", state, schedule, goal) is not None


def check_rule_e(state, schedule, goal):
    return stop_stage("E", state, schedule, goal) is not None


def check_rule_f(state, schedule, goal):
    return stop_stage("F", state, schedule, goal) is not None


def run_to_stop(stream: Iterable[float], rule: str, schedule: StageSchedule,
                goal: EstimationGoal) -> StopDecision:
    """Consume observations until the rule fires, the cap is hit, or the
    stream runs out."""
    state = RunningSample()
    for x in stream:
        feed(state, x, goal)
        if schedule.in_check_set(state.n):
            ell = stop_stage(rule, state, schedule, goal)
            if ell is not None:
                return StopDecision(status="stopped", n=state.n, stage=ell,
                                    estimate=state.mean, rule=rule,
                                    epsilon=goal.epsilon, delta=goal.delta)
        if schedule.unbounded and state.n >= schedule.cap:
            return StopDecision(status="cap-reached", n=state.n, stage=None,
                                estimate=state.mean, rule=rule,
                                epsilon=goal.epsilon, delta=goal.delta,
                                truncated=True)
    est = state.mean if state.n else None
    return StopDecision(status="stream-exhausted", n=state.n, stage=None,
                        estimate=est, rule=rule,
                        epsilon=goal.epsilon, delta=goal.delta)
