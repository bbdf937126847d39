"""Variance-aware multistage estimation of a bounded mean.

At each stage checkpoint a fixed-sample confidence interval for the
mean is built from the running mean and variance; sampling stops once
that interval falls inside the target precision band around the sample
mean.
"""

import math
from dataclasses import dataclass
from typing import Iterable, Tuple

from .fixed_ci import SampleSummary, ci_mean
from .rules import EstimationGoal, RunningSample, StopDecision, feed
from .schedules import _geometric_stages

__all__ = ["MvPlan", "plan_mv", "run_mv"]


@dataclass(frozen=True)
class MvPlan:
    """Stage sample sizes plus the precision/confidence targets."""

    epsilon: float
    delta: float
    s: int
    sizes: Tuple[int, ...]

    def __post_init__(self) -> None:
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("stage sizes must be strictly ascending")

    @property
    def stage_budget(self) -> float:
        return self.delta / (2.0 * self.s)


def plan_mv(epsilon: float, delta: float, s: int) -> MvPlan:
    """Stage sizes running geometrically from ceil(ln(2s/d) / ln(1/(1-e)))
    up to ceil(ln(2s/d) / (2 e^2))."""
    if not 0.0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if s < 1:
        raise ValueError("s must be a positive integer")
    log_term = math.log(2.0 * s / delta)
    n_last = math.ceil(log_term / (2.0 * epsilon * epsilon))
    n_first = n_last if s == 1 else math.ceil(
        log_term / math.log(1.0 / (1.0 - epsilon)))
    sizes = tuple(_geometric_stages(n_first, n_last, s))
    return MvPlan(epsilon=epsilon, delta=delta, s=s, sizes=sizes)


def run_mv(stream: Iterable[float], plan: MvPlan) -> StopDecision:
    """Consume observations until a stage interval fits inside the band
    [mean - epsilon, mean + epsilon].

    A run that passes every stage without triggering ends with status
    "no-inclusion" and the final-stage mean; the coverage guarantee is
    not certified for such runs, so they are surfaced rather than folded
    into "stopped".
    """
    goal = EstimationGoal(parameter="bounded", error="abs",
                          epsilon=plan.epsilon, delta=plan.delta)
    state = RunningSample()
    checkpoints = set(plan.sizes)
    it = iter(stream)
    eps = plan.epsilon
    last_ci = None
    for x in it:
        feed(state, x, goal)
        if state.n in checkpoints:
            stage = plan.sizes.index(state.n) + 1
            summary = SampleSummary(n=state.n, mean=state.mean,
                                    var=min(state.var, 0.25))
            interval = ci_mean(summary, plan.stage_budget)
            last_ci = interval
            xbar = state.mean
            if xbar - eps <= interval.lower and interval.upper <= xbar + eps:
                return StopDecision(status="stopped", n=state.n, stage=stage,
                                    estimate=xbar, rule="MV",
                                    epsilon=eps, delta=plan.delta,
                                    lower=interval.lower,
                                    upper=interval.upper)
            if state.n == plan.sizes[-1]:
                return StopDecision(status="no-inclusion", n=state.n,
                                    stage=stage, estimate=xbar, rule="MV",
                                    epsilon=eps, delta=plan.delta,
                                    lower=interval.lower,
                                    upper=interval.upper)
    est = state.mean if state.n else None
    return StopDecision(status="stream-exhausted", n=state.n, stage=None,
                        estimate=est, rule="MV",
                        epsilon=eps, delta=plan.delta,
                        lower=None if last_ci is None else last_ci.lower,
                        upper=None if last_ci is None else last_ci.upper)
