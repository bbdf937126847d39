"""Stage schedules: checkpoint sample sizes and per-stage confidence budgets.

A schedule is either finite (s stages with a uniform budget split) or
unbounded (geometrically growing stage sizes with geometrically decaying
budgets and a hard safety cap on total samples).
"""

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

__all__ = [
    "StageSchedule",
    "plan_bounded_abs",
    "plan_geometric_mean",
    "plan_unbounded",
    "DEFAULT_CAP",
]

DEFAULT_CAP = 10_000_000


def _geometric_stages(m1: int, ms: int, s: int) -> List[int]:
    """Ascending integer stage sizes, geometric between m1 and ms.

    Collapses to fewer distinct stages when m1 >= ms; duplicates from
    rounding are repaired by shifting upward.
    """
    if s == 1 or m1 >= ms:
        return [ms]
    raw = [m1 * (ms / m1) ** (k / (s - 1)) for k in range(s)]
    stages: List[int] = []
    for r in raw:
        m = math.ceil(r - 1e-9)
        if stages and m <= stages[-1]:
            m = stages[-1] + 1
        stages.append(m)
    stages[-1] = max(stages[-1], ms)
    return stages


@dataclass(frozen=True)
class StageSchedule:
    """Checkpoint plan: stage sizes, per-stage budgets, check-set policy.

    ``budgets`` holds the per-stage delta allocation b_l (summing to at
    most delta); the stopping rules compare kernels against
    ln(b_l / 2) / m_l.  For finite schedules b_l = delta / s uniformly.
    Unbounded schedules generate stages lazily from (m1, ratio, decay).
    """

    epsilon: float
    delta: float
    s: int
    rule: str
    stages: Tuple[int, ...]
    budgets: Tuple[float, ...]
    unbounded: bool = False
    ratio: float = 2.0
    decay: float = 0.5
    cap: int = DEFAULT_CAP
    check_every: Optional[int] = field(default=None)  # None = stage boundaries only

    def __post_init__(self) -> None:
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if any(m <= 0 for m in self.stages):
            raise ValueError("stage sizes must be positive")
        if any(b <= a for a, b in zip(self.stages, self.stages[1:])):
            raise ValueError("stage sizes must be strictly ascending")
        if len(self.budgets) != len(self.stages):
            raise ValueError("one budget per stage required")
        if self.unbounded and self.ratio <= 1.0:
            raise ValueError("unbounded schedules need ratio > 1")
        if self.unbounded and not 0.0 < self.decay < 1.0:
            raise ValueError("decay must lie in (0, 1)")

    # -- stage access ------------------------------------------------------

    def stage(self, ell: int) -> Tuple[int, float]:
        """(m_l, b_l) for 1-based stage index ell."""
        if ell < 1:
            raise ValueError("stage index is 1-based")
        if ell <= len(self.stages):
            return self.stages[ell - 1], self.budgets[ell - 1]
        if not self.unbounded:
            raise IndexError(f"finite schedule has {len(self.stages)} stages")
        m = self.stages[-1]
        for _ in range(ell - len(self.stages)):
            m = max(m + 1, math.ceil(m * self.ratio))
        b = self.delta * (1.0 - self.decay) * self.decay ** (ell - 1)
        return m, b

    def iter_stages(self) -> Iterator[Tuple[int, int, float]]:
        """Yield (ell, m_l, b_l); infinite for unbounded schedules."""
        ell = 1
        while True:
            try:
                m, b = self.stage(ell)
            except IndexError:
                return
            yield ell, m, b
            ell += 1

    def in_check_set(self, n: int) -> bool:
        if self.check_every == 1:
            return True
        if self.check_every is not None and n % self.check_every == 0:
            return True
        if self.unbounded:
            m = self.stages[0]
            while m < n:
                m = max(m + 1, math.ceil(m * self.ratio))
            return m == n
        return n in self.stages

    @property
    def final_stage_size(self) -> Optional[int]:
        return None if self.unbounded else self.stages[-1]

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        doc = {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "s": self.s,
            "rule": self.rule,
            "stages": list(self.stages),
            "budgets": list(self.budgets),
            "unbounded": self.unbounded,
            "ratio": self.ratio,
            "decay": self.decay,
            "cap": self.cap,
            "check_set": "all-n" if self.check_every == 1 else (
                f"every-{self.check_every}" if self.check_every else "stage-only"),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "StageSchedule":
        doc = json.loads(text)
        check = doc.get("check_set", "stage-only")
        if check == "stage-only":
            every: Optional[int] = None
        elif check == "all-n":
            every = 1
        else:
            every = int(check.split("-", 1)[1])
        return cls(
            epsilon=doc["epsilon"],
            delta=doc["delta"],
            s=doc["s"],
            rule=doc["rule"],
            stages=tuple(doc["stages"]),
            budgets=tuple(doc["budgets"]),
            unbounded=doc.get("unbounded", False),
            ratio=doc.get("ratio", 2.0),
            decay=doc.get("decay", 0.5),
            cap=doc.get("cap", DEFAULT_CAP),
            check_every=every,
        )


def plan_bounded_abs(epsilon: float, delta: float, s: int, rule: str = "A") -> StageSchedule:
    """Finite schedule for absolute-error bounded-mean estimation (rules A/B).

    The last stage satisfies m_s >= ln(2s/delta) / (2 eps^2); the first
    stage follows the rule-specific suggestion, and intermediate stages
    interpolate geometrically.
    """
    if not 0.0 < epsilon < 0.5:
        raise ValueError("epsilon must lie in (0, 1/2)")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if s < 1:
        raise ValueError("s must be a positive integer")
    if rule not in ("A", "B"):
        raise ValueError("rule must be 'A' or 'B'")
    log_term = math.log(2.0 * s / delta)
    ms = math.ceil(log_term / (2.0 * epsilon * epsilon))
    if s == 1:
        m1 = ms
    elif rule == "A":
        m1 = math.ceil(log_term / math.log(1.0 / (1.0 - epsilon)))
    else:
        m1 = math.ceil((24.0 * epsilon - 16.0 * epsilon * epsilon) / 9.0
                       * log_term / (2.0 * epsilon * epsilon))
    stages = tuple(_geometric_stages(m1, ms, s))
    budgets = tuple([delta / s] * len(stages))
    return StageSchedule(epsilon=epsilon, delta=delta, s=s, rule=rule,
                         stages=stages, budgets=budgets)


def plan_geometric_mean(epsilon: float, delta: float, s: int) -> StageSchedule:
    """Finite schedule for relative-error geometric-mean estimation (rule D)."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if s < 1:
        raise ValueError("s must be a positive integer")
    log_term = math.log(2.0 * s / delta)
    denom = (1.0 + epsilon) * math.log1p(epsilon) - epsilon
    ms = math.ceil((1.0 + epsilon) * log_term / denom)
    m1 = ms if s == 1 else math.ceil(log_term / math.log1p(epsilon))
    stages = tuple(_geometric_stages(m1, ms, s))
    budgets = tuple([delta / s] * len(stages))
    return StageSchedule(epsilon=epsilon, delta=delta, s=s, rule="D",
                         stages=stages, budgets=budgets)


def plan_unbounded(delta: float, m1: int, ratio: float = 2.0,
                   decay: float = 0.5, epsilon: float = 0.0,
                   rule: str = "C", cap: int = DEFAULT_CAP) -> StageSchedule:
    """Unbounded schedule: m_l geometric, budgets b_l = delta (1-q) q^(l-1).

    The budget series sums to delta and ln(b_l)/m_l -> 0 because ln b_l is
    linear in l while m_l grows geometrically.
    """
    if m1 < 1:
        raise ValueError("m1 must be a positive integer")
    if ratio <= 1.0:
        raise ValueError("ratio must exceed 1")
    if not 0.0 < decay < 1.0:
        raise ValueError("decay must lie in (0, 1)")
    budgets = (delta * (1.0 - decay),)
    return StageSchedule(epsilon=epsilon, delta=delta, s=1, rule=rule,
                         stages=(m1,), budgets=budgets, unbounded=True,
                         ratio=ratio, decay=decay, cap=cap)
