"""Seeded stream generators, Monte Carlo coverage experiments, and
brute-force reference computations used by the test suite and CLI.

The random generator is splitmix64: state advances by the 64-bit
constant 0x9E3779B97F4A7C15 and each output is the mix
``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
z *= 0x94D049BB133111EB; z ^= z >> 31`` of the new state.  Replication
r of an experiment with seed S uses stream seed S xor mix(r), so any
implementation of the same recipe reproduces the streams bit for bit.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from . import kernels
from .fixed_ci import SampleSummary, ci_mean
from .rules import EstimationGoal, RunningSample, StopDecision, run_to_stop
from .schedules import StageSchedule
from .seq_mv import MvPlan, run_mv

__all__ = [
    "Rng",
    "DistributionSpec",
    "generate",
    "CoverageReport",
    "coverage_chunk",
    "report_from_chunks",
    "coverage_experiment",
    "oracle_ci_grid",
    "oracle_sequence_limits",
]

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix(x: int) -> int:
    z = x & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class Rng:
    """splitmix64 stream; see the module docstring for the exact recipe."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK
        return _mix(self._state)

    def uniform(self) -> float:
        """Uniform on [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (2.0 ** -53)


_KINDS = ("bernoulli", "scaled-beta", "discrete", "geometric", "poisson")


@dataclass(frozen=True)
class DistributionSpec:
    kind: str
    params: Dict[str, object] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        p = self.params
        if self.kind == "bernoulli":
            if not 0.0 <= p["p"] <= 1.0:
                raise ValueError("p must lie in [0, 1]")
        elif self.kind == "scaled-beta":
            if p["alpha"] <= 0.0 or p["beta"] <= 0.0:
                raise ValueError("shape parameters must be positive")
        elif self.kind == "discrete":
            support, probs = p["support"], p["probs"]
            if len(support) != len(probs):
                raise ValueError("support and probs must have equal length")
            if any(not 0.0 <= x <= 1.0 for x in support):
                raise ValueError("support must lie in [0, 1]")
            if abs(sum(probs) - 1.0) > 1e-12:
                raise ValueError("probs must sum to 1")
        elif self.kind == "geometric":
            if p["theta"] <= 1.0:
                raise ValueError("mean theta must exceed 1")
        else:
            if p["lam"] <= 0.0:
                raise ValueError("lam must be positive")

    def true_value(self) -> float:
        """The parameter the estimation procedures target."""
        p = self.params
        if self.kind == "bernoulli":
            return float(p["p"])
        if self.kind == "scaled-beta":
            return p["alpha"] / (p["alpha"] + p["beta"])
        if self.kind == "discrete":
            return float(sum(x * q for x, q in zip(p["support"], p["probs"])))
        if self.kind == "geometric":
            return float(p["theta"])
        return float(p["lam"])


def _draw(rng: Rng, spec: DistributionSpec) -> float:
    p = spec.params
    if spec.kind == "bernoulli":
        return 1.0 if rng.uniform() < p["p"] else 0.0
    if spec.kind == "scaled-beta":
        a, b = p["alpha"], p["beta"]
        if a == int(a) and b == int(b) and a + b <= 64:
            # k-th order statistic of a+b-1 uniforms is Beta(k, a+b-k)
            k, total = int(a), int(a) + int(b) - 1
            us = sorted(rng.uniform() for _ in range(total))
            return us[k - 1]
        # Johnk's rejection method for non-integer shapes
        while True:
            x = rng.uniform() ** (1.0 / a)
            y = rng.uniform() ** (1.0 / b)
            if 0.0 < x + y <= 1.0:
                return x / (x + y)
    if spec.kind == "discrete":
        u = rng.uniform()
        acc = 0.0
        for x, q in zip(p["support"], p["probs"]):
            acc += q
            if u < acc:
                return float(x)
        return float(p["support"][-1])
    if spec.kind == "geometric":
        succ = 1.0 / p["theta"]
        u = 1.0 - rng.uniform()  # in (0, 1]
        return 1.0 + math.floor(math.log(u) / math.log1p(-succ))
    # poisson, product method
    lam = p["lam"]
    limit = math.exp(-lam)
    k, prod = 0, 1.0
    while True:
        prod *= rng.uniform()
        if prod <= limit:
            return float(k)
        k += 1


def generate(spec: DistributionSpec, count: int,
             replication: int = 0) -> Iterator[float]:
    """Lazy stream of count draws for the given replication index."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    rng = Rng(spec.seed ^ _mix(replication))
    for _ in range(count):
        yield _draw(rng, spec)


@dataclass(frozen=True)
class CoverageReport:
    procedure: str
    replications: int
    coverage: float
    mean_n: float
    n_quantiles: Dict[str, int]
    cap_hits: int
    no_inclusion: int
    seed: int
    spec_kind: str
    spec_params: Dict[str, object]

    def to_json(self) -> str:
        return json.dumps({
            "procedure": self.procedure,
            "replications": self.replications,
            "coverage": self.coverage,
            "mean_n": self.mean_n,
            "n_quantiles": self.n_quantiles,
            "cap_hits": self.cap_hits,
            "no_inclusion": self.no_inclusion,
            "seed": self.seed,
            "spec": {"kind": self.spec_kind, "params": self.spec_params},
        })


def _claim_holds(goal: EstimationGoal, estimate: float, truth: float) -> bool:
    if goal.parameter == "geometric":
        return (1.0 - goal.epsilon) * estimate < truth < \
            (1.0 + goal.epsilon) * estimate
    if goal.error == "rel":
        return abs(estimate - truth) < goal.epsilon * truth
    return abs(estimate - truth) < goal.epsilon


def _quantile(sorted_ns: List[int], q: float) -> int:
    idx = min(len(sorted_ns) - 1, max(0, math.ceil(q * len(sorted_ns)) - 1))
    return sorted_ns[idx]


def coverage_chunk(procedure: str, spec: DistributionSpec,
                   goal: Optional[EstimationGoal] = None,
                   schedule: Optional[StageSchedule] = None,
                   reps: int = 1000,
                   rep_offset: int = 0,
                   fixed_n: Optional[int] = None,
                   plan: Optional[MvPlan] = None
                   ) -> Tuple[int, int, int, List[int]]:
    """Raw tallies (covered, cap_hits, no_inclusion, stop sizes) over
    replications rep_offset .. rep_offset + reps - 1.  Replication
    indices fix the stream seeds, so splitting the range over workers
    changes nothing in the merged result."""
    truth = spec.true_value()
    covered = 0
    cap_hits = 0
    no_inclusion = 0
    ns: List[int] = []
    for r in range(rep_offset, rep_offset + reps):
        if procedure == "ci":
            state = RunningSample()
            for x in generate(spec, fixed_n, replication=r):
                state.n += 1
                state.total += x
                state.total_sq += x * x
            summary = SampleSummary(n=state.n, mean=state.mean,
                                    var=min(state.var, 0.25))
            interval = ci_mean(summary, goal.delta)
            ns.append(fixed_n)
            if interval.lower <= truth <= interval.upper:
                covered += 1
            continue
        if procedure == "mv":
            decision = run_mv(generate(spec, plan.sizes[-1], replication=r),
                              plan)
            ns.append(decision.n)
            if decision.status == "no-inclusion":
                no_inclusion += 1
            if abs(decision.estimate - truth) < plan.epsilon:
                covered += 1
            continue
        count = schedule.cap if schedule.unbounded else \
            schedule.final_stage_size
        decision = run_to_stop(generate(spec, count, replication=r),
                               procedure, schedule, goal)
        ns.append(decision.n)
        if decision.status == "cap-reached":
            cap_hits += 1
        elif decision.status == "stopped" and \
                _claim_holds(goal, decision.estimate, truth):
            covered += 1
    return covered, cap_hits, no_inclusion, ns


def report_from_chunks(procedure: str, spec: DistributionSpec, reps: int,
                       chunks: List[Tuple[int, int, int, List[int]]]
                       ) -> CoverageReport:
    covered = sum(c[0] for c in chunks)
    cap_hits = sum(c[1] for c in chunks)
    no_inclusion = sum(c[2] for c in chunks)
    ns: List[int] = []
    for c in chunks:
        ns.extend(c[3])
    ns.sort()
    return CoverageReport(
        procedure=procedure,
        replications=reps,
        coverage=covered / reps if reps else 0.0,
        mean_n=sum(ns) / len(ns) if ns else 0.0,
        n_quantiles={} if not ns else {
            "p50": _quantile(ns, 0.50),
            "p90": _quantile(ns, 0.90),
            "p99": _quantile(ns, 0.99),
        },
        cap_hits=cap_hits,
        no_inclusion=no_inclusion,
        seed=spec.seed,
        spec_kind=spec.kind,
        spec_params=dict(spec.params),
    )


def coverage_experiment(procedure: str, spec: DistributionSpec,
                        goal: Optional[EstimationGoal] = None,
                        schedule: Optional[StageSchedule] = None,
                        reps: int = 1000,
                        fixed_n: Optional[int] = None,
                        plan: Optional[MvPlan] = None) -> CoverageReport:
    """Monte Carlo estimate of the terminal-claim coverage.

    procedure is a rule letter A..F (needs goal + schedule), "mv"
    (needs plan), or "ci" (needs goal + fixed_n).  Cap hits and
    no-inclusion outcomes count as coverage failures.
    """
    chunk = coverage_chunk(procedure, spec, goal=goal, schedule=schedule,
                           reps=reps, fixed_n=fixed_n, plan=plan)
    return report_from_chunks(procedure, spec, reps, [chunk])


# -- grid reference for the fixed-sample interval --------------------------
# Independent vectorized re-derivations of the divergence formulas; kept
# separate from the kernels module on purpose.

def _varphi_vec(z: float, nu: float, ths: np.ndarray) -> np.ndarray:
    t = z * nu / (nu * nu + ths)
    out = (1.0 - t) * np.log1p(nu * (nu - z) / ths)
    if z > 0.0:
        out = out + t * math.log(z / nu)
    return out


def _phi_vec(w: float, ths: np.ndarray) -> np.ndarray:
    return w * np.log(w / ths) + (1.0 - w) * np.log((1.0 - w) / (1.0 - ths))


def _grid_predicate(nu: float, summary: SampleSummary, threshold: float,
                    tstep: float) -> bool:
    """Literal check over the variance grid: the divergence max exceeds
    the threshold at every vartheta in (0, nu(1-nu)]."""
    tmax = nu * (1.0 - nu)
    if tmax <= 0.0:
        return False
    ths = np.arange(tstep, tmax, tstep)
    ths = np.append(ths, tmax)
    xbar = summary.mean
    if nu > xbar:
        div = _varphi_vec(xbar, nu, ths)
    elif nu < xbar:
        div = _varphi_vec(1.0 - xbar, 1.0 - nu, ths)
    else:
        div = np.zeros_like(ths)
    ok = div > threshold
    w = summary.w(nu)
    if w < 1.0:
        mask = ths > w
        if mask.any():
            if w > 0.0:
                ok[mask] |= _phi_vec(w, ths[mask]) > threshold
            else:
                ok[mask] |= -np.log1p(-ths[mask]) > threshold
    return bool(ok.all())


def oracle_ci_grid(summary: SampleSummary, delta: float,
                   grid_step: float = 1e-5,
                   coarse_step: float = 1e-3) -> Tuple[float, float]:
    """Confidence limits from exhaustive grid evaluation of the defining
    sup/inf predicates; a coarse pass locates the transition and a fine
    pass at grid_step resolution pins it down."""
    threshold = math.log(3.0 / delta) / summary.n
    xbar = summary.mean

    def pred(nu: float) -> bool:
        return _grid_predicate(nu, summary, threshold, grid_step)

    if xbar <= 0.0:
        lower = 0.0
    else:
        nu_c = None
        nu = xbar - coarse_step
        while nu > 0.0:
            if pred(nu):
                nu_c = nu
                break
            nu -= coarse_step
        start = min((nu_c + coarse_step) if nu_c is not None else coarse_step,
                    xbar)
        lower = 0.0
        nu = start - grid_step
        while nu > 0.0:
            if pred(nu):
                lower = nu
                break
            nu -= grid_step
    if xbar >= 1.0:
        upper = 1.0
    else:
        nu_c = None
        nu = xbar + coarse_step
        while nu < 1.0:
            if pred(nu):
                nu_c = nu
                break
            nu += coarse_step
        start = max((nu_c - coarse_step) if nu_c is not None else
                    1.0 - coarse_step, xbar)
        upper = 1.0
        nu = start + grid_step
        while nu < 1.0:
            if pred(nu):
                upper = nu
                break
            nu += grid_step
    return lower, upper


# -- bisected per-stage confidence-sequence limits -------------------------

def _bisect_crossing(func, lo: float, hi: float, threshold: float,
                     above_at_hi: bool, iters: int = 100) -> float:
    """Crossing point of a monotone func against threshold.

    above_at_hi says on which end func exceeds the threshold; the
    bracket invariant is maintained accordingly.
    """
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if (func(mid) > threshold) == above_at_hi:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def oracle_sequence_limits(state: RunningSample, schedule: StageSchedule,
                           goal: EstimationGoal,
                           ell: int) -> Tuple[float, float]:
    """Stage-ell confidence-sequence limits around the running mean.

    The lower limit is the infimum of candidate parameter values whose
    shrunk-towards-the-mean divergence exceeds the stage threshold; the
    upper limit is the matching supremum.  Both are found by bisection,
    the divergence being monotone in the candidate value.
    """
    m, budget = schedule.stage(ell)
    threshold = math.log(budget / 2.0) / m
    n = state.n
    xbar = state.mean
    r = n / max(n, m)

    if goal.parameter == "bounded":
        kernel, dom_lo = kernels.mb, 0.0
    elif goal.parameter == "geometric":
        kernel, dom_lo = kernels.mg, 1.0
    else:
        kernel, dom_lo = kernels.mp, 0.0

    def toward_mean_from_below(nu: float) -> float:
        return kernel(nu + r * (xbar - nu), nu)

    def toward_mean_from_above(nu: float) -> float:
        return kernel(nu - r * (nu - xbar), nu)

    if xbar <= dom_lo:
        lower = dom_lo
    else:
        lo = dom_lo + 1e-15 * max(1.0, xbar)
        hi = xbar - 1e-15 * max(1.0, xbar)
        if hi <= lo:
            lower = xbar
        elif toward_mean_from_below(lo) > threshold:
            lower = lo
        else:
            lower = _bisect_crossing(toward_mean_from_below, lo, hi,
                                     threshold, above_at_hi=True)

    if goal.parameter == "bounded" and xbar >= 1.0:
        upper = 1.0
    else:
        lo = xbar + 1e-15 * max(1.0, xbar)
        if goal.parameter == "bounded":
            hi = 1.0 - 1e-15
        else:
            hi = max(2.0 * xbar, dom_lo + 1.0)
            while toward_mean_from_above(hi) > threshold:
                hi *= 2.0
        if hi <= lo:
            upper = xbar
        elif toward_mean_from_above(hi) > threshold:
            upper = hi
        else:
            upper = _bisect_crossing(toward_mean_from_above, lo, hi,
                                     threshold, above_at_hi=False)
    return lower, upper
