"""Fixed-sample confidence interval for a bounded mean and a joint
confidence region for (mean, variance).

The interval limits are defined as the sup/inf of a scan predicate over
candidate means; an adaptive step-doubling/halving sweep evaluates the
predicate on whole subintervals at once, using an interval-wise
sufficient condition that sharpens as the subinterval shrinks.
"""

import json
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

from scipy.optimize import brentq

from .kernels import phi, psi, varphi

__all__ = [
    "SampleSummary",
    "ConfidenceInterval",
    "ConfidenceRegion",
    "state_b_holds",
    "state_bu_holds",
    "lower_limit",
    "upper_limit",
    "ci_mean",
    "region_contains",
    "region_boundary",
]

ETA = 1e-12          # scan stops when the step drops below this
BISECT_TOL = 1e-10   # width of the final bracket around the phi crossing


@dataclass(frozen=True)
class SampleSummary:
    """Count, sample mean and (population-style) sample variance."""

    n: int
    mean: float
    var: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be a positive integer")
        if not 0.0 <= self.mean <= 1.0:
            raise ValueError("mean must lie in [0, 1]")
        if not -1e-12 <= self.var <= 0.25 + 1e-12:
            raise ValueError("var must lie in [0, 1/4]")

    def w(self, nu: float) -> float:
        """Second moment about a hypothesized mean nu."""
        return self.var + (self.mean - nu) ** 2


@dataclass(frozen=True)
class ConfidenceInterval:
    n: int
    mean: float
    var: float
    delta: float
    lower: float
    upper: float

    @property
    def level(self) -> float:
        return 1.0 - self.delta

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "mean": self.mean, "var": self.var,
                           "delta": self.delta, "L": self.lower, "U": self.upper})


@dataclass(frozen=True)
class ConfidenceRegion:
    """Sampled boundary of the joint (mean, variance) confidence set.

    Each point is (curve, nu, vartheta).  Curves C1/C2/C3 bound the part
    with nu >= mean, D1/D2/D3 the part with nu < mean.  C1/D1 lie on the
    variance envelope vartheta = nu (1 - nu); C2/D2 solve the tail
    divergence equation; C3/D3 solve the phi equation in vartheta.
    """

    n: int
    mean: float
    var: float
    delta: float
    threshold: float
    points: Tuple[Tuple[str, float, float], ...]

    @property
    def level(self) -> float:
        return 1.0 - self.delta

    def to_csv(self) -> str:
        lines = ["curve,nu,vartheta"]
        for curve, nu, th in self.points:
            lines.append(f"{curve},{nu:.12g},{th:.12g}")
        return "\n".join(lines) + "\n"


# -- divergence helpers with closed-form edge handling ---------------------

def _phi_ext(w: float, theta: float) -> float:
    """phi(w, theta) extended: continuous limit at w = 0, +inf for w >= 1."""
    if w <= 0.0:
        return -math.log1p(-theta)
    if w >= 1.0:
        return math.inf
    return phi(w, theta)


def _div_above(xbar: float, nu: float, theta: float) -> float:
    """Lower-tail divergence for a candidate mean nu >= xbar."""
    if nu <= xbar:
        return 0.0
    return varphi(xbar, nu, theta)


def _div_below(xbar: float, nu: float, theta: float) -> float:
    """Upper-tail divergence for a candidate mean nu < xbar."""
    if nu >= xbar:
        return 0.0
    return psi(xbar, nu, theta)


def _phi_crossing_lower_bound(w: float, c: float, threshold: float) -> float:
    """Lower bracket end of the crossing phi(w, t) = threshold on (w, c).

    phi(w, .) is increasing there with phi(w, w) = 0; the caller has
    checked phi(w, c) > threshold, so the crossing exists.  The bracket is
    narrowed to BISECT_TOL and the lower end returned, so the result
    never overshoots the true crossing.
    """
    lo, hi = w, c
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if _phi_ext(w, mid) > threshold:
            hi = mid
        else:
            lo = mid
    return lo


# -- interval-wise scan predicates -----------------------------------------

def state_b_holds(a: float, b: float, summary: SampleSummary,
                  threshold: float) -> bool:
    """Sufficient condition for the lower-limit predicate on all of [a, b].

    Requires 0 <= a <= b < mean with b > 0.  True means every nu in
    [a, b] satisfies the defining scan predicate.
    """
    xbar = summary.mean
    if not 0.0 <= a <= b < xbar or b <= 0.0:
        raise ValueError("need 0 <= a <= b < mean with b > 0")
    c = max(a * (1.0 - a), b * (1.0 - b))
    wa = summary.w(a)
    if wa >= c:
        return psi(xbar, b, c) > threshold
    if psi(xbar, b, wa) <= threshold:
        return False
    if _phi_ext(wa, c) <= threshold:
        return psi(xbar, b, c) > threshold
    t_low = _phi_crossing_lower_bound(wa, c, threshold)
    return psi(xbar, b, t_low) > threshold


def state_bu_holds(a: float, b: float, summary: SampleSummary,
                   threshold: float) -> bool:
    """Mirror of :func:`state_b_holds` for [a, b] above the mean."""
    xbar = summary.mean
    if not xbar < a <= b <= 1.0:
        raise ValueError("need mean < a <= b <= 1")
    c = max(a * (1.0 - a), b * (1.0 - b))
    wb = summary.w(b)
    if wb >= c:
        return varphi(xbar, a, c) > threshold
    if varphi(xbar, a, wb) <= threshold:
        return False
    if _phi_ext(wb, c) <= threshold:
        return varphi(xbar, a, c) > threshold
    t_low = _phi_crossing_lower_bound(wb, c, threshold)
    return varphi(xbar, a, t_low) > threshold


# -- adaptive scans --------------------------------------------------------

def lower_limit(summary: SampleSummary, delta: float) -> float:
    """Lower confidence limit at level 1 - delta; 0 when the mean is 0."""
    xbar = summary.mean
    if xbar <= 0.0:
        return 0.0
    threshold = math.log(3.0 / delta) / summary.n
    d = max(xbar / 8.0, 1e-3)
    a = 0.0
    finished = False
    while not finished:
        settled = False
        ell = 2
        while not settled:
            ell -= 1
            d *= 2.0 ** ell
            if a + d < xbar:
                b = a + d
                if state_b_holds(a, b, summary, threshold):
                    settled = True
                    a = b
            if d < ETA:
                settled = True
                finished = True
    return a


def upper_limit(summary: SampleSummary, delta: float) -> float:
    """Upper confidence limit at level 1 - delta; 1 when the mean is 1."""
    xbar = summary.mean
    if xbar >= 1.0:
        return 1.0
    threshold = math.log(3.0 / delta) / summary.n
    d = max((1.0 - xbar) / 8.0, 1e-3)
    b = 1.0
    finished = False
    while not finished:
        settled = False
        ell = 2
        while not settled:
            ell -= 1
            d *= 2.0 ** ell
            if b - d > xbar:
                a = b - d
                if state_bu_holds(a, b, summary, threshold):
                    settled = True
                    b = a
            if d < ETA:
                settled = True
                finished = True
    return b


def ci_mean(summary: SampleSummary, delta: float) -> ConfidenceInterval:
    """Two-sided confidence interval for the mean at level 1 - delta."""
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return ConfidenceInterval(n=summary.n, mean=summary.mean, var=summary.var,
                              delta=delta,
                              lower=lower_limit(summary, delta),
                              upper=upper_limit(summary, delta))


# -- joint (mean, variance) region -----------------------------------------

def region_contains(summary: SampleSummary, delta: float,
                    nu: float, vartheta: float) -> bool:
    """Membership of (nu, vartheta) in the joint confidence set."""
    if not 0.0 < nu < 1.0:
        return False
    if not 0.0 < vartheta <= nu * (1.0 - nu):
        return False
    threshold = math.log(4.0 / delta) / summary.n
    xbar = summary.mean
    if nu >= xbar:
        div = _div_above(xbar, nu, vartheta)
    else:
        div = _div_below(xbar, nu, vartheta)
    if div >= threshold:
        return False
    return _phi_ext(summary.w(nu), vartheta) < threshold


def _phi_roots(w: float, threshold: float,
               cap: float = 0.25) -> List[float]:
    """Solutions of phi(w, t) = threshold, at most one on each side of w.

    phi(w, .) decreases on (0, w) from +inf to 0 and increases on
    (w, cap]; each branch is bracketed and solved to near machine
    precision.
    """
    if w <= 0.0 or w >= 1.0:
        return []
    roots: List[float] = []
    # branch below w: walk the lower end down until the value exceeds
    # the threshold, then solve
    lo = w / 2.0
    for _ in range(200):
        if _phi_ext(w, lo) > threshold:
            break
        lo /= 2.0
    else:
        lo = None
    if lo is not None:
        r = brentq(lambda t: _phi_ext(w, t) - threshold, lo, w,
                   xtol=1e-15, rtol=8.9e-16)
        roots.append(float(r))
    # branch above w
    if w < cap and _phi_ext(w, cap) > threshold:
        r = brentq(lambda t: _phi_ext(w, t) - threshold, w, cap,
                   xtol=1e-15, rtol=8.9e-16)
        roots.append(float(r))
    return roots


def region_boundary(summary: SampleSummary, delta: float,
                    resolution: int = 200) -> ConfidenceRegion:
    """Sampled boundary points of the joint confidence set.

    Emits only points that lie on the actual region boundary: each point
    satisfies its curve's defining equation and the remaining membership
    constraints.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    xbar = summary.mean
    threshold = math.log(4.0 / delta) / summary.n
    points: List[Tuple[str, float, float]] = []

    def emit_side(upper_side: bool) -> None:
        div = _div_above if upper_side else _div_below
        env, tailcurve, phicurve = (
            ("C1", "C2", "C3") if upper_side else ("D1", "D2", "D3"))
        if upper_side:
            lo_nu, hi_nu = xbar, 1.0
        else:
            lo_nu, hi_nu = 0.0, xbar
        if hi_nu - lo_nu <= 0.0:
            return
        step = (hi_nu - lo_nu) / resolution
        nus = [lo_nu + k * step for k in range(resolution)]
        if not upper_side:
            nus = [nu + step for nu in nus]  # (0, xbar] rather than [0, xbar)
            nus = [nu for nu in nus if nu < xbar]
        for nu in nus:
            if not 0.0 < nu < 1.0:
                continue
            tmax = nu * (1.0 - nu)
            # envelope point, kept when the inequality constraints allow it
            if div(xbar, nu, tmax) < threshold and \
                    _phi_ext(summary.w(nu), tmax) < threshold:
                points.append((env, nu, tmax))
            for root in _phi_roots(summary.w(nu), threshold):
                if root <= tmax and div(xbar, nu, root) < threshold:
                    points.append((phicurve, nu, root))
        # tail-divergence curve: solve for nu at fixed vartheta, using
        # monotonicity of the divergence in nu away from the mean
        for k in range(1, resolution + 1):
            th = 0.25 * k / resolution
            if upper_side:
                bracket = (xbar, 1.0 - 1e-9)
            else:
                bracket = (1e-9, xbar)
            f = lambda nu: div(xbar, nu, th) - threshold
            far = bracket[1] if upper_side else bracket[0]
            try:
                if f(far) <= 0.0:
                    continue  # divergence never reaches the threshold
                nu_root = float(brentq(f, bracket[0], bracket[1],
                                       xtol=1e-15, rtol=8.9e-16))
            except ValueError:
                continue
            if th <= nu_root * (1.0 - nu_root) and \
                    _phi_ext(summary.w(nu_root), th) < threshold:
                points.append((tailcurve, nu_root, th))

    if xbar < 1.0:
        emit_side(True)
    if xbar > 0.0:
        emit_side(False)
    return ConfidenceRegion(n=summary.n, mean=xbar, var=summary.var,
                            delta=delta, threshold=threshold,
                            points=tuple(points))
