"""Dynamics of the scale factor a(t) with a'' = -lam/a + xi^2/a^3.

The motion is one-dimensional in the effective potential
V(a) = lam*ln(a) + xi^2/(2 a^2), so the conserved energy
theta = a1^2/2 + V(a0) classifies every orbit:

* lam > 0, xi != 0: V has a single minimum at abar = |xi|/sqrt(lam); the
  orbit is steady exactly at the minimum and periodic otherwise.
* xi = 0, lam > 0: no centrifugal barrier, a reaches zero in finite time
  (density blowup).
* lam <= 0: the solution exists globally and is unbounded.

The period of a periodic orbit is computed two independent ways: as the
singular quadrature 2 * integral da / sqrt(2*(theta - V(a))) between the
turning points, and by timing a'=0 events of a simulated trajectory.
Agreement between the two is one of the package's core self-checks.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, NoConvergence, NotPeriodic, StateBlowup, StepUnderflow
from .ode import (
    EventSpec,
    IntegratorConfig,
    OdeState,
    Trajectory,
    detect_events,
    integrate,
    quad_singular_estimate,
)

# relative width of the band around (abar, 0) treated as the steady state
STEADY_RTOL = 1e-12

# tolerances for turning-point roots
_BRACKET_MAX_DOUBLINGS = 600
_ROOT_ATOL = 1e-14


@dataclass(frozen=True)
class EmdenParams:
    """Parameters (lam, xi, a0, a1) of one scale-factor initial value problem."""

    lam: float
    xi: float
    a0: float
    a1: float

    def __post_init__(self):
        vals = (self.lam, self.xi, self.a0, self.a1)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("all parameters must be finite")
        if not self.a0 > 0:
            raise DomainError("a0 must be > 0")


class OrbitClass(enum.Enum):
    STEADY = "steady"
    PERIODIC = "periodic"
    GLOBAL_NON_PERIODIC = "global_non_periodic"
    FINITE_TIME_BLOWUP = "finite_time_blowup"


class TurningPoints(NamedTuple):
    a_min: float
    a_max: float


@dataclass(frozen=True)
class PeriodEstimate:
    T: float
    method: str  # "quadrature" or "simulation"
    err_est: float


@dataclass(frozen=True)
class ScaleRun:
    """Result of integrating the scale factor: trajectory plus touchdown, if any."""

    trajectory: Trajectory
    touchdown_time: float | None = None


def scale_rhs(p: EmdenParams):
    """Right-hand side of the first-order system (a, a')."""
    lam, xi2 = p.lam, p.xi * p.xi

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        a = y[0]
        if a <= 0.0:
            return np.array([math.nan, math.nan])
        return np.array([y[1], -lam / a + xi2 / (a * a * a)])

    return rhs


def potential(a: float, p: EmdenParams) -> float:
    """Effective potential lam*ln(a) + xi^2/(2 a^2)."""
    if not a > 0:
        raise DomainError("potential requires a > 0")
    return p.lam * math.log(a) + p.xi * p.xi / (2 * a * a)


def energy_level(p: EmdenParams) -> float:
    """Conserved energy theta = a1^2/2 + lam*ln(a0) + xi^2/(2 a0^2)."""
    return p.a1 * p.a1 / 2 + potential(p.a0, p)


def equilibrium_radius(p: EmdenParams) -> float:
    """The unique potential minimum abar = |xi|/sqrt(lam) (needs lam>0, xi!=0)."""
    if p.lam <= 0 or p.xi == 0:
        raise DomainError("equilibrium requires lam > 0 and xi != 0")
    return abs(p.xi) / math.sqrt(p.lam)


def _is_steady(p: EmdenParams) -> bool:
    if p.lam <= 0 or p.xi == 0:
        return False
    abar = equilibrium_radius(p)
    return (
        abs(p.a0 - abar) <= STEADY_RTOL * abar
        and abs(p.a1) <= STEADY_RTOL * max(1.0, abar)
    )


def classify(p: EmdenParams) -> OrbitClass:
    """Orbit trichotomy: steady / periodic (lam>0, xi!=0), blowup (xi=0, lam>0),
    global otherwise (lam<=0)."""
    if p.lam > 0 and p.xi != 0:
        return OrbitClass.STEADY if _is_steady(p) else OrbitClass.PERIODIC
    if p.lam > 0:
        return OrbitClass.FINITE_TIME_BLOWUP
    return OrbitClass.GLOBAL_NON_PERIODIC


def turning_points(p: EmdenParams) -> TurningPoints:
    """Extreme scale factors of a periodic orbit, the roots of V(a) = theta.

    Brackets expand geometrically outward from the potential minimum, then
    bisection plus a guarded Newton polish drives |V(a) - theta| below
    1e-12 * max(1, |theta|).  When a1 = 0 the initial point itself is a
    turning point and is returned exactly.
    """
    if classify(p) is not OrbitClass.PERIODIC:
        raise NotPeriodic("turning points exist only for periodic orbits")
    th = energy_level(p)
    abar = equilibrium_radius(p)
    g = lambda a: potential(a, p) - th

    def solve_side(outward: float) -> float:
        # outward < 1 searches (0, abar), outward > 1 searches (abar, inf)
        hi = abar
        lo = abar * outward
        for _ in range(_BRACKET_MAX_DOUBLINGS):
            if g(lo) > 0:
                break
            hi = lo
            lo *= outward
        else:
            raise NoConvergence("turning-point bracket expansion failed")
        a, b = (lo, hi) if lo < hi else (hi, lo)
        ga, gb = g(a), g(b)
        while b - a > _ROOT_ATOL:
            m = 0.5 * (a + b)
            if m == a or m == b:
                break
            gm = g(m)
            if gm == 0.0:
                return m
            if (gm > 0) == (ga > 0):
                a, ga = m, gm
            else:
                b, gb = m, gm
        root = 0.5 * (a + b)
        for _ in range(3):  # Newton polish, kept inside the bracket
            dv = p.lam / root - p.xi * p.xi / root**3
            if dv == 0:
                break
            step = g(root) / dv
            cand = root - step
            if a <= cand <= b:
                root = cand
        return root

    if p.a1 == 0.0:
        # a0 lies exactly on the level set with a'=0
        if p.a0 > abar:
            return TurningPoints(solve_side(0.5), p.a0)
        return TurningPoints(p.a0, solve_side(2.0))
    return TurningPoints(solve_side(0.5), solve_side(2.0))


def period_by_quadrature(p: EmdenParams, tol: float = 1e-10) -> PeriodEstimate:
    """Orbit period as 2 * integral da / sqrt(2*(theta - V(a))).

    The integrand has inverse-square-root singularities at both turning
    points, handled by `quad_singular`.
    """
    tp = turning_points(p)
    th = energy_level(p)

    def integrand(a: float) -> float:
        ex = th - potential(a, p)
        if ex <= 0.0:
            return 0.0
        return 1.0 / math.sqrt(2.0 * ex)

    val, err = quad_singular_estimate(integrand, tp.a_min, tp.a_max, tol)
    return PeriodEstimate(T=2.0 * val, method="quadrature", err_est=2.0 * err)


def linearized_period(p: EmdenParams) -> float:
    """Small-oscillation period 2*pi/sqrt(V''(abar)) near the equilibrium."""
    abar = equilibrium_radius(p)
    ddv = -p.lam / abar**2 + 3 * p.xi * p.xi / abar**4
    return 2 * math.pi / math.sqrt(ddv)


_PERIOD_EVENTS_NEEDED = 4  # 3 full cycles
_PERIOD_MAX_CHUNKS = 64


def period_by_simulation(
    p: EmdenParams, cfg: IntegratorConfig | None = None
) -> PeriodEstimate:
    """Orbit period timed from falling a'=0 events of a simulated trajectory.

    The trajectory is extended in chunks until four maxima of a(t) are
    located; the period is the mean of the three gaps and err_est their
    maximum deviation from the mean.
    """
    if classify(p) is not OrbitClass.PERIODIC:
        raise NotPeriodic("period is defined only for periodic orbits")
    cfg = cfg or IntegratorConfig(rtol=1e-12, atol=1e-14)
    rhs = scale_rhs(p)
    spec = EventSpec(lambda t, y: y[1], direction="falling", refine_tol=1e-12)

    chunk = 4.0 * linearized_period(p)
    state = OdeState(0.0, np.array([p.a0, p.a1]))
    events: list[float] = []
    for _ in range(_PERIOD_MAX_CHUNKS):
        traj = integrate(rhs, state, state.t + chunk, cfg)
        for t_ev in detect_events(traj, spec):
            if not events or t_ev - events[-1] > 1e-9 * chunk:
                events.append(t_ev)
        if len(events) >= _PERIOD_EVENTS_NEEDED:
            break
        state = OdeState(traj.t_end, traj.y_end)
    else:
        raise NoConvergence("no full cycles detected within the time budget")

    gaps = np.diff(events[:_PERIOD_EVENTS_NEEDED])
    T = float(np.mean(gaps))
    return PeriodEstimate(
        T=T, method="simulation", err_est=float(np.max(np.abs(gaps - T)))
    )


def integrate_scale(
    p: EmdenParams, t_end: float, cfg: IntegratorConfig | None = None
) -> ScaleRun:
    """Trajectory of (a, a') on [0, t_end], stopping cleanly at touchdown.

    When the orbit collapses (a -> 0, possible only without rotation and
    lam > 0, or with lam = xi = 0 and a1 < 0) the integrator's step size
    collapses at the singular time; that halt is reported as the touchdown
    time instead of an error.
    """
    if not t_end > 0:
        raise DomainError("t_end must be > 0")
    cfg = cfg or IntegratorConfig()
    try:
        traj = integrate(scale_rhs(p), OdeState(0.0, np.array([p.a0, p.a1])), t_end, cfg)
        return ScaleRun(trajectory=traj, touchdown_time=None)
    except (StepUnderflow, StateBlowup) as halt:
        if halt.trajectory is None or halt.trajectory.y_end[0] > 1e-6 * p.a0:
            raise  # not a collapse; surface the halt with its context
        return ScaleRun(trajectory=halt.trajectory, touchdown_time=halt.t)


def energy_drift(traj: Trajectory, p: EmdenParams) -> float:
    """Max |energy(t) - theta| over the trajectory nodes."""
    th = energy_level(p)
    a = traj.ys[:, 0]
    adot = traj.ys[:, 1]
    e = adot**2 / 2 + p.lam * np.log(a) + p.xi * p.xi / (2 * a**2)
    return float(np.max(np.abs(e - th)))
