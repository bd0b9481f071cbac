"""Adaptive ODE integration and quadrature primitives.

An explicit Dormand-Prince 5(4) pair drives all time integration in the
package.  Accepted steps store the state and derivative at both ends, so the
trajectory supports continuous cubic-Hermite dense output, post-hoc event
location, and exact (bitwise) reproduction of node states.

Quadrature comes in two flavours: a plain adaptive Gauss-Kronrod 7/15 rule
for smooth integrands, and `quad_singular`, which first applies the
substitution x = lo + (hi-lo)*sin^2(theta).  The substitution removes
inverse-square-root endpoint singularities exactly, which is the worst
behaviour any integrand in this package exhibits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DomainError,
    NoConvergence,
    StateBlowup,
    StepBudgetExceeded,
    StepUnderflow,
)

RhsFn = Callable[[float, np.ndarray], np.ndarray]
EventFn = Callable[[float, np.ndarray], float]

# Fixed guards for abnormal termination.  Blowup is detected, never
# integrated through; persistent step rejection near a singularity ends in
# StepUnderflow instead of an infinite loop.
OVERFLOW_GUARD = 1e300
STEP_UNDERFLOW_REL = 1e-14

# Dormand-Prince 5(4) tableau (FSAL: the 7th stage is the derivative at the
# accepted point).
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# 5th-order weights equal the last A row (FSAL); error weights are the
# difference against the embedded 4th-order solution.
_E = (
    35 / 384 - 5179 / 57600,
    0.0,
    500 / 1113 - 7571 / 16695,
    125 / 192 - 393 / 640,
    -2187 / 6784 + 92097 / 339200,
    11 / 84 - 187 / 2100,
    -1 / 40,
)
_A_ROWS = [np.array(row) for row in _A]
_E_ARR = np.array(_E)


@dataclass(frozen=True)
class OdeState:
    """A time point and the state vector attached to it."""

    t: float
    y: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        object.__setattr__(self, "y", y)
        if not math.isfinite(self.t) or not np.all(np.isfinite(y)):
            raise DomainError("OdeState requires finite t and y")


@dataclass(frozen=True)
class IntegratorConfig:
    """Error tolerances and step limits for `integrate`."""

    rtol: float = 1e-10
    atol: float = 1e-12
    h_init: float = 1e-3
    h_max: float = math.inf
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not self.rtol > 0:
            raise DomainError("rtol must be > 0")
        if not self.atol >= 0:
            raise DomainError("atol must be >= 0")
        if not self.h_init > 0:
            raise DomainError("h_init must be > 0")
        if not self.h_max >= self.h_init:
            raise DomainError("h_max must be >= h_init")
        if not self.max_steps > 0:
            raise DomainError("max_steps must be > 0")


@dataclass(frozen=True)
class EventSpec:
    """A scalar crossing condition evaluated along a trajectory.

    direction: 'rising' detects sign changes - to +, 'falling' + to -,
    'any' both.
    """

    event_fn: EventFn
    direction: str = "any"
    refine_tol: float = 1e-12

    def __post_init__(self):
        if self.direction not in ("rising", "falling", "any"):
            raise DomainError("direction must be rising, falling, or any")
        if not self.refine_tol > 0:
            raise DomainError("refine_tol must be > 0")


class Trajectory:
    """Accepted integration nodes plus cubic-Hermite dense output.

    Nodes are strictly increasing in t.  Evaluation at a node time returns
    the stored state bitwise; inside a segment the cubic Hermite through the
    segment's end states and derivatives is used, which keeps the dense
    output continuous with continuous first derivative.
    """

    __slots__ = ("ts", "ys", "fs")

    def __init__(self, ts: np.ndarray, ys: np.ndarray, fs: np.ndarray):
        self.ts = np.asarray(ts, dtype=float)
        self.ys = np.asarray(ys, dtype=float)
        self.fs = np.asarray(fs, dtype=float)
        if self.ts.ndim != 1 or len(self.ts) < 1:
            raise DomainError("trajectory needs at least one node")
        if np.any(np.diff(self.ts) <= 0):
            raise DomainError("trajectory nodes must strictly increase")

    @property
    def t_start(self) -> float:
        return float(self.ts[0])

    @property
    def t_end(self) -> float:
        return float(self.ts[-1])

    @property
    def y_end(self) -> np.ndarray:
        return self.ys[-1]

    @property
    def n_nodes(self) -> int:
        return len(self.ts)

    def _segment_index(self, t: float) -> int:
        if t < self.ts[0] or t > self.ts[-1]:
            raise DomainError(
                f"t={t} outside trajectory range [{self.ts[0]}, {self.ts[-1]}]"
            )
        i = int(np.searchsorted(self.ts, t, side="right")) - 1
        return min(max(i, 0), len(self.ts) - 2) if len(self.ts) > 1 else 0

    def state_at(self, t: float) -> np.ndarray:
        """Dense state at time t (bitwise equal to node states at nodes)."""
        i = self._segment_index(t)
        if t == self.ts[i]:
            return self.ys[i].copy()
        if t == self.ts[i + 1]:
            return self.ys[i + 1].copy()
        return _hermite(
            t,
            self.ts[i],
            self.ts[i + 1],
            self.ys[i],
            self.ys[i + 1],
            self.fs[i],
            self.fs[i + 1],
        )

    def derivative_at(self, t: float) -> np.ndarray:
        """Derivative of the dense interpolant at time t."""
        i = self._segment_index(t)
        if t == self.ts[i]:
            return self.fs[i].copy()
        if t == self.ts[i + 1]:
            return self.fs[i + 1].copy()
        return _hermite_deriv(
            t,
            self.ts[i],
            self.ts[i + 1],
            self.ys[i],
            self.ys[i + 1],
            self.fs[i],
            self.fs[i + 1],
        )

    def __call__(self, t: float) -> np.ndarray:
        return self.state_at(t)

    def truncated(self, t_cut: float) -> "Trajectory":
        """Trajectory restricted to [t_start, t_cut], ending exactly at t_cut."""
        if t_cut >= self.t_end:
            return self
        if t_cut <= self.t_start:
            raise DomainError("t_cut must exceed t_start")
        keep = self.ts <= t_cut
        n = int(np.sum(keep))
        if self.ts[n - 1] == t_cut:
            return Trajectory(self.ts[:n], self.ys[:n], self.fs[:n])
        ts = np.append(self.ts[:n], t_cut)
        ys = np.vstack([self.ys[:n], self.state_at(t_cut)])
        fs = np.vstack([self.fs[:n], self.derivative_at(t_cut)])
        return Trajectory(ts, ys, fs)


def _hermite(t, t0, t1, y0, y1, f0, f1):
    h = t1 - t0
    s = (t - t0) / h
    s2 = s * s
    s3 = s2 * s
    return (
        (2 * s3 - 3 * s2 + 1) * y0
        + (s3 - 2 * s2 + s) * h * f0
        + (-2 * s3 + 3 * s2) * y1
        + (s3 - s2) * h * f1
    )


def _hermite_deriv(t, t0, t1, y0, y1, f0, f1):
    h = t1 - t0
    s = (t - t0) / h
    s2 = s * s
    return (
        (6 * s2 - 6 * s) / h * y0
        + (3 * s2 - 4 * s + 1) * f0
        + (-6 * s2 + 6 * s) / h * y1
        + (3 * s2 - 2 * s) * f1
    )


def concat_trajectories(parts: Sequence[Trajectory]) -> Trajectory:
    """Join contiguous trajectories (each starting where the previous ends)."""
    if not parts:
        raise DomainError("no trajectories to concatenate")
    ts = [parts[0].ts]
    ys = [parts[0].ys]
    fs = [parts[0].fs]
    for prev, nxt in zip(parts, parts[1:]):
        if nxt.t_start != prev.t_end:
            raise DomainError("trajectories are not contiguous")
        ts.append(nxt.ts[1:])
        ys.append(nxt.ys[1:])
        fs.append(nxt.fs[1:])
    return Trajectory(np.concatenate(ts), np.vstack(ys), np.vstack(fs))


def integrate(
    rhs: RhsFn, y0: OdeState, t_end: float, config: IntegratorConfig | None = None
) -> Trajectory:
    """Integrate y' = rhs(t, y) from y0.t to t_end with adaptive steps.

    Local error is controlled against atol + rtol*|y| by the embedded 4th
    order solution.  Non-finite right-hand sides or states cause step
    rejection, so integrands may signal domain exits (for example a scale
    factor touching zero) by returning NaN; the run then terminates with
    StepUnderflow at the singular time.

    Raises:
        StepBudgetExceeded: config.max_steps attempted steps reached.
        StateBlowup: a component passed the 1e300 overflow guard.
        StepUnderflow: the step fell below 1e-14 * max(1, |t|).
    """
    cfg = config or IntegratorConfig()
    t = float(y0.t)
    if not t_end > t:
        raise DomainError("t_end must exceed the initial time")
    y = np.array(y0.y, dtype=float)
    f = np.asarray(rhs(t, y), dtype=float)
    if not np.all(np.isfinite(f)):
        raise DomainError("rhs is not finite at the initial state")

    ts = [t]
    ys = [y.copy()]
    fs = [f.copy()]
    k = np.empty((7, y.size))
    k[0] = f

    def make_traj() -> Trajectory:
        return Trajectory(np.array(ts), np.vstack(ys), np.vstack(fs))

    h = min(cfg.h_init, cfg.h_max, t_end - t)
    nsteps = 0
    while t < t_end:
        if h < STEP_UNDERFLOW_REL * max(1.0, abs(t)):
            raise StepUnderflow(
                f"step size {h:.3e} underflowed at t={t!r}", t, make_traj()
            )
        if nsteps >= cfg.max_steps:
            raise StepBudgetExceeded(
                f"exceeded {cfg.max_steps} steps at t={t!r}", t, make_traj()
            )
        nsteps += 1
        hits_end = h >= t_end - t
        h_step = t_end - t if hits_end else h

        bad = False
        for i in range(1, 7):
            yi = y + h_step * (_A_ROWS[i] @ k[:i])
            ki = np.asarray(rhs(t + _C[i] * h_step, yi), dtype=float)
            if not np.all(np.isfinite(ki)):
                bad = True
                break
            k[i] = ki
        if not bad:
            y_new = yi  # stage-7 input equals the 5th-order solution (FSAL)
            err_vec = h_step * (_E_ARR @ k)
            scale = cfg.atol + cfg.rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
            bad = not math.isfinite(err)

        if bad:
            h = 0.1 * h_step
            continue
        if err > 1.0:
            h = h_step * max(0.2, 0.9 * err ** -0.2)
            continue

        t = t_end if hits_end else t + h_step
        y = y_new
        f = k[6].copy()  # derivative at the accepted point, reused as stage 1
        ts.append(t)
        ys.append(y.copy())
        fs.append(f)
        k[0] = f
        if np.any(np.abs(y) > OVERFLOW_GUARD):
            raise StateBlowup(
                f"state exceeded {OVERFLOW_GUARD:.0e} at t={t!r}", t, make_traj()
            )
        grow = 0.9 * err ** -0.2 if err > 0 else 5.0
        h = min(cfg.h_max, h_step * min(5.0, max(0.2, grow)))
    return make_traj()


# ----------------------------------------------------------------------
# Event location
# ----------------------------------------------------------------------

_EVENT_SUBSAMPLES = 8


def detect_events(traj: Trajectory, spec: EventSpec) -> list[float]:
    """Times where the event function crosses zero along the trajectory.

    Each segment of the dense output is subsampled, sign changes are
    bracketed, and each bracket is refined with a bisection/secant hybrid to
    spec.refine_tol.  Results are sorted and deduplicated, so repeated calls
    on the same trajectory return identical times.
    """
    g = lambda t: float(spec.event_fn(t, traj.state_at(t)))
    times: list[float] = []
    for i in range(traj.n_nodes - 1):
        a, b = traj.ts[i], traj.ts[i + 1]
        samples = np.linspace(a, b, _EVENT_SUBSAMPLES)
        vals = [g(t) for t in samples]
        for (ta, ga), (tb, gb) in zip(
            zip(samples, vals), zip(samples[1:], vals[1:])
        ):
            if ga == 0.0:
                dirn = "falling" if gb < 0 else "rising" if gb > 0 else None
                if dirn is not None and spec.direction in ("any", dirn):
                    times.append(float(ta))
            elif ga * gb < 0:
                dirn = "falling" if ga > 0 else "rising"
                if spec.direction in ("any", dirn):
                    times.append(_refine_crossing(g, ta, ga, tb, gb, spec.refine_tol))
    # trailing endpoint zero (interior node zeros are the 'ga == 0' case)
    tl = traj.ts[-1]
    if traj.n_nodes > 1 and g(tl) == 0.0:
        gprev = g(tl - min(spec.refine_tol, (tl - traj.ts[0]) * 1e-6))
        dirn = "falling" if gprev > 0 else "rising" if gprev < 0 else None
        if dirn is not None and spec.direction in ("any", dirn):
            times.append(float(tl))

    times.sort()
    span = traj.t_end - traj.t_start
    merged: list[float] = []
    for t in times:
        if not merged or t - merged[-1] > max(10 * spec.refine_tol, 1e-14 * span):
            merged.append(t)
    return merged


def _refine_crossing(g, ta, ga, tb, gb, tol, max_iter=200):
    """Bracketed root of g on [ta, tb]: secant proposal, bisection fallback."""
    for _ in range(max_iter):
        if tb - ta <= tol:
            break
        tm = tb - gb * (tb - ta) / (gb - ga)
        margin = 0.1 * (tb - ta)
        if not (ta + margin <= tm <= tb - margin):
            tm = 0.5 * (ta + tb)
        gm = g(tm)
        if gm == 0.0:
            return float(tm)
        if (ga > 0) == (gm > 0):
            ta, ga = tm, gm
        else:
            tb, gb = tm, gm
    return float(0.5 * (ta + tb))


# ----------------------------------------------------------------------
# Quadrature
# ----------------------------------------------------------------------

# Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (QUADPACK constants).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])


def _gk15(f, a: float, b: float) -> tuple[float, float]:
    """15-point Kronrod estimate on [a, b] and its error estimate."""
    c = 0.5 * (a + b)
    half = 0.5 * (b - a)
    fc = f(c)
    kron = _WGK[7] * fc
    gauss = _WG[3] * fc
    for j in range(7):
        x = half * _XGK[j]
        fsum = f(c - x) + f(c + x)
        kron += _WGK[j] * fsum
        if j % 2 == 1:
            gauss += _WG[j // 2] * fsum
    kron *= half
    gauss *= half
    err = abs(kron - gauss)
    # standard QUADPACK error sharpening
    if err > 0:
        err = err * min(1.0, (200.0 * err / max(abs(kron), 1e-300)) ** 1.5) + abs(kron) * 1e-16
    return kron, err


_MAX_PANELS = 4096


def quad_adaptive(f, lo: float, hi: float, tol: float = 1e-10) -> tuple[float, float]:
    """Adaptive Gauss-Kronrod integral of a smooth f over [lo, hi].

    Returns (value, error estimate).  Deterministic: panels are processed in
    a fixed order.  Raises NoConvergence when the panel budget is exhausted.
    """
    if hi == lo:
        return 0.0, 0.0
    if hi < lo:
        raise DomainError("quad_adaptive requires hi >= lo")
    total = hi - lo
    stack = [(lo, hi)]
    value = 0.0
    err_acc = 0.0
    panels = 0
    while stack:
        a, b = stack.pop()
        panels += 1
        if panels > _MAX_PANELS:
            raise NoConvergence(
                f"quadrature budget exhausted ({_MAX_PANELS} panels) before tol={tol}"
            )
        val, err = _gk15(f, a, b)
        if err <= tol * (b - a) / total or (b - a) < 1e-14 * total:
            value += val
            err_acc += err
        else:
            m = 0.5 * (a + b)
            stack.append((m, b))
            stack.append((a, m))
    return value, err_acc


def quad_singular_estimate(
    g, lo: float, hi: float, tol: float = 1e-10
) -> tuple[float, float]:
    """Like `quad_singular` but also returns the accumulated error estimate."""
    if hi == lo:
        return 0.0, 0.0
    if hi < lo:
        raise DomainError("quad_singular requires hi >= lo")
    span = hi - lo

    def transformed(theta: float) -> float:
        sin_t = math.sin(theta)
        x = lo + span * sin_t * sin_t
        # endpoints are never hit (Kronrod nodes are interior) but guard anyway
        if x <= lo:
            x = lo + span * 1e-300
        elif x >= hi:
            x = hi - span * 1e-300
        return g(x) * span * math.sin(2 * theta)

    return quad_adaptive(transformed, 0.0, 0.5 * math.pi, tol)


def quad_singular(g, lo: float, hi: float, tol: float = 1e-10) -> float:
    """Integral of g over (lo, hi) allowing |x-endpoint|^(-1/2) singularities.

    The substitution x = lo + (hi-lo)*sin^2(theta) turns an inverse square
    root endpoint singularity into a smooth integrand, which an adaptive
    Gauss-Kronrod rule then resolves to the requested tolerance.
    """
    return quad_singular_estimate(g, lo, hi, tol)[0]
