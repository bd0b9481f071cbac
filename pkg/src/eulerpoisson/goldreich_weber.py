"""Goldreich-Weber style profiles and scale dynamics in dimension N >= 3.

The radial profile obeys

    f'' + (N-1)/s * f' + alpha(N)/((2N-2)K) * f^(N/(N-2)) = N(N-2)*lam / ((2N-2)K)

with f(0) = alpha_center > 0, f'(0) = 0, and (unlike the 2D isothermal
family) reaches a first zero S_mu where the density touches down, so the
star has compact support.  The companion scale factor obeys
a'' = -lam / a^(N-1).

alpha(N) is the dimension constant tied to the volume of the unit ball:
alpha(1) = 2, alpha(2) = 2*pi, alpha(N) = N(N-2)*V(N) for N >= 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .emden import ScaleRun
from .errors import (
    DomainError,
    NoCompactSupport,
    NonRealPower,
    StateBlowup,
    StepUnderflow,
)
from .ode import (
    EventSpec,
    IntegratorConfig,
    OdeState,
    Trajectory,
    concat_trajectories,
    detect_events,
    integrate,
)

_S0 = 1e-6
S_CAP_DEFAULT = 100.0


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n, pi^(n/2) / Gamma(n/2 + 1)."""
    if n < 1:
        raise DomainError("dimension must be >= 1")
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def alpha_const(n: int) -> float:
    """Gravitational coupling constant: 2, 2*pi, then N(N-2)*V(N) for N >= 3."""
    if n < 1:
        raise DomainError("dimension must be >= 1")
    if n == 1:
        return 2.0
    if n == 2:
        return 2 * math.pi
    return n * (n - 2) * unit_ball_volume(n)


@dataclass(frozen=True)
class GWParams:
    """Dimension N >= 3, pressure constant K > 0, gravity strength lam,
    central profile value alpha_center > 0, and scale initial data."""

    N: int
    K: float
    lam: float
    alpha_center: float
    a0: float = 1.0
    a1: float = 0.0

    def __post_init__(self):
        if self.N < 3:
            raise DomainError("N must be >= 3")
        if not self.K > 0:
            raise DomainError("K must be > 0")
        if not self.alpha_center > 0:
            raise DomainError("alpha_center must be > 0")
        if not self.a0 > 0:
            raise DomainError("a0 must be > 0")
        vals = (self.K, self.lam, self.alpha_center, self.a0, self.a1)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError("all parameters must be finite")


class GWProfile:
    """Profile on (0, s_mu] (or (0, s_cap] when no zero exists)."""

    def __init__(
        self,
        params: GWParams,
        traj: Trajectory,
        s0: float,
        series_c: float,
        s_mu: float | None,
    ):
        self.params = params
        self.traj = traj
        self.s0 = s0
        self.series_c = series_c
        self.s_mu = s_mu

    @property
    def grid(self) -> np.ndarray:
        return self.traj.ts

    @property
    def f(self) -> np.ndarray:
        return self.traj.ys[:, 0]

    @property
    def fdot(self) -> np.ndarray:
        return self.traj.ys[:, 1]

    @property
    def s_max(self) -> float:
        return self.traj.t_end

    def f_at(self, s: float) -> float:
        if s < 0 or s > self.s_max:
            raise DomainError(f"s={s} outside (0, {self.s_max}]")
        if s <= self.s0:
            return self.params.alpha_center + self.series_c * s * s
        return float(self.traj.state_at(s)[0])

    def fdot_at(self, s: float) -> float:
        if s < 0 or s > self.s_max:
            raise DomainError(f"s={s} outside (0, {self.s_max}]")
        if s <= self.s0:
            return 2 * self.series_c * s
        return float(self.traj.state_at(s)[1])


def gw_series_coefficient(p: GWParams) -> float:
    """Quadratic center-series coefficient, from matching the s -> 0 limit.

    Substituting f = alpha + c*s^2 gives f'' + (N-1)f'/s -> 2Nc, so
    2Nc + gravity(alpha) = forcing.
    """
    a_n = alpha_const(p.N)
    denom = (2 * p.N - 2) * p.K
    forcing = p.N * (p.N - 2) * p.lam / denom
    gravity = a_n / denom * p.alpha_center ** (p.N / (p.N - 2))
    return (forcing - gravity) / (2 * p.N)


def solve_gw_profile(
    p: GWParams,
    cfg: IntegratorConfig | None = None,
    s_cap: float = S_CAP_DEFAULT,
) -> GWProfile:
    """Integrate the profile outward, stopping at the first zero of f.

    The right-hand side clamps f below zero (the fractional power would
    otherwise leave the reals), which only matters for trial stages beyond
    the zero; the profile itself is truncated exactly at the event.  With no
    zero before s_cap the full trajectory is kept and s_mu is absent.
    """
    cfg = cfg or IntegratorConfig(rtol=1e-12, atol=1e-14, h_init=1e-4, h_max=0.01)
    power = p.N / (p.N - 2)
    denom = (2 * p.N - 2) * p.K
    forcing = p.N * (p.N - 2) * p.lam / denom
    grav = alpha_const(p.N) / denom
    nm1 = p.N - 1
    c = gw_series_coefficient(p)
    s0 = min(_S0, 0.5 * s_cap)

    def rhs(s: float, y: np.ndarray) -> np.ndarray:
        f = y[0] if y[0] > 0.0 else 0.0
        return np.array([y[1], forcing - grav * f**power - nm1 * y[1] / s])

    spec = EventSpec(lambda s, y: y[0], direction="falling", refine_tol=1e-13)
    parts: list[Trajectory] = []
    state = OdeState(s0, np.array([p.alpha_center + c * s0 * s0, 2 * c * s0]))
    target = 1.0
    while True:
        traj = integrate(rhs, state, min(target, s_cap), cfg)
        parts.append(traj)
        if np.any(traj.ys[:, 0] <= 0.0):
            break
        if traj.t_end >= s_cap:
            break
        state = OdeState(traj.t_end, traj.y_end)
        target *= 2.0

    full = concat_trajectories(parts)
    zeros = detect_events(full, spec)
    if zeros:
        s_mu = zeros[0]
        return GWProfile(p, full.truncated(s_mu), s0, c, s_mu)
    return GWProfile(p, full, s0, c, None)


def integrate_gw_scale(
    p: GWParams, t_end: float, cfg: IntegratorConfig | None = None
) -> ScaleRun:
    """Trajectory of the scale factor under a'' = -lam / a^(N-1).

    For lam > 0 the collapse reaches a = 0 in finite time; like the 2D case
    the halt time is reported as the touchdown time.
    """
    if not t_end > 0:
        raise DomainError("t_end must be > 0")
    cfg = cfg or IntegratorConfig()
    lam, nm1 = p.lam, p.N - 1

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        a = y[0]
        if a <= 0.0:
            return np.array([math.nan, math.nan])
        return np.array([y[1], -lam / a**nm1])

    try:
        traj = integrate(rhs, OdeState(0.0, np.array([p.a0, p.a1])), t_end, cfg)
        return ScaleRun(trajectory=traj, touchdown_time=None)
    except (StepUnderflow, StateBlowup) as halt:
        if halt.trajectory is None or halt.trajectory.y_end[0] > 1e-6 * p.a0:
            raise
        return ScaleRun(trajectory=halt.trajectory, touchdown_time=halt.t)


def gw_density(prof: GWProfile, a: float, r: float) -> float:
    """Density f(r/a)^(N/(N-2)) / a^N inside the support, exactly 0 outside."""
    if not a > 0:
        raise DomainError("scale factor a must be > 0")
    if r < 0:
        raise DomainError("radius r must be >= 0")
    p = prof.params
    s = r / a
    if prof.s_mu is not None:
        if s >= prof.s_mu:
            return 0.0
    elif s > prof.s_max:
        raise NoCompactSupport(
            f"profile has no first zero and s={s} exceeds the solved range"
        )
    f = prof.f_at(s)
    if f < -1e-9:
        raise NonRealPower(f"profile value f={f} < 0 at s={s}")
    return max(f, 0.0) ** (p.N / (p.N - 2)) / a**p.N
