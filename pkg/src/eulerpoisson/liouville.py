"""Radial log-density profile f(s) with f'' + f'/s + (2*pi/K)*e^f = 2*lam/K.

The origin is a regular singular point (the f'/s term), so integration
starts at s0 = 1e-6 from the series f = alpha + c*s^2 with
c = (lam - pi*e^alpha) / (2K), the unique coefficient compatible with
f(0) = alpha, f'(0) = 0.

Integrating s * (the ODE) from 0 gives the enclosed-mass identity

    2*pi * integral_0^s e^f(tau) tau dtau = lam*s^2 - K*s*f'(s),

which is exactly what makes the radial momentum balance of the assembled
fields vanish.  `enclosed_mass` deliberately computes the left side by
quadrature over the dense solution so the identity stays an independent
check rather than a tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, OutOfRange
from .ode import (
    IntegratorConfig,
    OdeState,
    Trajectory,
    _WGK,
    _XGK,
    integrate,
)

_S0_DEFAULT = 1e-6


@dataclass(frozen=True)
class LiouvilleParams:
    """Pressure constant K > 0, gravity strength lam, central log-density alpha."""

    K: float
    lam: float
    alpha: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.K, self.lam, self.alpha)):
            raise DomainError("all parameters must be finite")
        if not self.K > 0:
            raise DomainError("K must be > 0")


def series_coefficient(p: LiouvilleParams) -> float:
    """Quadratic coefficient of the center expansion f = alpha + c*s^2."""
    return (p.lam - math.pi * math.exp(p.alpha)) / (2 * p.K)


class LiouvilleProfile:
    """Solved profile: dense (f, f') on (0, s_max] plus the center series."""

    def __init__(
        self, params: LiouvilleParams, traj: Trajectory, s0: float, series_c: float
    ):
        self.params = params
        self.traj = traj
        self.s0 = s0
        self.series_c = series_c
        self._node_mass: np.ndarray | None = None

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
            raise OutOfRange(f"s={s} outside (0, {self.s_max}]")
        if s <= self.s0:
            return self.params.alpha + self.series_c * s * s
        return float(self.traj.state_at(s)[0])

    def fdot_at(self, s: float) -> float:
        if s < 0 or s > self.s_max:
            raise OutOfRange(f"s={s} outside (0, {self.s_max}]")
        if s <= self.s0:
            return 2 * self.series_c * s
        return float(self.traj.state_at(s)[1])

    def _series_mass(self, s: float) -> float:
        # 2*pi * integral_0^s exp(alpha + c*tau^2) tau dtau, closed form;
        # expm1 avoids cancellation for s near zero
        a, c = self.params.alpha, self.series_c
        if c == 0.0:
            return math.pi * math.exp(a) * s * s
        return (math.pi / c) * math.exp(a) * math.expm1(c * s * s)

    def _mass_at_nodes(self) -> np.ndarray:
        """Cumulative 2*pi*integral e^f tau dtau at the grid nodes.

        One 15-point Kronrod panel per integration segment, evaluated on the
        dense cubic-Hermite interpolant; panels are far shorter than the
        integrand's variation scale, so each is accurate to roundoff.
        """
        if self._node_mass is not None:
            return self._node_mass
        ts, ys, fs = self.traj.ts, self.traj.ys, self.traj.fs
        t0, t1 = ts[:-1, None], ts[1:, None]
        half = 0.5 * (t1 - t0)
        mid = 0.5 * (t1 + t0)
        x = np.concatenate([-_XGK[:-1][::-1], _XGK[::-1]])  # 15 ordered abscissas
        w = np.concatenate([_WGK[:-1][::-1], _WGK[::-1]])
        tau = mid + half * x  # (nseg, 15)
        u = (tau - t0) / (t1 - t0)
        u2, u3 = u * u, u**3
        h = t1 - t0
        fval = (
            (2 * u3 - 3 * u2 + 1) * ys[:-1, 0, None]
            + (u3 - 2 * u2 + u) * h * fs[:-1, 0, None]
            + (-2 * u3 + 3 * u2) * ys[1:, 0, None]
            + (u3 - u2) * h * fs[1:, 0, None]
        )
        seg = 2 * math.pi * np.sum(w * np.exp(fval) * tau, axis=1) * half[:, 0]
        mass = np.empty(len(ts))
        mass[0] = self._series_mass(float(ts[0]))
        np.cumsum(seg, out=mass[1:])
        mass[1:] += mass[0]
        self._node_mass = mass
        return mass


def solve_profile(
    p: LiouvilleParams, s_max: float, cfg: IntegratorConfig | None = None
) -> LiouvilleProfile:
    """Integrate the profile from the series start at s0 = 1e-6 out to s_max."""
    if not s_max > 0:
        raise DomainError("s_max must be > 0")
    # the 0.005 step cap keeps the dense interpolant accurate enough that a
    # finite-difference residual check can reach 1e-8
    cfg = cfg or IntegratorConfig(rtol=1e-12, atol=1e-14, h_init=1e-4, h_max=0.005)
    s0 = min(_S0_DEFAULT, 0.5 * s_max)
    c = series_coefficient(p)
    y0 = np.array([p.alpha + c * s0 * s0, 2 * c * s0])
    two_lam_over_k = 2 * p.lam / p.K
    two_pi_over_k = 2 * math.pi / p.K

    def rhs(s: float, y: np.ndarray) -> np.ndarray:
        return np.array(
            [y[1], two_lam_over_k - two_pi_over_k * math.exp(y[0]) - y[1] / s]
        )

    traj = integrate(rhs, OdeState(s0, y0), s_max, cfg)
    return LiouvilleProfile(p, traj, s0, c)


def enclosed_mass(prof: LiouvilleProfile, s: float) -> float:
    """2*pi * integral_0^s e^f(tau) tau dtau via quadrature on the dense profile."""
    if not 0 < s <= prof.s_max:
        raise OutOfRange(f"s={s} outside (0, {prof.s_max}]")
    if s <= prof.s0:
        return prof._series_mass(s)
    mass = prof._mass_at_nodes()
    ts = prof.traj.ts
    i = int(np.searchsorted(ts, s, side="right")) - 1
    i = min(i, len(ts) - 1)
    if ts[i] == s:
        return float(mass[i])
    val = _gk15_dense_mass(prof, float(ts[i]), s)
    return float(mass[i] + val)


def _gk15_dense_mass(prof: LiouvilleProfile, a: float, b: float) -> float:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    total = _WGK[7] * math.exp(prof.f_at(mid)) * mid
    for j in range(7):
        x = half * float(_XGK[j])
        for tau in (mid - x, mid + x):
            total += float(_WGK[j]) * math.exp(prof.f_at(tau)) * tau
    return 2 * math.pi * total * half


def momentum_bracket(prof: LiouvilleProfile, s: float) -> float:
    """-lam*s + K*f'(s) + enclosed_mass(s)/s; zero for an exact profile."""
    if not 0 < s <= prof.s_max:
        raise OutOfRange(f"s={s} outside (0, {prof.s_max}]")
    p = prof.params
    return -p.lam * s + p.K * prof.fdot_at(s) + enclosed_mass(prof, s) / s


def mass_identity_residual(prof: LiouvilleProfile, s: float) -> float:
    """|2*pi*integral e^f tau dtau - (lam*s^2 - K*s*f'(s))| at radius s."""
    if not 0 < s <= prof.s_max:
        raise OutOfRange(f"s={s} outside (0, {prof.s_max}]")
    p = prof.params
    return abs(enclosed_mass(prof, s) - (p.lam * s * s - p.K * s * prof.fdot_at(s)))
