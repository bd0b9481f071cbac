"""Closed-form spacetime fields (rho, u, Phi_r) for the exact families.

Four families are assembled here:

* the rotating isothermal family: rho = e^f(r/a)/a^2 with uniform swirl
  xi/a^2 on top of the radial stretch a'/a;
* its xi = 0 limit (purely radial velocity, collapsing scale factor);
* the general mass-equation ansatz with an arbitrary swirl profile G(t, r),
  which satisfies continuity for any choice of G, a, f;
* the two-region Zhang-Zheng spiral of the gamma = 2 Euler equations
  (parabolic density inside an expanding circle, constant density outside).

Everything is evaluated pointwise from immutable solution bundles; the
residual verifier consumes these evaluations as a black box.

The inner Zhang-Zheng velocity is handled in two variants.  The
residual-validated default is u = ((x+y)/(2t), (y-x)/(2t)); the
sign-flipped variant u2 = (x-y)/(2t) leaves a nonzero continuity residual
and is kept available, behind an explicit flag, as a negative control.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .emden import EmdenParams, integrate_scale
from .errors import DomainError, OutOfRange, OutsideRegion
from .liouville import LiouvilleParams, LiouvilleProfile, enclosed_mass, solve_profile
from .ode import IntegratorConfig, Trajectory


@dataclass(frozen=True)
class FieldSample:
    """Primitive fields at one spacetime point.

    phi_r is the radial derivative of the gravitational potential; it is
    None for families that solve the pure Euler equations.
    """

    rho: float
    u1: float
    u2: float
    phi_r: float | None = None


@dataclass(frozen=True)
class RotSolution2D:
    """One member of the rotating isothermal family, fully solved."""

    emden: EmdenParams
    liouville: LiouvilleParams
    profile: LiouvilleProfile
    scale: Trajectory
    touchdown_time: float | None = None

    def __post_init__(self):
        if self.emden.lam != self.liouville.lam:
            raise DomainError("scale and profile must share the same lam")


def build_rotational(
    lam: float,
    xi: float,
    K: float,
    alpha: float,
    a0: float,
    a1: float,
    t_max: float,
    s_max: float = 20.0,
    scale_cfg: IntegratorConfig | None = None,
    profile_cfg: IntegratorConfig | None = None,
) -> RotSolution2D:
    """Solve the profile and the scale factor and bundle them for evaluation.

    xi = 0 is allowed and yields the non-rotating family; with lam > 0 that
    trajectory ends at its finite touchdown time instead of t_max.
    """
    emden_p = EmdenParams(lam=lam, xi=xi, a0=a0, a1=a1)
    liouville_p = LiouvilleParams(K=K, lam=lam, alpha=alpha)
    profile = solve_profile(liouville_p, s_max, profile_cfg)
    scale_cfg = scale_cfg or IntegratorConfig(
        rtol=1e-12, atol=1e-14, h_init=1e-4, h_max=0.01
    )
    run = integrate_scale(emden_p, t_max, scale_cfg)
    return RotSolution2D(
        emden=emden_p,
        liouville=liouville_p,
        profile=profile,
        scale=run.trajectory,
        touchdown_time=run.touchdown_time,
    )


def _scale_at(sol: RotSolution2D, t: float) -> tuple[float, float]:
    if t < sol.scale.t_start or t > sol.scale.t_end:
        raise OutOfRange(
            f"t={t} outside solved range [{sol.scale.t_start}, {sol.scale.t_end}]"
        )
    a, adot = sol.scale.state_at(t)
    return float(a), float(adot)


def eval_rotational(sol: RotSolution2D, t: float, x: float, y: float) -> FieldSample:
    """rho = e^f(r/a)/a^2, u = (a'/a) x_vec + (xi/a^2) x_vec_perp, plus Phi_r."""
    a, adot = _scale_at(sol, t)
    r = math.hypot(x, y)
    s = r / a
    if s > sol.profile.s_max:
        raise OutOfRange(f"r/a = {s} beyond solved profile range {sol.profile.s_max}")
    rho = math.exp(sol.profile.f_at(s)) / (a * a)
    stretch = adot / a
    swirl = sol.emden.xi / (a * a)
    u1 = stretch * x - swirl * y
    u2 = swirl * x + stretch * y
    phi_r = eval_gravity_radial(sol, t, r) if r > 0 else 0.0
    return FieldSample(rho=rho, u1=u1, u2=u2, phi_r=phi_r)


def eval_gravity_radial(sol: RotSolution2D, t: float, r: float) -> float:
    """Phi_r(t, r) = (2*pi/r) * integral_0^r rho(t, eta) eta deta.

    Computed as enclosed_mass(profile, r/a) / r via quadrature on the dense
    profile (the scale factor cancels in the radial substitution).
    """
    if not r > 0:
        raise DomainError("gravity evaluation requires r > 0")
    a, _ = _scale_at(sol, t)
    s = r / a
    if s > sol.profile.s_max:
        raise OutOfRange(f"r/a = {s} beyond solved profile range {sol.profile.s_max}")
    return enclosed_mass(sol.profile, s) / r


def gravity_radial_two_ways(
    sol: RotSolution2D, t: float, r: float
) -> tuple[float, float]:
    """Phi_r by quadrature and by the enclosed-mass identity, for cross-checks.

    The identity route is (lam*s - K*f'(s))/a at s = r/a; agreement of the
    two is an end-to-end check of the profile solve.
    """
    if not r > 0:
        raise DomainError("gravity evaluation requires r > 0")
    a, _ = _scale_at(sol, t)
    s = r / a
    p = sol.liouville
    quad_route = enclosed_mass(sol.profile, s) / r
    identity_route = (p.lam * s - p.K * sol.profile.fdot_at(s)) / a
    return quad_route, identity_route


# ----------------------------------------------------------------------
# General continuity ansatz with arbitrary swirl
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SwirlAnsatz:
    """rho = f(r/a)/a^2 with u = (a'/a) x_vec + (G(t,r)/r) x_vec_perp.

    Satisfies the continuity equation for any C^1 choices of f >= 0,
    a > 0 and swirl G; exists to property-test exactly that.
    """

    f_profile: Callable[[float], float]
    a_fn: Callable[[float], float]
    adot_fn: Callable[[float], float]
    G_fn: Callable[[float, float], float]


def eval_swirl_ansatz(ansatz: SwirlAnsatz, t: float, x: float, y: float) -> FieldSample:
    """Pointwise fields of the ansatz; the swirl term is defined as 0 at r = 0."""
    a = ansatz.a_fn(t)
    if not a > 0:
        raise DomainError(f"a(t) must stay positive (got {a} at t={t})")
    adot = ansatz.adot_fn(t)
    r = math.hypot(x, y)
    rho = ansatz.f_profile(r / a) / (a * a)
    stretch = adot / a
    swirl = ansatz.G_fn(t, r) / r if r > 0 else 0.0
    return FieldSample(rho=rho, u1=stretch * x - swirl * y, u2=swirl * x + stretch * y)


# ----------------------------------------------------------------------
# Zhang-Zheng spiral (gamma = 2 Euler, no gravity)
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ZZSolution:
    """Parameters of the two-region spiral: P = K*rho^2 and outer density rho0."""

    K: float
    rho0: float

    def __post_init__(self):
        if not self.K > 0:
            raise DomainError("K must be > 0")
        if not self.rho0 > 0:
            raise DomainError("rho0 must be > 0")

    @property
    def pdot0(self) -> float:
        """P'(rho0) = 2*K*rho0 for the quadratic pressure law."""
        return 2.0 * self.K * self.rho0


def zz_interface_radius(zz: ZZSolution, t: float) -> float:
    """Radius 2*t*sqrt(P'(rho0)) of the expanding interface circle."""
    if t < 0:
        raise DomainError("interface radius requires t >= 0")
    return 2.0 * t * math.sqrt(zz.pdot0)


def eval_zz_inner(
    zz: ZZSolution, t: float, x: float, y: float, as_printed: bool = False
) -> FieldSample:
    """Inner region (r <= interface): rho = r^2/(8Kt^2), shear-rotation velocity.

    as_printed=True selects the u2 = (x-y)/(2t) variant, which fails the
    continuity check; it exists solely as a negative control.
    """
    if not t > 0:
        raise DomainError("inner region requires t > 0")
    r = math.hypot(x, y)
    if r > zz_interface_radius(zz, t):
        raise OutsideRegion(f"r={r} beyond interface at t={t}")
    rho = r * r / (8.0 * zz.K * t * t)
    u1 = (x + y) / (2.0 * t)
    u2 = (x - y) / (2.0 * t) if as_printed else (y - x) / (2.0 * t)
    return FieldSample(rho=rho, u1=u1, u2=u2)


def eval_zz_outer(zz: ZZSolution, t: float, x: float, y: float) -> FieldSample:
    """Outer region (r > interface): constant density, swirling free flow."""
    if t < 0:
        raise DomainError("outer region requires t >= 0")
    r = math.hypot(x, y)
    if r <= zz_interface_radius(zz, t):
        raise OutsideRegion(f"r={r} inside interface at t={t}")
    pd = zz.pdot0
    cos_t, sin_t = x / r, y / r
    tang = math.sqrt(2.0 * pd) * math.sqrt(r * r - 2.0 * t * t * pd)
    u1 = (2.0 * t * pd * cos_t + tang * sin_t) / r
    u2 = (2.0 * t * pd * sin_t - tang * cos_t) / r
    return FieldSample(rho=zz.rho0, u1=u1, u2=u2)
