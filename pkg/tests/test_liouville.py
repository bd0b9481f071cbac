"""Radial profile solver, the enclosed-mass identity, and its negative control.

Two independent oracles pin the solver: the constant solution f = 0 at
lam = pi*e^alpha, and the closed-form zero-gravity-support solution
f(s) = alpha - 2*ln(1 + beta^2 s^2) with beta^2 = pi*e^alpha/(4K), valid
whenever lam = 0.
"""

import math

import numpy as np
import pytest

from eulerpoisson.errors import DomainError, OutOfRange
from eulerpoisson.liouville import (
    LiouvilleParams,
    LiouvilleProfile,
    enclosed_mass,
    mass_identity_residual,
    momentum_bracket,
    series_coefficient,
    solve_profile,
)
from eulerpoisson.ode import Trajectory


def closed_form_lam0(s, K, alpha):
    b2 = math.pi * math.exp(alpha) / (4 * K)
    return alpha - 2 * math.log(1 + b2 * s * s)


@pytest.fixture(scope="module")
def constant_profile():
    return solve_profile(LiouvilleParams(K=1.0, lam=math.pi, alpha=0.0), 20.0)


@pytest.fixture(scope="module")
def unit_profile():
    return solve_profile(LiouvilleParams(K=1.0, lam=1.0, alpha=0.0), 20.0)


class TestSolveProfile:
    def test_constant_solution(self, constant_profile):
        assert np.abs(constant_profile.f).max() == 0.0
        assert np.abs(constant_profile.fdot).max() == 0.0

    def test_series_coefficient_balances(self):
        assert series_coefficient(LiouvilleParams(K=1.0, lam=math.pi, alpha=0.0)) == 0.0
        c = series_coefficient(LiouvilleParams(K=2.0, lam=1.0, alpha=0.0))
        assert c == pytest.approx((1.0 - math.pi) / 4.0, rel=1e-15)

    @pytest.mark.parametrize("K,alpha", [(1.0, 0.0), (2.0, 0.5)])
    def test_zero_gravity_support_closed_form(self, K, alpha):
        prof = solve_profile(LiouvilleParams(K=K, lam=0.0, alpha=alpha), 20.0)
        for s in (0.5, 1.0, 5.0, 19.0):
            assert prof.f_at(s) == pytest.approx(
                closed_form_lam0(s, K, alpha), abs=1e-9
            )

    def test_pure_self_gravity_decreases(self):
        prof = solve_profile(LiouvilleParams(K=1.0, lam=0.0, alpha=0.0), 10.0)
        assert np.all(prof.fdot[1:] < 0)
        assert np.all(np.diff(prof.f) < 0)

    def test_ode_residual_from_dense_derivative(self, unit_profile):
        # reconstruct f'' by centered differences of the dense f' and check
        # the equation; second-order convergence in the sampling step
        p = unit_profile.params
        norms = []
        for h in (4e-3, 2e-3, 1e-3):
            res = []
            for s in np.linspace(0.5, 15.0, 40):
                fpp = (unit_profile.fdot_at(s + h) - unit_profile.fdot_at(s - h)) / (2 * h)
                res.append(
                    fpp
                    + unit_profile.fdot_at(s) / s
                    + (2 * math.pi / p.K) * math.exp(unit_profile.f_at(s))
                    - 2 * p.lam / p.K
                )
            norms.append(max(abs(r) for r in res))
        order = np.polyfit(np.log([4e-3, 2e-3, 1e-3]), np.log(norms), 1)[0]
        assert 1.8 <= order <= 2.2
        # at h = 1e-4 the node-level residual reaches the contract bound
        res = []
        for s in np.linspace(0.5, 15.0, 40):
            h = 1e-4
            fpp = (unit_profile.fdot_at(s + h) - unit_profile.fdot_at(s - h)) / (2 * h)
            res.append(
                fpp
                + unit_profile.fdot_at(s) / s
                + 2 * math.pi * math.exp(unit_profile.f_at(s))
                - 2.0
            )
        assert max(abs(r) for r in res) <= 1e-8

    def test_alpha_monotonicity_near_center(self):
        # continuity of the flow in alpha: larger alpha, larger e^f at s=0.1
        vals = []
        for alpha in (0.0, 0.1):
            prof = solve_profile(LiouvilleParams(K=1.0, lam=1.0, alpha=alpha), 0.5)
            vals.append(math.exp(prof.f_at(0.1)))
        assert vals[1] > vals[0]

    def test_domain_validation(self):
        with pytest.raises(DomainError):
            solve_profile(LiouvilleParams(K=1.0, lam=1.0, alpha=0.0), 0.0)
        with pytest.raises(DomainError):
            LiouvilleParams(K=0.0, lam=1.0, alpha=0.0)


class TestEnclosedMass:
    def test_constant_profile_analytic(self, constant_profile):
        for s in (0.5, 1.0, 2.0, 10.0):
            assert enclosed_mass(constant_profile, s) == pytest.approx(
                math.pi * s * s, rel=1e-12
            )

    def test_small_s_leading_order(self, unit_profile):
        alpha = unit_profile.params.alpha
        for s in (1e-8, 1e-7):
            assert enclosed_mass(unit_profile, s) == pytest.approx(
                math.pi * math.exp(alpha) * s * s, rel=1e-10
            )

    def test_matches_identity(self, unit_profile):
        p = unit_profile.params
        s = 1.0
        rhs = p.lam * s * s - p.K * s * unit_profile.fdot_at(s)
        assert abs(enclosed_mass(unit_profile, s) - rhs) <= 1e-8

    def test_out_of_range(self, unit_profile):
        with pytest.raises(OutOfRange):
            enclosed_mass(unit_profile, 25.0)
        with pytest.raises(OutOfRange):
            enclosed_mass(unit_profile, 0.0)


class TestMomentumBracket:
    def test_constant_profile_is_exactly_balanced(self, constant_profile):
        assert momentum_bracket(constant_profile, 1.0) == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize("s", [0.1, 1.0, 5.0])
    def test_solved_profile_balances(self, unit_profile, s):
        assert abs(momentum_bracket(unit_profile, s)) <= 1e-8

    def test_perturbed_profile_fails(self, unit_profile):
        # shift f by 0.01: no longer a solution, the bracket must detect it
        traj = unit_profile.traj
        fake = LiouvilleProfile(
            unit_profile.params,
            Trajectory(traj.ts, traj.ys + np.array([0.01, 0.0]), traj.fs),
            unit_profile.s0,
            unit_profile.series_c,
        )
        worst = max(abs(momentum_bracket(fake, s)) for s in (1.0, 3.0, 10.0))
        assert worst > 1e-4


class TestMassIdentity:
    def test_constant_profile(self, constant_profile):
        for s in (0.3, 1.0, 7.0):
            assert mass_identity_residual(constant_profile, s) <= 1e-12

    def test_solved_profile(self):
        prof = solve_profile(LiouvilleParams(K=2.0, lam=1.0, alpha=0.5), 5.0)
        assert mass_identity_residual(prof, 3.0) <= 1e-8

    def test_series_start_is_consistent(self, unit_profile):
        assert mass_identity_residual(unit_profile, unit_profile.s0) <= 1e-12

    def test_equals_scaled_bracket(self, unit_profile):
        for s in (0.5, 2.0):
            assert mass_identity_residual(unit_profile, s) == pytest.approx(
                abs(s * momentum_bracket(unit_profile, s)), rel=1e-12
            )

    @pytest.mark.parametrize("lam", [1.0, 2.0])
    @pytest.mark.parametrize("K", [1.0, 2.0])
    @pytest.mark.parametrize("alpha", [-0.5, 0.0, 0.5])
    def test_identity_over_full_grid(self, lam, K, alpha):
        prof = solve_profile(LiouvilleParams(K=K, lam=lam, alpha=alpha), 20.0)
        mass = prof._mass_at_nodes()
        residual = np.abs(mass - (lam * prof.grid**2 - K * prof.grid * prof.fdot))
        assert residual.max() <= 1e-8
