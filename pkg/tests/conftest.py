"""Shared fixtures: expensive solution bundles are built once per session."""

import math

import numpy as np
import pytest

from eulerpoisson.emden import EmdenParams
from eulerpoisson.fields import ZZSolution, build_rotational
from eulerpoisson.ode import IntegratorConfig


@pytest.fixture(scope="session")
def unit_orbit():
    """The canonical periodic configuration: lam = xi = a0 = a1 = 1."""
    return EmdenParams(lam=1.0, xi=1.0, a0=1.0, a1=1.0)


@pytest.fixture(scope="session")
def rot_solution():
    """Rotating isothermal solution bundle used by field and residual tests."""
    return build_rotational(
        lam=1.0, xi=1.0, K=1.0, alpha=0.0, a0=1.0, a1=1.0, t_max=2.5
    )


@pytest.fixture(scope="session")
def zz():
    return ZZSolution(K=1.0, rho0=0.5)


@pytest.fixture(scope="session")
def tight_cfg():
    return IntegratorConfig(rtol=1e-12, atol=1e-14)


def disk_points(rng, n, t_range, r_range):
    """n random (t, x, y) samples in a time slab times an annulus."""
    pts = []
    for _ in range(n):
        t = rng.uniform(*t_range)
        r = rng.uniform(*r_range)
        ang = rng.uniform(0.0, 2 * math.pi)
        pts.append((float(t), float(r * math.cos(ang)), float(r * math.sin(ang))))
    return pts


@pytest.fixture()
def rng():
    return np.random.default_rng(42)
