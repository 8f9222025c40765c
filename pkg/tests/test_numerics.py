import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from epi_lab import Gaussian, GaussianMixture, Laplace, Logistic, numerics as nm
from epi_lab.dist import DomainError

from conftest import FAMILIES, HALF_LOG_2PI_E


def phi(x, var=1.0):
    return np.exp(-0.5 * x * x / var) / math.sqrt(2 * math.pi * var)


# ------------------------------------------------------------- quadrature

def test_integrate_examples():
    assert nm.integrate_1d(lambda x: x, 0, 1).value == pytest.approx(0.5, abs=1e-12)
    assert nm.integrate_1d(phi, -12, 12).value == pytest.approx(1.0, abs=1e-12)
    h = nm.integrate_1d(lambda x: -phi(x) * math.log(phi(x)), -12, 12)
    assert h.value == pytest.approx(HALF_LOG_2PI_E, abs=1e-10)
    assert h.err_estimate >= 0 and h.evaluations > 0


def test_integrate_domain_errors():
    with pytest.raises(DomainError):
        nm.integrate_1d(phi, 1, 1)
    with pytest.raises(DomainError):
        nm.integrate_1d(phi, 0, 1, tol=0)


def test_integrate_reports_partial_on_failure():
    with pytest.raises(nm.QuadratureError) as info:
        nm.integrate_1d(lambda x: math.sin(1 / x) / x, 1e-9, 1, tol=1e-14, limit=5)
    assert isinstance(info.value.partial, nm.QuadratureResult)


def test_gauss_hermite_moments():
    assert nm.gauss_hermite_expect_2d(lambda x, y: 1.0, 1.0, 2.0) == pytest.approx(1.0, abs=1e-13)
    assert nm.gauss_hermite_expect_2d(lambda x, y: x * x, 1.0, 3.0) == pytest.approx(1.0, abs=1e-12)
    assert nm.gauss_hermite_expect_2d(lambda x, y: y ** 4, 1.0, 2.0) == pytest.approx(48.0, rel=1e-12)
    assert nm.gauss_hermite_expect_1d(lambda x: x * x, 2.0) == pytest.approx(4.0, rel=1e-12)


def test_gauss_hermite_log_cosh_against_monte_carlo():
    gh = nm.gauss_hermite_expect_2d(lambda x, y: np.log(np.cosh(x + y)), 1.0, 1.0)
    rng = np.random.default_rng(11)
    s = rng.standard_normal(10_000_000) * math.sqrt(2.0)
    vals = np.log(np.cosh(s))
    se = vals.std() / math.sqrt(len(vals))
    assert abs(gh - vals.mean()) < 3 * se


def test_gauss_hermite_needs_nodes():
    with pytest.raises(DomainError):
        nm.gauss_hermite_expect_2d(lambda x, y: 1.0, 1.0, 1.0, nodes=16)


def test_gauss_hermite_rejects_nonfinite_integrand():
    with pytest.raises(FloatingPointError), np.errstate(divide="ignore"):
        nm.gauss_hermite_expect_2d(lambda x, y: np.log(x * 0.0), 1.0, 1.0)


def test_panel_rule_integrates_kinked_function():
    # E|X| = sqrt(2/pi): the kink at 0 sits on a panel edge
    r = nm.gaussian_panel_rule(1.0, breaks=[0.0])
    assert r.weights @ np.abs(r.nodes) == pytest.approx(math.sqrt(2 / math.pi), abs=1e-13)
    assert r.weights.sum() == pytest.approx(1.0, abs=1e-13)


# ------------------------------------------------------------------ grids

@pytest.mark.parametrize("var", [0.25, 1.0, 4.0, 16.0])
def test_gaussian_grid_entropy(var):
    g = nm.grid_density(Gaussian(var))
    assert g.mass == pytest.approx(1.0, abs=1e-10)
    h, err = g.entropy()
    assert h == pytest.approx(0.5 * math.log(2 * math.pi * math.e * var), abs=1e-7)
    assert err < 1e-7


def test_grid_entropy_laplace_and_logistic():
    h, err = nm.grid_density(Laplace(1.0)).entropy()
    assert h == pytest.approx(1 + math.log(2), abs=1e-6)
    assert err >= abs(h - 1 - math.log(2))
    h, _ = nm.grid_density(Logistic(1.0)).entropy()
    assert h == pytest.approx(2.0, abs=1e-6)


def test_grid_origin_is_a_node():
    g = nm.grid_density(Gaussian(1.0))
    assert np.min(np.abs(g.x)) == 0.0
    assert g.values[np.argmin(np.abs(g.x))] == pytest.approx(phi(0.0))


@pytest.mark.parametrize("n", [1000, 2048, 5000])
def test_grid_size_validated(n):
    with pytest.raises(DomainError):
        nm.grid_density(Gaussian(1.0), n=n)


def test_grid_tail_mass_error():
    with pytest.raises(nm.TailMassError):
        nm.grid_density(Laplace(1.0), half_width_sigmas=4.0)


def test_grid_values_read_only_and_nonnegative():
    g = nm.GridDensity.from_values(0.0, 0.1, np.full(2048, -1.0))
    assert np.all(g.values == 0)
    with pytest.raises(ValueError):
        g.values[0] = 1.0
    with pytest.raises(DomainError):
        nm.GridDensity.from_values(0.0, 0.1, np.ones(100))


# ------------------------------------------------------------ convolution

def test_gaussian_self_convolution():
    g = nm.grid_density(Gaussian(1.0), half_width_sigmas=12)
    c = nm.convolve(g, g)
    assert np.max(np.abs(c.values - phi(c.x, 2.0))) < 1e-8
    assert c.mass == pytest.approx(1.0, abs=1e-8)


def test_narrow_gaussian_is_approximate_identity():
    lap = nm.grid_density(Laplace(1.0))
    dx = lap.dx
    narrow = nm._sample_grid(Gaussian((2 * dx) ** 2), -2048 * dx, dx, 4096)
    c = nm.convolve(lap, narrow)
    ref = Laplace(1.0).pdf(c.x)
    # smoothing error is O(var * f''), largest at the kink
    assert np.max(np.abs(c.values - ref)) < 2 * dx


def test_laplace_convolution_closed_form():
    f = nm.grid_density(Laplace(1.0))
    c = nm.convolve(f, f)
    x = c.x
    ref = np.exp(-np.abs(x)) * (1 + np.abs(x)) / 4
    assert np.max(np.abs(c.values - ref)) < 1e-6


def test_convolution_commutes_and_matches_direct():
    f = nm.grid_density(Laplace(1.0), n=2 ** 12)
    g = nm._sample_grid(Logistic(1.0), -2048 * f.dx, f.dx, 2 ** 12)
    a, b = nm.convolve(f, g), nm.convolve(g, f)
    assert np.max(np.abs(a.values - b.values)) < 1e-10
    f10 = nm.GridDensity.from_values(f.x0, f.dx, f.values[1536:2560])
    g10 = nm.GridDensity.from_values(g.x0, g.dx, g.values[1536:2560])
    fast, slow = nm.convolve(f10, g10), nm.convolve_direct(f10, g10)
    assert np.max(np.abs(fast.values - slow.values)) < 1e-10


def test_convolution_grid_mismatch():
    f = nm.grid_density(Gaussian(1.0))
    g = nm.grid_density(Gaussian(4.0))
    with pytest.raises(nm.GridMismatchError):
        nm.convolve(f, g)


def test_convolution_increases_entropy():
    grids = {k: nm._sample_grid(d, -40.0, 80.0 / 2 ** 14, 2 ** 14) for k, d in FAMILIES.items()}
    for f in grids.values():
        for g in grids.values():
            hc = nm.convolve(f, g).entropy()[0]
            assert hc >= max(f.entropy()[0], g.entropy()[0]) - 1e-6


# ---------------------------------------------------------------- scaling

def test_scale_identity_and_gaussian():
    g = nm.grid_density(Gaussian(1.0))
    same = nm.scale_density(g, 1.0)
    assert same.x0 == g.x0 and same.dx == g.dx and np.array_equal(same.values, g.values)
    two = nm.scale_density(g, 2.0)
    assert np.max(np.abs(two.values - phi(two.x, 4.0))) < 1e-15
    flipped = nm.scale_density(g, -2.0)
    assert np.max(np.abs(flipped.values - phi(flipped.x, 4.0))) < 1e-15


def test_scale_laplace_entropy():
    f = nm.scale_density(nm.grid_density(Laplace(1.0)), math.sqrt(0.5))
    assert f.entropy()[0] == pytest.approx(1 + math.log(2) + 0.5 * math.log(0.5), abs=1e-6)


def test_scale_by_zero_rejected():
    with pytest.raises(DomainError):
        nm.scale_density(nm.grid_density(Gaussian(1.0)), 0.0)


@given(st.floats(0.1, 10.0), st.booleans(), st.sampled_from(sorted(FAMILIES)))
def test_scale_shifts_entropy_by_log(a, negative, name):
    f = nm.grid_density(FAMILIES[name])
    s = nm.scale_density(f, -a if negative else a)
    # off by log(a) * (mass - 1); the mass defect is dx^2 / 12 at the Laplace kink
    tol = 1e-6 if name == "laplace" else 1e-7
    assert s.entropy()[0] - f.entropy()[0] == pytest.approx(math.log(a), abs=tol)


# ---------------------------------------------------------------- L^p norms

def test_lp_norm_examples():
    for name, d in FAMILIES.items():
        g = nm.grid_density(d)
        # the trapezoid rule is second order only across the Laplace kink
        tol = 1e-6 if name == "laplace" else 1e-8
        assert nm.lp_norm(g, 1.0) == pytest.approx(1.0, abs=tol)
    assert nm.lp_norm(nm.grid_density(Gaussian(1.0)), 2.0) == pytest.approx(
        (4 * math.pi) ** -0.25, abs=1e-12)
    assert nm.lp_norm(nm.grid_density(Laplace(1.0)), 2.0) == pytest.approx(0.5, abs=1e-6)


def test_lp_norm_rejects_nonpositive():
    with pytest.raises(DomainError):
        nm.lp_norm(nm.grid_density(Gaussian(1.0)), 0.0)


@given(st.floats(0.3, 5.0))
def test_gaussian_lp_norm_closed_form(p):
    # ||phi||_p = (2 pi)^((1-p)/(2p)) p^(-1/(2p))
    g = nm.grid_density(Gaussian(1.0))
    ref = (2 * math.pi) ** ((1 - p) / (2 * p)) * p ** (-1 / (2 * p))
    assert nm.lp_norm(g, p) == pytest.approx(ref, rel=1e-9)
