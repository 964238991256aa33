import numpy as np
from scipy.integrate import quad

from ssmd.gaussian import (
    norm_cdf,
    norm_cdf_interval,
    norm_pdf,
    norm_ppf,
    rng_from_seed,
    standard_normals,
    uniform_open,
)


def test_cdf_against_quadrature():
    # integrate the density from far left; checks the erfc route end to end
    for x in (-3.0, -1.0, -0.3, 0.0, 0.7, 2.5):
        val, _ = quad(lambda t: norm_pdf(t), -40.0, x, limit=200)
        assert abs(norm_cdf(x) - val) < 1e-12


def test_cdf_symmetry_and_range():
    x = np.linspace(-8, 8, 2001)
    c = norm_cdf(x)
    assert np.all(c >= 0.0) and np.all(c <= 1.0)
    assert np.max(np.abs(c + norm_cdf(-x) - 1.0)) < 1e-15


def test_interval_matches_difference():
    lo = np.array([-np.inf, -2.0, 0.5])
    hi = np.array([1.0, -1.0, np.inf])
    got = norm_cdf_interval(lo, hi)
    want = norm_cdf(hi) - norm_cdf(lo)
    assert np.max(np.abs(got - want)) < 1e-15


def test_ppf_inverts_cdf():
    x = np.linspace(-5, 5, 4001)
    assert np.max(np.abs(norm_ppf(norm_cdf(x)) - x)) < 1e-9
    p = np.linspace(1e-10, 1 - 1e-10, 9999)
    assert np.max(np.abs(norm_cdf(norm_ppf(p)) - p)) < 1e-13


def test_ppf_known_values():
    assert abs(norm_ppf(0.5)) < 1e-16
    assert abs(norm_ppf(0.975) - 1.959963984540054) < 1e-12
    assert abs(norm_ppf(0.1586552539314571) + 1.0) < 1e-12  # Phi(-1)


def test_uniform_open_strictly_inside():
    rng = rng_from_seed(7)
    u = uniform_open(rng, 100000)
    assert u.min() > 0.0 and u.max() < 1.0


def test_normal_stream_is_pure_function_of_seed():
    z1 = standard_normals(rng_from_seed(123), 5000)
    z2 = standard_normals(rng_from_seed(123), 5000)
    z3 = standard_normals(rng_from_seed(124), 5000)
    assert np.array_equal(z1, z2)
    assert not np.array_equal(z1, z3)


def test_normal_moments():
    z = standard_normals(rng_from_seed(42), 400000)
    assert abs(z.mean()) < 0.01
    assert abs(z.var() - 1.0) < 0.01
    assert abs(np.mean(np.abs(z)) - np.sqrt(2 / np.pi)) < 0.01
