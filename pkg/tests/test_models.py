"""Model correctness: densities, gradients, transforms, bundled data."""

import json
import math

import numpy as np
import pytest
from scipy import integrate, stats

from drghmc.models import build_model, load_dataset
from drghmc.models.data import (
    dataset_path,
    generate_irt_data,
    generate_stoch_vol_data,
    validate_dataset,
)
from drghmc.models.funnel import embed_grid_point
from drghmc.models.gaussian import CorrelatedGaussian

LOG_2PI = math.log(2.0 * math.pi)

ALL_MODELS = [
    ("funnel", {"dim": 10}),
    ("funnel", {"dim": 50}),
    ("gaussian", {"dim": 3}),
    ("eight_schools", {}),
    ("normal100", {}),
    ("stoch_vol", {}),
    ("irt_2pl", {}),
]


def finite_difference_gradient(model, theta, h=1e-5):
    grad = np.zeros_like(theta)
    for i in range(theta.size):
        step = h * max(1.0, abs(theta[i]))
        hi, lo = theta.copy(), theta.copy()
        hi[i] += step
        lo[i] -= step
        grad[i] = (model.log_density(hi) - model.log_density(lo)) / (2.0 * step)
    return grad


@pytest.mark.parametrize("name,kwargs", ALL_MODELS)
def test_gradients_match_finite_differences(name, kwargs):
    model = build_model(name, **kwargs)
    rng = np.random.default_rng(101)
    for _ in range(20):
        theta = 0.5 * rng.standard_normal(model.dim)
        analytic = model.grad_log_density(theta)
        numeric = finite_difference_gradient(model, theta)
        rel = np.linalg.norm(numeric - analytic) / max(np.linalg.norm(analytic), 1.0)
        assert rel < 1e-5


def test_table_dimensions():
    assert build_model("eight_schools").dim == 9
    assert build_model("normal100").dim == 100
    assert build_model("irt_2pl").dim == 144
    assert build_model("stoch_vol").dim == 503
    assert build_model("funnel", dim=10).dim == 10
    assert build_model("funnel", dim=50).dim == 50


def test_funnel_log_density_at_origin():
    # log normal(0|0,3) + 9 log normal(0|0,1) = -log 3 - 5 log 2pi
    model = build_model("funnel", dim=10)
    expected = -math.log(3.0) - 5.0 * LOG_2PI
    assert model.log_density(np.zeros(10)) == pytest.approx(expected, rel=1e-14)


def test_standard_gaussian_values():
    model = build_model("gaussian", dim=1)
    assert model.log_density(np.zeros(1)) == pytest.approx(-0.5 * LOG_2PI)
    assert model.grad_log_density(np.array([2.0]))[0] == pytest.approx(-2.0)


def test_funnel_2d_gradient_formula():
    model = build_model("funnel", dim=2)
    x, y = 0.7, -1.3
    grad = model.grad_log_density(np.array([x, y]))
    assert grad[0] == pytest.approx(-x / 9.0 - 0.5 + 0.5 * y * y * math.exp(-x), rel=1e-12)
    assert grad[1] == pytest.approx(-y * math.exp(-x), rel=1e-12)


def test_funnel_density_factorizes():
    model = build_model("funnel", dim=6)
    rng = np.random.default_rng(2)
    for _ in range(10):
        theta = rng.standard_normal(6) * 1.5
        x, y = theta[0], theta[1:]
        log_x = stats.norm.logpdf(x, scale=3.0)
        log_y = stats.norm.logpdf(y, scale=np.exp(0.5 * x)).sum()
        assert model.log_density(theta) == pytest.approx(log_x + log_y, rel=1e-12)


def test_correlated_gaussian_rho_zero_matches_iid():
    corr = CorrelatedGaussian(5, 0.0)
    iid = build_model("gaussian", dim=5)
    rng = np.random.default_rng(3)
    for _ in range(10):
        theta = rng.standard_normal(5) * 2.0
        assert corr.log_density(theta) == pytest.approx(iid.log_density(theta), rel=1e-12)
        np.testing.assert_allclose(corr.grad_log_density(theta), iid.grad_log_density(theta),
                                   rtol=1e-10, atol=1e-12)


def test_funnel_embedding():
    theta = embed_grid_point(-2.0, 1.5, dim=10)
    assert theta[0] == -2.0
    np.testing.assert_array_equal(theta[1:], np.full(9, 1.5))


def test_eight_schools_matches_quadrature_over_population_mean():
    """The 9-dim density must equal the 10-parameter joint integrated over mu."""
    model = build_model("eight_schools")
    data = load_dataset("eight_schools")
    y, sigma = data["y"], data["sigma"]
    rng = np.random.default_rng(4)

    def full_joint(mu, xi, effects):
        tau = math.exp(xi)
        lp = stats.norm.logpdf(mu, scale=5.0)
        lp += math.log(2.0 / (5.0 * math.pi)) - math.log1p((tau / 5.0) ** 2) + xi
        lp += stats.norm.logpdf(effects, loc=mu, scale=tau).sum()
        lp += stats.norm.logpdf(y, loc=effects, scale=sigma).sum()
        return lp

    for _ in range(3):
        xi = rng.uniform(0.5, 1.5)
        effects = rng.normal(8.0, 4.0, size=8)
        marginal, err = integrate.quad(
            lambda mu: math.exp(full_joint(mu, xi, effects)), -200, 200, limit=200
        )
        ours = model.log_density(np.concatenate([[xi], effects]))
        assert ours == pytest.approx(math.log(marginal), abs=1e-8)
        assert err < marginal * 1e-8


@pytest.mark.parametrize(
    "name,coord,lo,hi",
    [
        ("eight_schools", 0, 0.5, 2.0),  # log tau
        ("stoch_vol", 1, -1.5, -0.5),  # log sigma
        ("stoch_vol", 2, -0.5, 0.5),  # atanh phi
        ("irt_2pl", 0, -0.5, 0.5),  # log sigma_ability
    ],
)
def test_transform_jacobians_by_slice_quadrature(name, coord, lo, hi):
    """Integral of the unconstrained density over a 1-d slice must equal the
    integral of the constrained density over the mapped range."""
    model = build_model(name)
    rng = np.random.default_rng(7)
    base = 0.1 * rng.standard_normal(model.dim)

    def unconstrained_slice(u):
        theta = base.copy()
        theta[coord] = u
        return math.exp(model.log_density(theta) - offset)

    # the constrained density divides out the Jacobian of the transform
    if name == "stoch_vol" and coord == 2:
        inverse = np.arctanh
        jac = lambda c: 1.0 - c * c  # d tanh(u) / du at u = atanh(c)
        lo_c, hi_c = math.tanh(lo), math.tanh(hi)
    else:
        inverse = np.log
        jac = lambda c: c
        lo_c, hi_c = math.exp(lo), math.exp(hi)

    def constrained_slice(c):
        theta = base.copy()
        theta[coord] = inverse(c)
        return math.exp(model.log_density(theta) - offset) / jac(c)

    mid = base.copy()
    mid[coord] = 0.5 * (lo + hi)
    offset = model.log_density(mid)
    left, _ = integrate.quad(unconstrained_slice, lo, hi, limit=100)
    right, _ = integrate.quad(constrained_slice, lo_c, hi_c, limit=100)
    assert left == pytest.approx(right, rel=1e-7)


def test_dimension_mismatch_raises():
    model = build_model("funnel", dim=10)
    with pytest.raises(ValueError):
        model.log_density(np.zeros(9))
    with pytest.raises(ValueError):
        model.grad_log_density(np.zeros(11))


def test_unknown_model_name():
    with pytest.raises(ValueError):
        build_model("nuts")


def test_data_validation_errors():
    with pytest.raises(ValueError):
        validate_dataset("eight_schools", {"y": [1.0], "sigma": [-1.0]})
    with pytest.raises(ValueError):
        validate_dataset("normal100", {"rho": 1.0})
    with pytest.raises(ValueError):
        validate_dataset("normal100", {"rho": 0.0})
    with pytest.raises(ValueError):
        validate_dataset("irt_2pl", {"I": 2, "J": 2, "y": [[0, 2], [1, 0]]})
    with pytest.raises(ValueError):
        validate_dataset("stoch_vol", {"y": [float("nan"), 1.0]})


def test_synthetic_data_regenerates_bitwise():
    bundled = json.loads(dataset_path("stoch_vol").read_text())
    assert generate_stoch_vol_data() == bundled
    bundled = json.loads(dataset_path("irt_2pl").read_text())
    assert generate_irt_data() == bundled


def test_bundled_data_shapes():
    schools = load_dataset("eight_schools")
    assert schools["y"].shape == (8,)
    sv = load_dataset("stoch_vol")
    assert sv["y"].shape == (500,)
    irt = load_dataset("irt_2pl")
    assert irt["y"].shape == (100, 20)
    assert 0.0 < load_dataset("normal100")["rho"] < 1.0


def test_funnel_hessian_against_finite_differences():
    model = build_model("funnel", dim=4)
    theta = np.array([-1.2, 0.7, -0.4, 1.1])
    analytic = model.hessian_neg_log_density(theta)
    h = 1e-5
    numeric = np.zeros((4, 4))
    for i in range(4):
        hi, lo = theta.copy(), theta.copy()
        hi[i] += h
        lo[i] -= h
        numeric[i] = -(model.grad_log_density(hi) - model.grad_log_density(lo)) / (2 * h)
    np.testing.assert_allclose(analytic, numeric, rtol=1e-5, atol=1e-7)
