import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from intsemi.core_ops import AdmissibilityError, FamilyError, GridSpec, make_family, pointwise_norm
from intsemi.gallery import (GaussianBoundQuery, beta_classify, beta_norm_bounds, beta_rate_sweep, beta_s1_closed_form,
                             c_beta, fractional_power_norm_constant, fractional_power_semigroup, gaussian_bounds,
                             singular_degenerate, singular_norm_exponent, singular_range_defect)


def test_gaussian_examples():
    lo, hi = gaussian_bounds(GaussianBoundQuery(1.0, 1, 1 + 1j))
    assert hi == pytest.approx(2 ** 0.25, rel=1e-14)
    assert lo == pytest.approx(2 ** -0.25, rel=1e-14)
    assert (round(lo, 5), round(hi, 5)) == (0.84090, 1.18921)


@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_gaussian_p2(n):
    lo, hi = gaussian_bounds(GaussianBoundQuery(2.0, n, 0.3 + 4j))
    assert hi == 1.0 and lo == pytest.approx(2 ** (-n / 4))


def test_gaussian_p_infinity():
    q = GaussianBoundQuery(math.inf, 3, 1 + 1j)
    assert q.exponent == 1.5
    assert q.exponent == GaussianBoundQuery(1.0, 3, 1 + 1j).exponent


def test_gaussian_errors():
    with pytest.raises(ValueError):
        GaussianBoundQuery(0.5, 1, 1.0)
    with pytest.raises(ValueError):
        GaussianBoundQuery(2.0, 0, 1.0)
    with pytest.raises(AdmissibilityError):
        GaussianBoundQuery(2.0, 1, 1j)


@settings(max_examples=100, deadline=None)
@given(p=st.floats(1.0, 50.0), n=st.integers(1, 6), r=st.floats(0.01, 100.0), th=st.floats(-1.55, 1.55))
def test_gaussian_bound_properties(p, n, r, th):
    z = r * np.exp(1j * th)
    lo, hi = gaussian_bounds(GaussianBoundQuery(p, n, z))
    assert lo <= hi
    if p > 1:
        q = p / (p - 1)
        assert GaussianBoundQuery(q, n, z).exponent == pytest.approx(GaussianBoundQuery(p, n, z).exponent, abs=1e-9)


@pytest.mark.parametrize("beta,cls,rate", [
    (0.0, "C0", 1.0), (1.0, "C0", 1.0), (2.0, "class-(1,A)", 1.0), (3.0, "class-(1,A)", 0.5),
    (4.0, "Abel-summable-only", 0.0), (4.5, "no-resolvent", None),
])
def test_beta_classify(beta, cls, rate):
    rep = beta_classify(beta)
    assert rep.classification == cls and rep.rate_once_integrated == rate
    assert rep.c_beta > 0


def test_beta_classify_errors():
    with pytest.raises(FamilyError):
        beta_classify(-0.5)


@pytest.mark.parametrize("beta", [0.5, 1.0, 2.0, 3.0, 4.0])
def test_c_beta_is_sup(beta):
    y = np.linspace(0.0, 20.0, 200001)
    assert c_beta(beta) == pytest.approx(np.max(y ** (beta / 2) * np.exp(-y)), rel=1e-8)
    assert c_beta(0.0) == 1.0


@pytest.mark.parametrize("beta,z", [(2.0, 1.0), (3.0, 0.5 + 0.5j), (0.0, 2.0)])
def test_beta_norm_bounds_sandwich_grid_norm(beta, z):
    fam = make_family("beta_multiplication", {"beta": beta}, GridSpec(-200.0, 200.0, 4001, spacing="log"))
    lo, hi = beta_norm_bounds(beta, z)
    n = fam.semigroup_norm(z)
    assert math.exp(-complex(z).real) <= n <= hi + 1e-12
    assert lo <= hi


def test_s1_closed_form_at_origin():
    s = beta_s1_closed_form(2.0, 1.0, 0.0)
    assert s.shape == (2, 2)
    assert s[0, 0] == pytest.approx(1 - math.exp(-1)) and s[1, 1] == s[0, 0]
    assert s[0, 1] == 0 and s[1, 0] == 0


@settings(max_examples=30, deadline=None)
@given(beta=st.floats(0.0, 4.0), x=st.floats(-3.0, 3.0), r=st.floats(0.1, 2.0), th=st.floats(-1.2, 1.2))
def test_s1_closed_form_derivative(beta, x, r, th):
    z = r * np.exp(1j * th)
    h = 1e-5
    fd = (beta_s1_closed_form(beta, z + h, x) - beta_s1_closed_form(beta, z - h, x)) / (2 * h)
    a = np.array([[-(1 + x * x), abs(x) ** beta], [0.0, -(1 + x * x)]])
    assert np.max(np.abs(fd - expm(z * a))) < 1e-7


@pytest.mark.parametrize("beta", [0.0, 1.0, 2.0])
def test_s1_boundary_bound(beta):
    x = np.linspace(-50.0, 50.0, 20001)
    for t in (-5.0, -0.3, 0.1, 1.0, 10.0):
        s = beta_s1_closed_form(beta, 1j * t, x)
        norm = pointwise_norm(s)
        assert norm <= 3 * abs(t)


def test_s1_closed_form_errors():
    with pytest.raises(AdmissibilityError):
        beta_s1_closed_form(3.0, 1j, 0.5)
    with pytest.raises(AdmissibilityError):
        beta_s1_closed_form(1.0, -0.1, 0.5)


def test_fractional_power_examples():
    assert fractional_power_semigroup(2.0, 0.5)[0, 0, 0] == pytest.approx(2 ** -0.5, abs=1e-8)
    D = fractional_power_semigroup(np.diag([1.0, 4.0]), 0.5)[0]
    assert np.allclose(D, np.diag([1.0, 0.5]), atol=1e-8)
    B = np.array([[2.0, 1.0], [0.0, 3.0]])
    assert np.allclose(fractional_power_semigroup(B, 1.0)[0], np.linalg.inv(B), atol=1e-8)


@settings(max_examples=20, deadline=None)
@given(a=st.floats(0.05, 1.5), b=st.floats(0.05, 1.5), ia=st.floats(-2.0, 2.0), ib=st.floats(-2.0, 2.0))
def test_fractional_power_semigroup_law(a, b, ia, ib):
    B = np.array([[2.0, 1.0], [0.0, 3.0]])
    z1, z2 = complex(a, ia), complex(b, ib)
    lhs = fractional_power_semigroup(B, z1)[0] @ fractional_power_semigroup(B, z2)[0]
    rhs = fractional_power_semigroup(B, z1 + z2)[0]
    assert np.allclose(lhs, rhs, atol=1e-8)


def test_fractional_power_norm_constant():
    z = [complex(r, i) for r in (0.1, 0.3, 0.5, 0.7, 0.9) for i in (-3.0, -1.0, 0.0, 1.0, 3.0)]
    M, ratios = fractional_power_norm_constant(np.array([[2.0, 1.0], [0.0, 3.0]]), z)
    assert math.isfinite(M) and M < 5 and np.all(ratios > 0)
    with pytest.raises(ValueError):
        fractional_power_norm_constant(2.0, [1.5])


def test_fractional_power_rejects_negative_spectrum():
    with pytest.raises(FamilyError):
        fractional_power_semigroup(-1.0, 0.5)


def test_singular_beta1_not_abel():
    rep = singular_range_defect(1.0, lam=1e3)
    assert rep["abel_defect_f0_nonzero"] >= 0.9
    assert rep["max_tail"] < 0.05


def test_singular_half_abel_on_vanishing_functions():
    rep = singular_range_defect(0.5, lam=1e4)
    assert rep["abel_defect_f0_zero"] < 1e-3


def test_singular_degenerate():
    assert singular_degenerate()
    assert singular_range_defect(0.0)["degenerate"]
    with pytest.raises(FamilyError):
        singular_range_defect(-1.0)
    with pytest.raises(AdmissibilityError):
        singular_range_defect(1.0, t=0.0)


@pytest.mark.parametrize("beta", [0.25, 0.5, 0.75])
def test_singular_norm_exponent(beta):
    assert singular_norm_exponent(beta)["exponent"] == pytest.approx(beta, abs=0.1)


def test_beta_rate_sweep():
    grid = GridSpec(-1000.0, 1000.0, 1001, spacing="log")
    rows = beta_rate_sweep([0.5, 1.0, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5], grid=grid, t=np.geomspace(1e-4, 0.1, 61))
    for row in rows:
        if row["beta"] > 4:
            assert row["fitted_rate"] is None
        elif row["beta"] == 4:
            assert row["fitted_rate"] <= 0.05
        else:
            assert row["fitted_rate"] == pytest.approx(row["rate_once_integrated"], abs=0.1)
