import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import gamma

from intsemi import _quad
from intsemi.core_ops import AdmissibilityError, GridSpec, make_family
from intsemi.fracint import TraceError, trace_from_function
from intsemi.transforms import (ContourError, ContourSpec, contour_invert, contour_trace, default_contour,
                                derivative_ladder, laplace_forward, post_widder)

SCALAR = make_family("scalar", {"a": -1.0})
MATRIX = make_family("matrix", {"matrix": [[-1.0, 2.0], [0.0, -3.0]]})
BETA2 = make_family("beta_multiplication", {"beta": 2.0}, GridSpec(-8.0, 8.0, 201))


def test_laplace_examples():
    tr = trace_from_function(lambda t: np.exp(-t), 0, np.linspace(0.1, 1, 5))
    assert laplace_forward(tr, 1.0, 0.0) == pytest.approx(0.5, rel=1e-12)
    tr2 = trace_from_function(lambda t: t ** 2 / 2, 2, np.linspace(0.1, 1, 5), growth=(0.5, 2.0))
    assert laplace_forward(tr2, 2.0, 2.0) == pytest.approx(0.5, rel=1e-12)


def test_laplace_beta2_once_integrated():
    fam = make_family("beta_multiplication", {"beta": 2.0}, GridSpec(-8.0, 8.0, 101))
    tr = trace_from_function(lambda t: fam.integrated(np.asarray(t, dtype=complex), 1), 1,
                             np.linspace(0.1, 1, 5), growth=(3.0, 1.0))
    L = laplace_forward(tr, 3.0, 1.0)
    R = fam.resolvent(3.0)
    assert fam.norm(L - R) / fam.norm(R) < 1e-6


def test_laplace_from_samples():
    t = np.linspace(0.0, 40.0, 40001)
    tr = trace_from_function(lambda s: np.exp(-s), 0, t[1:])
    tr.evaluator = None
    assert laplace_forward(tr, 1.0, 0.0) == pytest.approx(0.5, rel=1e-6)


def test_laplace_rejects_slow_decay():
    tr = trace_from_function(lambda t: np.exp(t), 0, np.linspace(0.1, 1, 5), omega=1.0)
    with pytest.raises(TraceError):
        laplace_forward(tr, 0.5, 0.0)


def test_contour_examples():
    assert contour_invert(SCALAR, 1.0, 0.0)[0, 0, 0] == pytest.approx(math.exp(-1), rel=1e-8)
    assert contour_invert(SCALAR, 1.0, 1.0)[0, 0, 0] == pytest.approx(1 - math.exp(-1), rel=1e-8)
    z = 0.5 + 0.5j
    S = contour_invert(BETA2, z, 0.0)
    T = BETA2.semigroup(z)
    assert BETA2.norm(S - T) / BETA2.norm(T) < 1e-6


def test_contour_fractional_order_scalar():
    # S_sigma(t) = int_0^t (t-s)^(sigma-1)/Gamma(sigma) e^{-s} ds, as a series
    t, sigma = 1.3, 0.5
    ref = sum((-1) ** j * t ** (j + sigma) / gamma(j + sigma + 1) for j in range(60))
    assert contour_invert(SCALAR, t, sigma)[0, 0, 0].real == pytest.approx(ref, rel=1e-9)


def test_contour_admissibility():
    with pytest.raises(ContourError):
        ContourSpec(omega_prime=1.0, phi=2.0)
    z = 1.0 * np.exp(0.8j)
    with pytest.raises(AdmissibilityError):
        contour_invert(SCALAR, z, 0.0, ContourSpec(omega_prime=1.0, phi=0.5))
    with pytest.raises(AdmissibilityError):
        contour_invert(SCALAR, 1j, 0.0)
    with pytest.raises(AdmissibilityError):
        contour_invert(SCALAR, 1.0, 0.0, ContourSpec(omega_prime=-2.0, phi=0.5))


def test_contour_shape_independence():
    z = np.array([0.3 + 0.1j, 1.0, 2.0 - 1.0j])
    for fam in (SCALAR, MATRIX, BETA2):
        a = contour_invert(fam, z, 0.5)
        c = default_contour(fam, z, "vertical")
        b = contour_invert(fam, z, 0.5, c)
        assert np.max(np.atleast_1d(fam.norm(a - b)) / np.atleast_1d(fam.norm(a))) < 1e-9


@pytest.mark.parametrize("fam", [SCALAR, MATRIX, BETA2], ids=["scalar", "matrix", "beta2"])
def test_roundtrip(fam):
    tr = contour_trace(fam, 0.0, np.linspace(0.05, 2.0, 8))
    w = max(fam.omega, 0.0)
    for lam in w + np.array([1.0, 10.0, 100.0]):
        L = laplace_forward(tr, lam, 0.0)
        R = fam.resolvent(complex(lam))
        assert fam.norm(L - R) / fam.norm(R) < 1e-5


@pytest.mark.parametrize("kappa", [1.0, 1.5])
def test_integrated_identity_matrix(kappa):
    A = np.array([[-1.0, 2.0], [0.0, -3.0]])
    t = 1.2
    x = np.array([1.0, -2.0])
    edges = np.concatenate(([0.0], np.geomspace(1e-6, t, 14)))
    s, w = _quad.composite_legendre(edges, 16)
    S = contour_invert(MATRIX, s.astype(complex), kappa)[:, 0]
    integral = np.einsum("s,sij,j->i", w, S, A @ x)
    lhs = contour_invert(MATRIX, t, kappa)[0] @ x - t ** kappa / gamma(kappa + 1) * x
    assert np.max(np.abs(lhs - integral)) < 1e-6


def test_post_widder_examples():
    assert post_widder(SCALAR, 1.0, 0.0, 50)[0, 0, 0].real == pytest.approx(math.exp(-1), rel=1e-2)
    assert post_widder(SCALAR, 1.0, 1.0, 50)[0, 0, 0].real == pytest.approx(1 - math.exp(-1), rel=1e-2)
    errs = [abs(post_widder(SCALAR, 1.0, 0.0, n)[0, 0, 0] - math.exp(-1)) for n in (10, 20, 40, 80)]
    assert all(b < a for a, b in zip(errs, errs[1:]))


def test_post_widder_errors():
    with pytest.raises(Exception):
        post_widder(SCALAR, 0.0, 0.0, 10)
    with pytest.raises(Exception):
        post_widder(SCALAR, 1.0, 0.0, 10_000)


def test_derivative_ladder_examples():
    d, f, disc = derivative_ladder(SCALAR, 1.0, 1.0, 1)
    assert d[0, 0, 0] == pytest.approx(math.exp(-1), rel=1e-5)
    assert f[0, 0, 0] == pytest.approx(math.exp(-1), rel=1e-5)
    d2, f2, _ = derivative_ladder(SCALAR, 1.0, 2.0, 2)
    assert f2[0, 0, 0] == pytest.approx(contour_invert(SCALAR, 1.0, 0.0)[0, 0, 0], rel=1e-4)
    d0, f0, disc0 = derivative_ladder(SCALAR, 1.0, 1.0, 0)
    assert disc0 == 0.0 and np.array_equal(d0, f0)


@settings(max_examples=25, deadline=None)
@given(r=st.floats(0.05, 8.0), th=st.floats(-1.3, 1.3))
def test_contour_matches_closed_form(r, th):
    z = r * np.exp(1j * th)
    S = contour_invert(MATRIX, z, 0.0)
    T = MATRIX.semigroup(z)
    assert MATRIX.norm(S - T) <= 1e-8 * max(1.0, float(MATRIX.norm(T)))


def test_contour_rejects_eigenvalue_outside_region():
    rot = make_family("matrix", {"matrix": [[0.0, 5.0], [-5.0, 0.0]]})
    with pytest.raises(AdmissibilityError):
        contour_invert(rot, 1.0, 0.0, ContourSpec(omega_prime=1.0, phi=0.3))
    S = contour_invert(rot, 1.0, 0.0, ContourSpec(omega_prime=1.0, phi=0.3, shape="vertical", height=6.0))
    assert np.allclose(S, rot.semigroup(1.0), atol=1e-8)
