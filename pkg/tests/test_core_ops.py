import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.linalg import expm

from intsemi.core_ops import (AdmissibilityError, FamilyError, GridSpec, ResolventSetError, family_from_json,
                              make_family, resolvent_derivative)
from intsemi.gallery import c_beta

SMALL = GridSpec(-3.0, 3.0, 61)


def _pointwise_generator(x, beta):
    m = -(1.0 + x * x)
    return np.array([[m, abs(x) ** beta], [0.0, m]])


def test_make_family_metadata():
    b3 = make_family("beta_multiplication", {"beta": 3.0}, GridSpec(-8, 8, 2001))
    assert b3.kappa_min == pytest.approx(1.5)
    s = make_family("scalar", {"a": -1.0})
    assert s.omega == -1.0 and s.kappa_min == 0.0
    assert s.in_resolvent_set(0.0) and not s.in_resolvent_set(-1.0)


def test_make_family_errors():
    with pytest.raises(FamilyError):
        make_family("heat", {})
    with pytest.raises(FamilyError):
        make_family("beta_multiplication", {"beta": -1.0})
    with pytest.raises(FamilyError):
        GridSpec(1.0, 1.0, 10)
    with pytest.raises(FamilyError):
        GridSpec(0.0, 1.0, 1)


def test_beta_above_four_has_no_resolvent():
    b5 = make_family("beta_multiplication", {"beta": 5.0}, SMALL)
    for lam in (1.0, 100.0, 3 + 4j, -7.0):
        with pytest.raises(ResolventSetError):
            b5.resolvent(lam)


def test_resolvent_outside_resolvent_set_raises():
    s = make_family("scalar", {"a": -1.0})
    with pytest.raises(ResolventSetError):
        s.resolvent(-1.0)
    m = make_family("matrix", {"matrix": [[-1.0, 2.0], [0.0, -3.0]]})
    with pytest.raises(ResolventSetError):
        m.resolvent(-3.0)


def test_scalar_semigroup_value():
    s = make_family("scalar", {"a": -1.0})
    assert s.apply(s.semigroup(1.0), [1.0])[0, 0] == pytest.approx(math.exp(-1))


def test_beta_semigroup_matches_pointwise_expm():
    fam = make_family("beta_multiplication", {"beta": 2.5}, SMALL)
    z = 0.7 + 0.4j
    T = fam.semigroup(z)
    for i, x in enumerate(SMALL.points()):
        assert np.allclose(T[i], expm(z * _pointwise_generator(x, 2.5)), atol=1e-14)
    i0 = int(np.argmin(np.abs(SMALL.points())))
    assert T[i0, 0, 1] == 0 and T[i0, 0, 0] == pytest.approx(np.exp(-z))


def test_singular_semigroup_matches_direct_formula():
    fam = make_family("singular_c01", {"beta": 1.0})
    x, ell = fam.x, fam.ell
    f = np.ones(x.size, dtype=complex)
    g = fam.semigroup(1.0).apply(f)
    ref = np.zeros_like(g)
    ref[1:] = x[1:] * (1.0 - ell[1:])
    assert np.allclose(g[1:], ref[1:], atol=1e-15)
    j = int(np.argmin(np.abs(ell - 1.0)))
    assert abs(g[j]) < 1e-3


def test_semigroup_norm_beta2_sandwich():
    fam = make_family("beta_multiplication", {"beta": 2.0}, GridSpec(-8, 8, 2001))
    n = fam.semigroup_norm(1.0)
    upper = 1.0 + c_beta(2.0) * math.exp(-1.0)
    assert upper == pytest.approx(1.1353, abs=1e-4)
    assert math.exp(-2.0) <= n <= upper


def test_semigroup_norm_beta0_contraction():
    fam = make_family("beta_multiplication", {"beta": 0.0}, SMALL)
    for z in (0.1, 1.0, 2 + 3j):
        assert fam.semigroup_norm(z) <= 1.0 + 1e-15


def test_semigroup_norm_beta3_near_axis():
    fam = make_family("beta_multiplication", {"beta": 3.0}, GridSpec(-200.0, 200.0, 40001, spacing="log"))
    z = 0.01 + 1j
    ref = c_beta(3.0) * abs(z) * math.exp(-z.real) / z.real ** 1.5
    assert 0.5 <= fam.semigroup_norm(z) / ref <= 2.0


def test_semigroup_norm_monotone_under_refinement():
    fam = lambda n: make_family("beta_multiplication", {"beta": 3.0}, GridSpec(-8.0, 8.0, n))
    vals = [fam(n).semigroup_norm(0.05 + 0.3j) for n in (101, 201, 401, 801)]
    assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))


def test_resolvent_examples():
    s = make_family("scalar", {"a": -1.0})
    assert s.apply(s.resolvent(0.0), [1.0])[0, 0] == pytest.approx(1.0)
    b4 = make_family("beta_multiplication", {"beta": 4.0}, GridSpec(-1.0, 1.0, 3))
    out = b4.apply(b4.resolvent(0.0), [0.0, 1.0])
    assert np.allclose(out[2], [0.25, 0.5])


def test_singular_beta1_resolvent_equation_fails():
    g = make_family("singular_c01", {"beta": 1.0})
    l, m = 2.0, 3.0
    Rl, Rm = g.resolvent(l), g.resolvent(m)
    assert float((Rl - Rm - (m - l) * (Rl @ Rm)).norm()) > 0.1


@pytest.mark.parametrize("kind,params,grid", [
    ("scalar", {"a": -1.0}, None),
    ("matrix", {"matrix": [[-1.0, 2.0], [0.0, -3.0]]}, None),
    ("beta_multiplication", {"beta": 2.0}, SMALL),
    ("beta_multiplication", {"beta": 3.5}, SMALL),
    ("singular_c01", {"beta": 0.5}, None),
])
def test_resolvent_equation(kind, params, grid):
    fam = make_family(kind, params, grid)
    l, m = 2.0 + 1j, 5.0
    Rl, Rm = fam.resolvent(l), fam.resolvent(m)
    res = Rl - Rm - (m - l) * fam.compose(Rl, Rm)
    assert np.all(np.asarray(fam.norm(res)) <= 1e-10)


def test_matrix_family_against_scipy():
    A = np.array([[-1.0, 2.0], [0.5, -3.0]])
    fam = make_family("matrix", {"matrix": A.tolist()})
    z = 0.8 - 0.3j
    assert np.allclose(fam.semigroup(z)[0], expm(z * A), atol=1e-14)
    assert np.allclose(fam.resolvent(2.0)[0], np.linalg.inv(2.0 * np.eye(2) - A), atol=1e-14)
    S1 = fam.integrated(1.0, 1)[0]
    ref = np.array([[quad(lambda s: expm(s * A)[i, j], 0, 1)[0] for j in range(2)] for i in range(2)])
    assert np.allclose(S1, ref, atol=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_scalar_integrated_by_quadrature(k):
    s = make_family("scalar", {"a": -1.0})
    t = 1.3
    ref = quad(lambda u: (t - u) ** (k - 1) / math.factorial(k - 1) * math.exp(-u), 0, t)[0]
    assert s.integrated(t, k)[0, 0, 0].real == pytest.approx(ref, rel=1e-13)


def test_resolvent_derivative_examples():
    s = make_family("scalar", {"a": -1.0})
    d3 = resolvent_derivative(s, 1.0, 3, 0.0)
    assert abs(d3[0, 0, 0]) == pytest.approx(0.375, rel=1e-14)
    b2 = make_family("beta_multiplication", {"beta": 2.0}, SMALL)
    d0 = resolvent_derivative(b2, 3.0, 0, 1.0)
    assert np.allclose(d0, b2.resolvent(3.0) / 3.0)


def test_resolvent_derivative_quadrature_vs_complex_step():
    b2 = make_family("beta_multiplication", {"beta": 2.0}, SMALL)
    quadv = resolvent_derivative(b2, 10.0, 1, 1.0, method="quadrature")
    h = 1e-20
    cs = (b2.resolvent(10.0 + 1j * h) / (10.0 + 1j * h)).imag / h
    assert float(b2.norm(quadv - cs)) / float(b2.norm(cs)) < 1e-6


def test_pointwise_generator_powers():
    beta = 2.5
    fam = make_family("beta_multiplication", {"beta": beta}, SMALL)
    lam = 2.0
    R = fam.resolvent(lam)
    A = lam * np.eye(2) - np.linalg.inv(R)
    x = SMALL.points()
    N = np.array([[0.0, 1.0], [0.0, 0.0]])
    b = -1.0 - x * x
    P = np.broadcast_to(np.eye(2), A.shape).copy()
    for n in range(1, 6):
        P = P @ A
        ref = (b ** n)[:, None, None] * np.eye(2) + (n * b ** (n - 1) * np.abs(x) ** beta)[:, None, None] * N
        assert np.allclose(P, ref, rtol=1e-10, atol=1e-9 * np.abs(ref).max())


def test_boundary_admissibility():
    b3 = make_family("beta_multiplication", {"beta": 3.0}, SMALL)
    with pytest.raises(AdmissibilityError):
        b3.semigroup(-0.1)
    with pytest.raises(AdmissibilityError):
        b3.integrated(1j, 1)
    assert np.all(np.isfinite(b3.integrated(1j, 2)))


def test_family_from_json_roundtrip():
    desc = '{"kind": "beta_multiplication", "beta": 3.0, "grid": {"xmin": -8, "xmax": 8, "n": 2001}}'
    fam = family_from_json(desc)
    assert fam.beta == 3.0 and fam.grid.n_points == 2001
    again = family_from_json(fam.to_json())
    assert np.array_equal(again.grid.points(), fam.grid.points())


z_strategy = st.complex_numbers(min_magnitude=0.01, max_magnitude=3.0).filter(lambda z: z.real > 0.01)


@settings(max_examples=40, deadline=None)
@given(z1=z_strategy, z2=z_strategy, beta=st.sampled_from([0.0, 1.0, 2.0, 3.0, 4.0]))
def test_semigroup_law_beta(z1, z2, beta):
    fam = make_family("beta_multiplication", {"beta": beta}, SMALL)
    v = np.random.default_rng(0).normal(size=(SMALL.n_points, 2))
    lhs = fam.apply(fam.compose(fam.semigroup(z1), fam.semigroup(z2)), v)
    rhs = fam.apply(fam.semigroup(z1 + z2), v)
    assert fam.vec_norm(lhs - rhs) <= 1e-10 * fam.vec_norm(v)


@settings(max_examples=40, deadline=None)
@given(z1=z_strategy, z2=z_strategy)
def test_semigroup_law_matrix_and_singular(z1, z2):
    m = make_family("matrix", {"matrix": [[-1.0, 2.0], [0.0, -3.0]]})
    assert np.allclose(m.semigroup(z1) @ m.semigroup(z2), m.semigroup(z1 + z2), atol=1e-10)
    g = make_family("singular_c01", {"beta": 0.5}, GridSpec(0.0, 50.0, 200, spacing="log"))
    f = 1.0 + np.cos(g.x)
    lhs = (g.semigroup(z1) @ g.semigroup(z2)).apply(f)
    rhs = g.semigroup(z1 + z2).apply(f)
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(f)) * max(1.0, np.max(np.abs(rhs)))
