import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intsemi.core_ops import GridSpec, make_family
from intsemi.euler import (EulerError, EulerRun, PnkSpec, euler_convergence_study, euler_power, integrated_euler,
                           origin_slope, pnk_eval, reference_value, verify_pnk_identity)

SCALAR = make_family("scalar", {"a": -1.0})
NILPOTENT = make_family("matrix", {"matrix": [[-1.0, 1.0], [0.0, -1.0]]})


def test_pnk_examples():
    assert pnk_eval(PnkSpec(5, 0), 7.0) == 1
    assert pnk_eval(PnkSpec(5, 1), 2.0) == -2
    assert pnk_eval(PnkSpec(4, 2), 1.0) == 1


def test_pnk_spec_validation():
    with pytest.raises(EulerError):
        PnkSpec(3, 3)
    with pytest.raises(EulerError):
        PnkSpec(3, -1)


@pytest.mark.parametrize("n,k,lam,t", [(6, 1, 2.0, 1.0), (10, 3, 1.0, 2.0), (30, 4, 0.7, 3.0), (8, 0, 1.5, 1.0)])
def test_pnk_identity(n, k, lam, t):
    assert verify_pnk_identity(PnkSpec(n, k), lam, t) < 1e-6


def test_pnk_identity_sign_for_odd_k():
    # without the (-1)^k factor the relation fails for odd k and holds for even k
    assert verify_pnk_identity(PnkSpec(6, 1), 2.0, 1.0, literal=True) > 0.1
    assert verify_pnk_identity(PnkSpec(6, 2), 2.0, 1.0, literal=True) < 1e-6


@settings(max_examples=50, deadline=None)
@given(n=st.integers(2, 50), lam=st.floats(-100.0, 100.0, allow_nan=False))
def test_pnk_k1_is_linear(n, lam):
    assert pnk_eval(PnkSpec(n, 1), lam) == pytest.approx(lam - (n - 1), abs=1e-12 * max(1.0, abs(lam), n))


def test_euler_power_scalar():
    assert euler_power(SCALAR, 1.0, 4)[0, 0, 0].real == pytest.approx(0.4096, rel=1e-14)
    assert euler_power(SCALAR, 1.0, 100_000)[0, 0, 0].real == pytest.approx(math.exp(-1), rel=1e-5)


def test_euler_power_beta2_pointwise_oracle():
    grid = GridSpec(-8.0, 8.0, 201)
    fam = make_family("beta_multiplication", {"beta": 2.0}, grid)
    E = euler_power(fam, 0.5, 8)
    lam = 16.0
    for x, Ex in zip(grid.points(), E):
        a = np.array([[-(1 + x * x), x * x], [0.0, -(1 + x * x)]])
        F = lam * np.linalg.inv(lam * np.eye(2) - a)
        assert np.allclose(Ex, np.linalg.matrix_power(F, 8), rtol=1e-10, atol=1e-14)


def test_euler_power_singular_family():
    fam = make_family("singular_c01", {"beta": 0.5}, GridSpec(0.0, 50.0, 200, spacing="log"))
    E = euler_power(fam, 1.0, 16)
    F = fam.resolvent(16.0) * 16.0
    ref = F
    for _ in range(15):
        ref = ref @ F
    assert np.allclose(E.d, ref.d) and np.allclose(E.u, ref.u)


@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_euler_power_limit(t):
    for fam in (SCALAR, NILPOTENT):
        errs = [float(fam.norm(euler_power(fam, t, n) - fam.semigroup(t))) for n in (10, 100, 1000)]
        assert errs[-1] < 1e-3 and errs[0] > errs[1] > errs[2]


def test_integrated_euler_examples():
    v1 = integrated_euler(SCALAR, 1.0, 1, 256)
    assert v1[0, 0, 0].real == pytest.approx(1 - math.exp(-1), abs=5e-3)
    v2 = integrated_euler(SCALAR, 1.0, 2, 256)
    assert v2[0, 0, 0].real == pytest.approx(math.exp(-1), abs=5e-3)


def test_integrated_euler_beta3_against_contour():
    fam = make_family("beta_multiplication", {"beta": 3.0})
    ref = reference_value(fam, 1.0, 2, method="contour")
    v = integrated_euler(fam, 1.0, 2, 512, alpha=1.5)
    assert fam.norm(v - ref) / fam.norm(ref) < 1e-2


def test_integrated_euler_alpha_range():
    with pytest.raises(EulerError):
        integrated_euler(SCALAR, 1.0, 1, 64, alpha=1.5)
    with pytest.raises(EulerError):
        integrated_euler(SCALAR, 1.0, 2, 64, alpha=0.5)
    with pytest.raises(EulerError):
        integrated_euler(SCALAR, 1.0, 3, 3)


def test_integrated_euler_mesh_independence():
    fam = make_family("beta_multiplication", {"beta": 1.0})
    a = integrated_euler(fam, 1.0, 1, 64, n_panels=30)
    b = integrated_euler(fam, 1.0, 1, 64, n_panels=60)
    assert fam.norm(a - b) < 1e-10


def test_origin_singularity_slope():
    fam = make_family("beta_multiplication", {"beta": 3.0}, GridSpec(-1000.0, 1000.0, 1001, spacing="log"))
    for k, alpha in ((1, 0.5), (2, 1.5)):
        assert origin_slope(fam, 64, 1.0, alpha=alpha, k=k) >= alpha - k - 0.1


@pytest.mark.parametrize("fam", [SCALAR, NILPOTENT, make_family("beta_multiplication", {"beta": 1.0})],
                         ids=["scalar", "nilpotent", "beta1"])
def test_convergence_study(fam):
    run = euler_convergence_study(fam, 1.0, 1, [8, 32, 128, 512])
    assert run.decreasing
    assert all(e >= 0 for e in run.errors)
    tol = 1e-2 if fam.kind == "beta_multiplication" else 2e-3
    assert run.errors[-1] < tol
    assert [r[0] for r in run.csv_rows()] == [8, 32, 128, 512]


def test_convergence_study_contour_reference():
    run = euler_convergence_study(SCALAR, 1.0, 1, [8, 32], reference_method="contour")
    assert abs(run.reference[0, 0, 0] - (1 - math.exp(-1))) < 1e-12


def test_convergence_study_validation():
    with pytest.raises(EulerError):
        euler_convergence_study(SCALAR, 1.0, 1, [32, 8])
    with pytest.raises(EulerError):
        EulerRun(1.0, 1, 2.0, [], [], None, [])
