import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from qhmc_kit.core import ValidationError, make_rng
from qhmc_kit.targets import (
    FactorizationState,
    QuadratureReference,
    asymmetric_well_target,
    bridge_target,
    denoise_target,
    double_well_target,
    finite_diff_check,
    gaussian_mixture_target,
    gaussian_records,
    gaussian_target,
    lp_target,
    piecewise_well_target,
    prepare_regression,
    quadratic_target,
    sign,
    spiky_smooth_target,
)

X0 = math.log(1001.0) / 1000.0


def test_sign_of_zero_is_positive():
    assert sign(0.0) == 1.0
    assert np.array_equal(sign(np.array([-2.0, 0.0, 3.0])), [-1.0, 1.0, 1.0])


# --- lp ----------------------------------------------------------------------


def test_lp_examples():
    U = lp_target(1.0, eps0=0.0)
    assert U.potential(np.array([2.0])) == 2.0
    assert U.gradient(np.array([2.0]))[0] == 1.0
    U = lp_target(0.5, eps0=0.0)
    assert U.potential(np.array([4.0])) == 2.0
    assert U.gradient(np.array([4.0]))[0] == 0.25


def test_lp_gradient_finite_at_zero():
    g = lp_target(0.5, lam=3.0, eps0=1e-8).gradient(np.array([0.0]))[0]
    assert np.isfinite(g)
    assert g == pytest.approx(0.5 * 1e8 * 3.0, rel=1e-12)


@settings(deadline=None, max_examples=50)
@given(x=st.floats(-50, 50), p=st.sampled_from([0.1, 0.5, 1.0]))
def test_lp_potential_even(x, p):
    U = lp_target(p, lam=2.0, d=2)
    v = np.array([x, -0.5 * x])
    assert U.potential(v) == U.potential(-v)


def test_lp_reference_matches_laplace_and_quadrature():
    ref = lp_target(1.0).reference()
    u = np.linspace(0.001, 0.999, 101)
    assert np.allclose(ref.ppf(u), stats.laplace().ppf(u), atol=1e-10)
    U = lp_target(0.5)
    quad = QuadratureReference(lambda v: np.sqrt(np.abs(v)), -400.0, 400.0, (0.0,))
    assert np.allclose(U.reference().ppf(u), quad.ppf(u), atol=2e-3)
    assert U.reference().var() == pytest.approx(quad.var(), rel=1e-3)


def test_lp_fd_away_from_zero():
    assert finite_diff_check(lp_target(1.0, d=3), np.array([0.7, -1.2, 2.0])).max_error <= 1e-6


# --- piecewise targets -------------------------------------------------------


def test_piecewise_well_examples():
    U = piecewise_well_target()
    assert U.potential(np.array([-1.0])) == 0.0
    assert U.potential(np.array([0.5])) == -2.0
    assert U.potential(np.array([2.0])) == 1.0
    assert U.gradient(np.array([2.0]))[0] == 1.0


def test_spiky_smooth_examples():
    U = spiky_smooth_target()
    assert U.potential(np.array([X0])) == pytest.approx(1000 * X0, abs=1e-12)
    assert 1000 * X0 == pytest.approx(6.90875, abs=1e-5)
    assert U.potential(np.array([0.0])) == 0.0
    assert abs(U.gradient(np.array([0.0]))[0]) == 1000.0
    assert U.potential(np.array([1.0])) == pytest.approx(1 + 999 * X0, abs=1e-12)
    with pytest.raises(ValidationError):
        spiky_smooth_target(0.0)


def test_double_well_examples():
    U = double_well_target()
    r2 = np.array([math.sqrt(2.0)])
    assert U.potential(r2) == pytest.approx(-4.0, abs=1e-12)
    assert U.gradient(r2)[0] == pytest.approx(0.0, abs=1e-12)
    assert U.potential(np.zeros(1)) == 0.0 and U.gradient(np.zeros(1))[0] == 0.0
    assert U.potential(np.array([2.0])) == 0.0 and U.gradient(np.array([2.0]))[0] == 16.0


def test_asymmetric_well_examples():
    U = asymmetric_well_target()
    assert U.potential(np.array([-2.0])) == 2.0
    assert U.potential(np.array([1.0])) == 3.0
    assert U.gradient(np.array([-1.0]))[0] == -1.0


@pytest.mark.parametrize("target,breaks", [
    (piecewise_well_target(), [-3.0, 0.0, 1.0]),
    (spiky_smooth_target(), [-X0, X0]),
    (asymmetric_well_target(), [0.0]),
])
def test_continuity_at_breakpoints(target, breaks):
    for b in breaks:
        lo = target.potential(np.array([np.nextafter(b, -np.inf)]))
        hi = target.potential(np.array([np.nextafter(b, np.inf)]))
        assert abs(lo - hi) <= 1e-9


def test_asymmetric_reference_is_exact():
    ref = asymmetric_well_target().reference()
    quad = QuadratureReference(asymmetric_well_target().potential_vec, -60.0, 30.0, (0.0,))
    u = np.linspace(0.01, 0.99, 99)
    assert np.allclose(ref.ppf(u), quad.ppf(u), atol=1e-4)
    assert ref.cdf(0.0) == pytest.approx(0.75)


def test_double_well_reference_mass_symmetric():
    ref = double_well_target().reference()
    assert ref.cdf(0.0) == pytest.approx(0.5, abs=1e-6)


# --- smooth targets: finite-difference properties ----------------------------


def smooth_targets():
    rng = make_rng(0)
    A = rng.standard_normal((5, 5))
    return [
        (gaussian_target(np.diag([100.0, 1.0])), 2, 5.0),
        (gaussian_mixture_target([0.5, 0.5], [np.diag([1.0, 100.0]), np.diag([100.0, 1.0])]), 2, 5.0),
        (quadratic_target(A + A.T), 5, 2.0),
        (double_well_target(), 1, 2.5),
    ]


@pytest.mark.parametrize("idx", range(4))
def test_smooth_gradients_match_finite_differences(idx):
    target, d, scale = smooth_targets()[idx]
    rng = make_rng(idx)
    for _ in range(100):
        x = scale * rng.uniform(-1, 1, d)
        assert finite_diff_check(target, x, h=1e-5).max_error <= 1e-5


def test_piecewise_fd_away_from_kinks():
    rng = make_rng(1)
    targets = [(piecewise_well_target(), [-3.0, 0.0, 1.0]), (spiky_smooth_target(), [-X0, X0, 0.0]),
               (asymmetric_well_target(), [0.0])]
    for target, kinks in targets:
        done = 0
        while done < 100:
            x = rng.uniform(-5, 5, 1)
            if min(abs(x[0] - k) for k in kinks) < 1e-3:
                continue
            assert finite_diff_check(target, x).max_error <= 1e-5
            done += 1


def test_gaussian_examples():
    U = gaussian_target(np.diag([100.0, 1.0]))
    assert U.potential(np.array([10.0, 1.0])) == pytest.approx(1.0)
    with pytest.raises(ValidationError):
        gaussian_target(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_mixture_symmetry_and_fd_at_point():
    U = gaussian_mixture_target([0.5, 0.5], [np.diag([1.0, 100.0]), np.diag([100.0, 1.0])])
    assert np.allclose(U.gradient(np.zeros(2)), 0.0)
    chk = finite_diff_check(U, np.array([3.0, 1.0]))
    assert np.max(np.abs(chk.analytic - chk.numeric)) <= 1e-6
    with pytest.raises(ValidationError):
        gaussian_mixture_target([0.6, 0.6], [np.eye(2), np.eye(2)])


def test_quadratic_examples():
    U = quadratic_target(np.array([[16.0]]))
    assert U.potential(np.array([1.0])) == 8.0 and U.gradient(np.array([1.0]))[0] == 16.0
    Z = quadratic_target(np.zeros((3, 3)))
    x = np.array([1.0, -2.0, 3.0])
    assert Z.potential(x) == 0.0 and np.all(Z.gradient(x) == 0.0)
    assert finite_diff_check(quadratic_target(np.diag([1.0, 4.0])), np.array([0.3, -2.0])).max_error <= 1e-8


# --- stochastic ----------------------------------------------------------------


def test_full_batch_matches_full_target():
    centers = make_rng(0).normal(0, 3, 200)
    T = gaussian_records(centers, batch_size=200)
    x = np.array([0.7])
    batch = T.sample_batch(make_rng(1))
    assert T.minibatch_potential(x, batch) == pytest.approx(T.potential(x), rel=1e-10)
    full = 0.5 * (x[0] - centers.mean()) ** 2 + 0.5 * centers.var()
    assert T.potential(x) == pytest.approx(full, rel=1e-10)
    assert T.gradient(x)[0] == pytest.approx(x[0] - centers.mean(), rel=1e-10)


def test_unit_batch_gradient_unbiased():
    centers = make_rng(0).normal(0, 3, 200)
    T = gaussian_records(centers, batch_size=1)
    rng = make_rng(2)
    x = np.array([0.4])
    g = np.array([T.minibatch_gradient(x, T.sample_batch(rng))[0] for _ in range(10_000)])
    se = g.std() / math.sqrt(g.size)
    assert abs(g.mean() - T.gradient(x)[0]) <= 3 * se


def test_batch_sequence_reproducible_and_without_replacement():
    T = gaussian_records(np.arange(50.0), batch_size=10)
    a = [T.sample_batch(make_rng(5)) for _ in range(3)]
    b = T.sample_batch(make_rng(5))
    assert all(np.array_equal(x, b) for x in a)
    assert np.unique(b).size == 10
    with pytest.raises(ValidationError):
        gaussian_records(np.arange(5.0), batch_size=6)


# --- bridge regression ----------------------------------------------------------


def synthetic_regression(seed=0, n=120, k=6):
    rng = make_rng(seed)
    X = rng.standard_normal((n, k))
    y = X @ rng.standard_normal(k) * 50 + rng.normal(0, 20, n) + 150
    return prepare_regression(X, y, n_train=80, seed=seed)


def test_bridge_zero_coefficients():
    data = synthetic_regression()
    U = bridge_target(data, mu=100.0, lam=10.0)
    n = data.X_train.shape[0]
    assert U.potential(np.zeros(U.dim)) == pytest.approx(100.0 / (2 * n) * np.sum(data.y_train**2))


def test_bridge_least_squares_stationary():
    data = synthetic_regression(1)
    U = bridge_target(data, mu=100.0, lam=0.0)
    beta, *_ = np.linalg.lstsq(data.X_train, data.y_train, rcond=None)
    assert np.max(np.abs(U.gradient(beta))) <= 1e-6


def test_bridge_fd_away_from_zero():
    data = synthetic_regression(2)
    U = bridge_target(data, mu=100.0, lam=10.0, p=0.5)
    rng = make_rng(3)
    beta = rng.choice([-1, 1], U.dim) * rng.uniform(0.2, 1.0, U.dim)
    chk = finite_diff_check(U, beta)
    rel = np.abs(chk.analytic - chk.numeric) / np.abs(chk.numeric)
    assert rel.max() <= 1e-5


def test_bridge_dimension_mismatch():
    U = bridge_target(synthetic_regression(), mu=1.0, lam=1.0)
    with pytest.raises(ValidationError):
        U.potential(np.zeros(U.dim + 1))


def test_regression_standardisation():
    data = synthetic_regression(4)
    Xt = data.X_train
    assert np.all(np.abs(Xt.mean(axis=0)) < 1e-9)
    assert np.allclose(Xt.var(axis=0), 1.0, atol=1e-6)
    assert abs(data.y_train.mean()) < 1e-9
    again = synthetic_regression(4)
    assert np.array_equal(data.train, again.train)


# --- denoising -----------------------------------------------------------------


def test_denoise_exact_outlier_fit():
    Y = make_rng(0).uniform(0, 1, (6, 5))
    U = denoise_target(Y, r=2)
    x = U.pack(FactorizationState(np.zeros((6, 2)), np.zeros((2, 5)), Y.copy()))
    assert U.potential(x) == pytest.approx(10.0 * np.sum(np.sqrt(Y)), rel=1e-12)


def test_denoise_exact_low_rank_fit():
    rng = make_rng(1)
    A, B = rng.standard_normal((6, 2)), rng.standard_normal((2, 5))
    U = denoise_target(A @ B, r=2)
    x = U.pack(FactorizationState(A, B, np.zeros((6, 5))))
    assert U.potential(x) == pytest.approx(0.5 * (np.sum(A * A) + np.sum(B * B)), rel=1e-12)


def test_denoise_gradient_blocks():
    rng = make_rng(2)
    Y = rng.uniform(0, 1, (6, 6))
    U = denoise_target(Y, r=2)
    S = rng.choice([-1, 1], (6, 6)) * rng.uniform(0.1, 0.6, (6, 6))
    x = U.pack(FactorizationState(rng.standard_normal((6, 2)), rng.standard_normal((2, 6)), S))
    chk = finite_diff_check(U, x, h=1e-6)
    rel = np.abs(chk.analytic - chk.numeric) / np.maximum(np.abs(chk.numeric), 1e-2)
    assert rel.max() <= 1e-4


def test_denoise_layout_and_svd_init():
    rng = make_rng(3)
    A, B = rng.standard_normal((5, 3)), rng.standard_normal((3, 4))
    U = denoise_target(A @ B, r=3)
    st_ = FactorizationState(A, B, rng.standard_normal((5, 4)))
    x = U.pack(st_)
    assert np.array_equal(x[:15], A.ravel()) and np.array_equal(x[15:27], B.ravel())
    back = U.unpack(x)
    assert np.array_equal(back.S, st_.S)
    init = U.unpack(U.svd_init())
    assert np.allclose(init.A @ init.B, A @ B, atol=1e-10)
    assert np.all(init.S == 0)
    with pytest.raises(ValidationError):
        denoise_target(np.zeros((4, 3)), r=4)
