import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qhmc_kit.core import ScalarLogNormal, ValidationError, make_rng
from qhmc_kit.diagnostics import (
    PSNR_CAP,
    compression_rate,
    escape_ratio,
    histogram,
    moment_report,
    psnr,
    test_mse,
    wasserstein1,
    wasserstein1_grid,
)
from qhmc_kit.integrators import PathConfig
from qhmc_kit.samplers import SamplerConfig, qhmc_sample, run_chains
from qhmc_kit.targets import LpReference, double_well_target, lp_target

finite = st.floats(-100, 100, allow_nan=False)


# --- Wasserstein-1 ---------------------------------------------------------


def test_w1_identical_is_zero():
    x = make_rng(0).normal(size=500)
    assert wasserstein1(x, x.copy()) == 0.0


def test_w1_point_masses():
    assert wasserstein1([0.0], [1.0]) == 1.0
    assert wasserstein1([0.0], np.array([1.0, 1.0, 1.0])) == pytest.approx(1.0)


def test_w1_empty_input():
    with pytest.raises(ValidationError):
        wasserstein1([], [1.0])
    with pytest.raises(ValidationError):
        wasserstein1([1.0], np.array([]))


def test_w1_laplace_draws_vs_cdf():
    draws = make_rng(1).laplace(size=100_000)
    assert wasserstein1(draws, LpReference(1.0, 1.0)) <= 0.02


def test_w1_accepts_quantile_callable():
    from scipy import stats
    draws = make_rng(2).normal(size=20_000)
    a = wasserstein1(draws, stats.norm())
    b = wasserstein1(draws, stats.norm.ppf)
    assert a == b
    assert a < 0.03


def test_w1_shift():
    x = make_rng(3).normal(size=1000)
    assert wasserstein1(x, x + 0.7) == pytest.approx(0.7, abs=1e-12)


@settings(deadline=None, max_examples=50)
@given(arrays(float, 30, elements=finite), arrays(float, 30, elements=finite), arrays(float, 30, elements=finite))
def test_w1_is_a_metric(a, b, c):
    ab, ba = wasserstein1(a, b), wasserstein1(b, a)
    assert abs(ab - ba) <= 1e-9
    assert wasserstein1(a, c) <= ab + wasserstein1(b, c) + 1e-9


@settings(deadline=None, max_examples=30)
@given(arrays(float, st.integers(1, 200), elements=finite), st.data())
def test_w1_exact_and_grid_paths_agree(a, data):
    b = data.draw(arrays(float, a.size, elements=finite))
    # exact only when the grid is a multiple of the sample size
    assert wasserstein1(a, b) == pytest.approx(wasserstein1_grid(a, b, grid=a.size * 50), abs=1e-3)


def test_w1_exact_and_grid_paths_agree_default_grid():
    rng = make_rng(4)
    a, b = rng.normal(size=1000), rng.laplace(size=1000)
    assert abs(wasserstein1(a, b) - wasserstein1_grid(a, b)) <= 1e-3


# --- histogram -------------------------------------------------------------


@settings(deadline=None, max_examples=30)
@given(arrays(float, st.integers(1, 300), elements=finite), st.integers(1, 60))
def test_histogram_density_integrates_to_one(x, bins):
    h = histogram(x, bins=bins)
    assert np.sum(h.density * np.diff(h.edges)) == pytest.approx(1.0, abs=1e-9)


def test_histogram_centers():
    h = histogram([0.0, 1.0], bins=2, range=(0.0, 1.0))
    assert h.centers == pytest.approx([0.25, 0.75])
    assert h.counts.tolist() == [1, 1]


# --- escape ratio ----------------------------------------------------------


def test_escape_never_moves():
    chains = [np.full((200, 1), -1.0) for _ in range(5)]
    iters, frac = escape_ratio(chains, barrier=0.0, check_interval=50)
    assert iters.tolist() == [50, 100, 150, 200]
    assert np.all(frac == 0.0)


def test_escape_counts_from_first_checkpoint():
    moved = np.full((100, 1), 1.0)
    moved[0] = -1.0  # start on the left, cross on iteration 2
    stay = np.full((100, 1), -1.0)
    iters, frac = escape_ratio([moved, stay], check_interval=10)
    assert np.all(frac == 0.5)


def test_escape_explicit_side_counts_first_state():
    crossed = np.full((20, 1), 1.0)
    _, frac = escape_ratio([crossed], check_interval=10, start_side="left")
    assert np.all(frac == 1.0)


def test_escape_length_mismatch():
    with pytest.raises(ValidationError):
        escape_ratio([np.zeros((10, 1)), np.zeros((12, 1))])


def test_escape_curve_double_well_monotone():
    cfg = SamplerConfig(mass=ScalarLogNormal(1.0, 2.0), n_paths=500)
    chains = run_chains(qhmc_sample, cfg, double_well_target(), [[np.sqrt(2)]] * 20, make_rng(0), workers=1)
    _, frac = escape_ratio(chains, check_interval=50)
    assert np.all(np.diff(frac) >= 0)
    assert np.all((frac >= 0) & (frac <= 1))


# --- error bars ------------------------------------------------------------


def test_moment_report_identical_runs():
    runs = [{"mean": 0.3, "var": np.array([1.0, 2.0])}] * 20
    rep = moment_report(runs)
    assert rep["mean"].std == 0.0
    assert np.all(rep["var"].std == 0.0)
    assert rep["var"].n_runs == 20


def test_moment_report_empty():
    with pytest.raises(ValidationError):
        moment_report([])


def _lp_means(n_paths, seed):
    cfg = SamplerConfig(path=PathConfig(0.03, 5), mass=ScalarLogNormal(0.0, 1.0), n_paths=n_paths)
    chains = run_chains(qhmc_sample, cfg, lp_target(1.0), [[0.0]] * 20, make_rng(seed), workers=1)
    return moment_report([{"mean": c.samples.mean()} for c in chains])["mean"]


def test_error_bars_symmetry_and_scaling():
    short, long = _lp_means(2_000, 0), _lp_means(8_000, 1)
    se = long.std / np.sqrt(long.n_runs)
    assert abs(long.mean) <= 3 * se
    assert 0.4 <= long.std / short.std <= 0.65


# --- PSNR --------------------------------------------------------------------


def test_psnr_examples():
    img = make_rng(0).random((8, 8))
    assert psnr(img, img) == PSNR_CAP
    assert psnr(np.full((4, 4), 0.6), np.full((4, 4), 0.5)) == pytest.approx(20.0)
    noisy = np.zeros(100)
    noisy[:50], noisy[50:] = 0.1, -0.1
    assert psnr(noisy, np.zeros(100)) == pytest.approx(20.0)


def test_psnr_shape_mismatch():
    with pytest.raises(ValidationError):
        psnr(np.zeros((2, 2)), np.zeros((2, 3)))


def test_psnr_decreases_with_noise():
    rng = make_rng(5)
    clean = rng.random((28, 28))
    z = rng.normal(size=clean.shape)
    values = [psnr(clean + s * z, clean) for s in (0.01, 0.02, 0.05, 0.1, 0.2)]
    assert all(a > b for a, b in zip(values, values[1:]))


# --- regression MSE ----------------------------------------------------------


def test_mse_perfect_fit():
    rng = make_rng(0)
    X, beta = rng.normal(size=(40, 5)), rng.normal(size=5)
    rep = test_mse(np.tile(beta, (10, 1)), X, X @ beta)
    assert rep.posterior_mean_mse == pytest.approx(0.0, abs=1e-24)
    assert rep.mean_per_sample_mse == pytest.approx(0.0, abs=1e-24)


def test_mse_zero_chain():
    rng = make_rng(1)
    X, y = rng.normal(size=(30, 4)), rng.normal(size=30)
    assert test_mse(np.zeros((5, 4)), X, y).posterior_mean_mse == pytest.approx(np.mean(y**2))


def test_mse_recomputation_oracle():
    rng = make_rng(2)
    X, y = rng.normal(size=(25, 3)), rng.normal(size=25)
    for _ in range(10):
        B = rng.normal(size=(rng.integers(1, 50), 3))
        rep = test_mse(B, X, y)
        mean_beta = [sum(B[i, j] for i in range(len(B))) / len(B) for j in range(3)]
        pred = [sum(X[k, j] * mean_beta[j] for j in range(3)) for k in range(25)]
        assert rep.posterior_mean_mse == pytest.approx(sum((p - t) ** 2 for p, t in zip(pred, y)) / 25, rel=1e-12)
        per = [np.mean((X @ b - y) ** 2) for b in B]
        assert rep.per_sample_mse == pytest.approx(per, rel=1e-12)


# --- compression rate --------------------------------------------------------


def test_compression_examples():
    w = np.zeros(1000)
    w[:100] = 0.5
    assert compression_rate(w) == 10.0
    assert compression_rate(make_rng(0).normal(size=50), threshold=0.0) == 1.0
    assert compression_rate(np.zeros(10)) == float("inf")


def test_compression_brute_force():
    w = make_rng(3).normal(scale=0.02, size=777)
    kept = sum(1 for v in w if abs(v) >= 0.01)
    assert compression_rate(w, 0.01) == pytest.approx(777 / kept)
