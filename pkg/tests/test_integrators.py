import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qhmc_kit.core import DiagonalMass, ScalarMass, ThermostatState, ValidationError, hamiltonian, make_rng
from qhmc_kit.integrators import PathConfig, is_divergent, leapfrog_path, thermostat_step
from qhmc_kit.targets import FreeParticle, quadratic_target


def oscillator():
    return quadratic_target(np.eye(1))


def max_energy_error(eps, n_steps=100):
    """Largest |H - H0| along a path of single leapfrog steps."""
    U, M = oscillator(), ScalarMass(1.0)
    x, q = np.array([1.0]), np.array([0.0])
    h0 = hamiltonian(U, x, q, M)
    worst = 0.0
    for _ in range(n_steps):
        x, q, _ = leapfrog_path(U, x, q, M, eps, 1)
        worst = max(worst, abs(hamiltonian(U, x, q, M) - h0))
    return worst


def test_path_config_validation():
    with pytest.raises(ValidationError):
        PathConfig(step_size=0.0)
    with pytest.raises(ValidationError):
        PathConfig(n_steps=0)
    with pytest.raises(ValidationError):
        PathConfig(mean_duration=-1.0)


def test_randomized_path_length():
    cfg = PathConfig(step_size=0.1, mean_duration=2.0)
    rng = make_rng(0)
    steps = np.array([cfg.draw_steps(rng) for _ in range(20_000)])
    assert steps.min() >= 1
    # E[round(t / eps)] with t ~ Exp(2) is close to 20
    assert steps.mean() == pytest.approx(20.0, rel=0.03)


def test_free_particle():
    U = FreeParticle(2)
    x0, q0 = np.array([1.0, -2.0]), np.array([0.3, 0.7])
    res = leapfrog_path(U, x0, q0, ScalarMass(1.0, 2), 0.1, 7)
    assert res.x == pytest.approx(x0 + 0.7 * q0, abs=1e-12)
    assert np.array_equal(res.q, q0)


def test_single_step_hand_values():
    res = leapfrog_path(oscillator(), [1.0], [0.0], ScalarMass(1.0), 0.1, 1)
    assert res.x[0] == pytest.approx(0.995, abs=1e-15)
    assert res.q[0] == pytest.approx(-0.09975, abs=1e-15)


def test_one_period_returns_home():
    U, M = oscillator(), ScalarMass(1.0)
    res = leapfrog_path(U, [1.0], [0.0], M, 0.01, 628)
    assert res.x[0] == pytest.approx(1.0, abs=1e-3)
    assert res.q[0] == pytest.approx(0.0, abs=1e-2)
    assert abs(hamiltonian(U, res.x, res.q, M) - 0.5) <= 1e-3


def test_energy_error_is_second_order():
    ratio = max_energy_error(0.1) / max_energy_error(0.05)
    assert 3.5 <= ratio <= 4.5


@settings(deadline=None, max_examples=40)
@given(x0=st.floats(-3, 3), q0=st.floats(-3, 3), m=st.floats(0.1, 10), L=st.integers(1, 30))
def test_reversibility(x0, q0, m, L):
    U, M = quadratic_target(np.array([[2.0]])), ScalarMass(m)
    fwd = leapfrog_path(U, [x0], [q0], M, 0.05, L)
    back = leapfrog_path(U, fwd.x, -fwd.q, M, 0.05, L)
    assert back.x[0] == pytest.approx(x0, abs=1e-8)
    assert back.q[0] == pytest.approx(-q0, abs=1e-8)


def test_step_jacobian_has_unit_determinant():
    U, M, eps = quadratic_target(np.array([[3.0]])), ScalarMass(0.7), 0.1
    z0 = np.array([0.4, -0.2])
    h = 1e-6

    def step(z):
        r = leapfrog_path(U, z[:1], z[1:], M, eps, 1)
        return np.concatenate([r.x, r.q])

    base = step(z0)
    J = np.column_stack([(step(z0 + h * e) - base) / h for e in np.eye(2)])
    assert np.linalg.det(J) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("a,eps", [(16.0, 0.03), (4.0, 0.1), (100.0, 0.01)])
def test_stability_threshold(a, eps):
    U = quadratic_target(np.array([[a]]))
    threshold = eps**2 * a / 4
    stable = leapfrog_path(U, [1.0], [0.0], ScalarMass(1.2 * threshold), eps, 10_000)
    unstable = leapfrog_path(U, [1.0], [0.0], ScalarMass(0.8 * threshold), eps, 10_000)
    assert not stable.divergent and np.abs(stable.x).max() < 10
    assert unstable.divergent


def test_divergence_flag():
    assert is_divergent(np.array([np.nan]))
    assert is_divergent(np.array([0.0, np.inf]))
    assert is_divergent(np.array([2e10]))
    assert not is_divergent(np.array([1e10, -1e10]))


# --- thermostat ------------------------------------------------------------


def test_thermostat_reduces_to_leapfrog_step():
    U, M, eps = quadratic_target(np.diag([1.0, 4.0])), DiagonalMass([1.0, 2.0]), 0.05
    x, q = np.array([0.3, -1.0]), np.array([0.5, 0.2])
    state = ThermostatState(x, q, 0.0, diffusion=0.0)
    new, div = thermostat_step(state, U.gradient, M, eps, make_rng(0), update_xi=False)
    x_exp = x + eps * q / M.diag
    q_exp = q - eps * U.gradient(x_exp)
    assert not div
    assert np.array_equal(new.x, x_exp)
    assert np.array_equal(new.q, q_exp)


def test_thermostat_hand_values():
    state = ThermostatState(np.zeros(2), np.array([1.0, 1.0]), 0.5, thermal_mass=1.0, diffusion=0.0)
    new, _ = thermostat_step(state, lambda z: np.zeros(2), ScalarMass(1.0, 2), 0.1, make_rng(0))
    assert new.q == pytest.approx([0.95, 0.95], abs=1e-15)
    assert new.xi == pytest.approx(0.4805, abs=1e-12)


def test_thermostat_equilibrium_leaves_xi():
    # with zero friction and no force, q stays a unit vector per dimension
    state = ThermostatState(np.zeros(3), np.ones(3), 0.0, diffusion=0.0)
    new, _ = thermostat_step(state, lambda z: np.zeros(3), ScalarMass(1.0, 3), 0.1, make_rng(0))
    assert new.xi == 0.0


def test_thermostat_noise_variance():
    # one step from q=0 with no force: q_new ~ N(0, 2 A eps)
    A, eps = 1.5, 0.2
    rng = make_rng(3)
    draws = []
    for _ in range(40_000):
        s = ThermostatState(np.zeros(1), np.zeros(1), 0.0, diffusion=A)
        new, _ = thermostat_step(s, lambda z: np.zeros(1), ScalarMass(1.0), eps, rng)
        draws.append(new.q[0])
    assert np.var(draws) == pytest.approx(2 * A * eps, rel=0.03)
