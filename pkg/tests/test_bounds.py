import math

import numpy as np
import pytest

from src.bounds import (
    Dims, asymptotic_target, bound_decay, bound_report, decay_crossover, epsilon_n, epsilon_n_dual,
    finite_n_rate, theta_n, xi,
)
from src.entropy import EntropyParams, dual_alpha, renyi_conditional
from src.states import ghz_state, max_entangled_ar, product_state, purify, random_density, QUBIT_ABR

QUBITS = Dims(2, 2, 2, 2)


def test_xi_values():
    assert xi(0.0) == 0.0
    assert xi(1.0) == pytest.approx(1 + math.sqrt(2))
    with pytest.raises(ValueError):
        xi(-0.1)


def test_xi_is_monotone_and_within_envelope():
    grid = np.linspace(0.0, 4.0, 10_001)
    values = np.array([xi(e) for e in grid])
    assert np.all(np.diff(values) > 0)
    small = grid <= 2.0
    assert np.all(values[small] <= 2 * np.sqrt(grid[small]) + grid[small] + 1e-12)


def test_epsilon_example():
    assert epsilon_n(2.0, 1, 2, 2, 0.0, 4.0) == pytest.approx(8.0)
    assert epsilon_n(2.0, 1, 2, 2, 0.0, 400.0) < 1e-20


def test_theta_example():
    assert theta_n(2.0, 1, 2, 2, 0.0, 5.0, 1.0) == pytest.approx(8.0)
    assert theta_n(2.0, 1, 2, 2, 0.0, 400.0, 1.0) < 1e-20


@pytest.mark.parametrize("alpha", [1.5, 2.0])
def test_raising_log2_F_scales_theta(alpha):
    k = (alpha - 1) / (2 * alpha)
    base = theta_n(alpha, 3, 2, 2, 0.2, 6.0, 2.0)
    assert theta_n(alpha, 3, 2, 2, 0.2, 6.0, 3.0) == pytest.approx(base * 2 ** k)


def test_natural_base_switch():
    assert epsilon_n(2.0, 1, 2, 2, 0.0, 8.0, exp_base=math.e) == pytest.approx(8 * math.exp(-1.0))


def test_alpha_range_is_enforced():
    with pytest.raises(ValueError, match="alpha"):
        epsilon_n(1.0, 1, 2, 2, 0.0, 1.0)
    with pytest.raises(ValueError, match="alpha"):
        theta_n(2.5, 1, 2, 2, 0.0, 1.0, 1.0)


def test_rate_example():
    assert finite_n_rate(2.0, 0.1, 1, QUBITS, 0.0, 0.0) == pytest.approx(8.1)
    assert finite_n_rate(2.0, 0.1, 1, QUBITS, 0.0, 0.0, include_overhead=False) == pytest.approx(0.1)


@pytest.mark.parametrize("delta", [0.0, -0.1])
def test_rate_needs_positive_delta(delta):
    with pytest.raises(ValueError, match="delta"):
        finite_n_rate(2.0, delta, 1, QUBITS, 0.0, 0.0)


def test_bound_report_accepts_zero_delta():
    report = bound_report(2.0, 0.0, 2, QUBITS, 1.0, 2.0, 0.1, 0.0)
    assert report.rate_formula == pytest.approx(0.1 + 8 * math.log2(3) / 2)


def test_epsilon_dual_form_from_common_purification():
    rho = random_density(QUBIT_ABR, 2, seed=21)
    psi = purify(rho).density()
    alpha = 1.5
    h_re = renyi_conditional(psi, "A", ["R", "E"], EntropyParams(alpha))
    h_b = renyi_conditional(psi, "A", "B", EntropyParams(dual_alpha(alpha)))
    direct = epsilon_n(alpha, 2, 2, 2, h_re, 1.0)
    dual = epsilon_n_dual(alpha, 2, 2, 2, h_b, 1.0)
    assert direct == pytest.approx(dual, abs=1e-9)


def test_bound_report_fields():
    report = bound_report(2.0, 0.1, 2, QUBITS, 2.0, 3.0, 0.3, -0.2, cmi_target=0.5)
    assert report.alpha_tilde == pytest.approx(2 / 3)
    assert report.H_alpha_A_given_RE == pytest.approx(-0.3)
    assert report.rate == pytest.approx(1.5)
    assert report.chain_bound_erasure == pytest.approx(2 * xi(report.eps_bound) + 2 * report.theta_bound)
    expected_rate = 0.3 + 0.2 + 4 * 2 * math.log2(3) / 2 + 0.1
    assert report.rate_formula == pytest.approx(expected_rate, abs=1e-12)
    row = report.to_dict()
    assert row["dimA"] == 2 and "dims" not in row
    assert row["vacuous"] is report.vacuous


def test_small_n_bounds_are_flagged_vacuous():
    report = bound_report(2.0, 0.1, 1, QUBITS, 1.0, 2.0, 1.0, 0.0)
    assert report.eps_bound > 2
    assert report.eps_vacuous and report.vacuous


def test_asymptotic_targets():
    assert asymptotic_target(product_state(seed=4)) == pytest.approx(0.0, abs=1e-9)
    assert asymptotic_target(ghz_state()) == pytest.approx(1.0, abs=1e-9)
    assert asymptotic_target(max_entangled_ar()) == pytest.approx(2.0, abs=1e-9)


def test_ghz_rate_limit_matches_cmi():
    rho = ghz_state()
    h_b = renyi_conditional(rho, "A", "B", EntropyParams(dual_alpha(1.001)))
    h_br = renyi_conditional(rho, "A", ["B", "R"], EntropyParams(1.001))
    rate = finite_n_rate(1.001, 1e-6, 1, QUBITS, h_b, h_br, include_overhead=False)
    assert rate == pytest.approx(1.0, abs=1e-2)


@pytest.mark.parametrize("seed", [31, 32, 33])
def test_rate_converges_to_cmi(seed):
    rho = random_density(QUBIT_ABR, 2, seed=seed)
    alpha = 1.001
    h_b = renyi_conditional(rho, "A", "B", EntropyParams(dual_alpha(alpha)))
    h_br = renyi_conditional(rho, "A", ["B", "R"], EntropyParams(alpha))
    dims = Dims(2, 2, 2, 2)
    rate = finite_n_rate(alpha, 0.01, 10 ** 6, dims, h_b, h_br)
    assert rate - asymptotic_target(rho) <= 0.02


def test_decay_crossover():
    assert decay_crossover(0.1, QUBITS) == math.ceil(8 / (0.1 * math.log(2)))
    with pytest.raises(ValueError):
        decay_crossover(0.0, QUBITS)


def test_bounds_decay_past_crossover():
    profile = bound_decay(2.0, 0.5, QUBITS, 0.4, -0.3)
    assert profile.n_values[0] == profile.n0
    assert len(profile.n_values) == 51
    assert profile.strictly_decreasing()
    assert all(b < a for a, b in zip(profile.eps, profile.eps[1:]))
    assert all(b < a for a, b in zip(profile.theta, profile.theta[1:]))
