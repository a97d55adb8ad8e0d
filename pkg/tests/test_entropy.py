import math

import numpy as np
import pytest
import scipy.linalg as la

from src.entropy import (
    EntropyParams, SandwichedObjective, cmi, conditional_entropy, dual_alpha, renyi_conditional,
    renyi_entropy, sandwiched_divergence, von_neumann,
)
from src.errors import LayoutError
from src.states import (
    QUBIT_ABR, DensityOperator, ghz_state, max_entangled_ar, product_state, random_density,
    random_pure_state,
)
from src.tensor_core import Operator, SubsystemLayout, kron

A = SubsystemLayout.of(("A", 2))
AC = SubsystemLayout.of(("A", 2), ("C", 2))
ABRE = SubsystemLayout.of(("A", 2), ("B", 2), ("R", 2), ("E", 2))


def _bell(layout=AC):
    v = np.zeros(4)
    v[0] = v[3] = 2 ** -0.5
    return DensityOperator(Operator(layout, np.outer(v, v)))


def _diag(p, layout=A):
    return DensityOperator(Operator(layout, np.diag(p)))


def test_von_neumann_examples():
    assert von_neumann(_bell()) == pytest.approx(0.0, abs=1e-12)
    assert von_neumann(_diag([0.25] * 4, AC)) == pytest.approx(2.0)
    assert von_neumann(_diag([0.25, 0.75])) == pytest.approx(0.811278, abs=1e-6)


def test_conditional_entropy_examples():
    prod = DensityOperator(kron(_diag([0.25, 0.75]).op, _diag([0.5, 0.5], SubsystemLayout.of(("C", 2))).op))
    assert conditional_entropy(prod, "A", "C") == pytest.approx(0.811278, abs=1e-6)
    assert conditional_entropy(_bell(), "A", "C") == pytest.approx(-1.0)
    assert conditional_entropy(ghz_state(), "A", "B") == pytest.approx(0.0, abs=1e-12)


def test_overlapping_labels_are_rejected():
    with pytest.raises(LayoutError, match="overlap"):
        conditional_entropy(ghz_state(), ["A", "B"], "B")
    with pytest.raises(LayoutError):
        cmi(ghz_state(), "A", "R", "A")


def test_cmi_anchors():
    assert cmi(ghz_state(), "A", "R", "B") == pytest.approx(1.0, abs=1e-9)
    assert cmi(max_entangled_ar(), "A", "R", "B") == pytest.approx(2.0, abs=1e-9)
    assert cmi(product_state(seed=3), "A", "R", "B") == pytest.approx(0.0, abs=1e-9)


def test_cmi_is_nonnegative():
    for seed in range(10):
        assert cmi(random_density(QUBIT_ABR, 3, seed), "A", "R", "B") >= -1e-9


def test_dual_alpha():
    assert dual_alpha(1.0) == 1.0
    assert dual_alpha(2.0) == pytest.approx(2 / 3)
    assert dual_alpha(1.5) == pytest.approx(0.75)


def test_params_reject_alpha_out_of_range():
    with pytest.raises(ValueError, match="alpha"):
        EntropyParams(alpha=0.4)
    with pytest.raises(ValueError, match="tolerance"):
        EntropyParams(tolerance=0.0)


def test_sandwiched_divergence_examples():
    rho = random_density(AC, 4, seed=1)
    assert sandwiched_divergence(rho, rho, 2.0) == pytest.approx(0.0, abs=1e-10)
    assert sandwiched_divergence(_diag([1.0, 0.0]), _diag([0.5, 0.5]), 2.0) == pytest.approx(1.0)


def test_sandwiched_divergence_support_violation():
    assert sandwiched_divergence(_diag([0.5, 0.5]), _diag([1.0, 0.0]), 2.0) == math.inf


@pytest.mark.parametrize("alpha", [0.75, 1.5, 2.0])
def test_sandwiched_divergence_matches_direct_formula(alpha):
    rho = random_density(AC, 4, seed=2)
    sigma = random_density(AC, 4, seed=3)
    s = la.fractional_matrix_power(sigma.entries, (1 - alpha) / (2 * alpha))
    inner = s @ rho.entries @ s
    direct = math.log2(np.trace(la.fractional_matrix_power(inner, alpha)).real) / (alpha - 1)
    assert sandwiched_divergence(rho, sigma, alpha) == pytest.approx(direct, abs=1e-9)


def test_renyi_entropy():
    assert renyi_entropy(_diag([0.5, 0.5]), 2.0) == pytest.approx(1.0)
    assert renyi_entropy(_diag([0.25, 0.75]), 1.0) == pytest.approx(0.811278, abs=1e-6)


@pytest.mark.parametrize("alpha", [0.75, 1.5, 2.0])
def test_conditioning_on_uncorrelated_system(alpha):
    rho_a = random_density(A, 2, seed=4)
    sigma_c = random_density(SubsystemLayout.of(("C", 2)), 2, seed=5)
    joint = DensityOperator(kron(rho_a.op, sigma_c.op))
    got = renyi_conditional(joint, "A", "C", EntropyParams(alpha))
    assert got == pytest.approx(renyi_entropy(rho_a, alpha), abs=1e-6)


def test_bell_state_alpha_two():
    assert renyi_conditional(_bell(), "A", "C", EntropyParams(2.0)) == pytest.approx(-1.0, abs=1e-6)


def test_alpha_near_one_approaches_von_neumann():
    rho = random_density(AC, 3, seed=6)
    got = renyi_conditional(rho, "A", "C", EntropyParams(1.0 + 1e-4))
    assert got == pytest.approx(conditional_entropy(rho, "A", "C"), abs=1e-3)


def test_alpha_one_dispatches_to_von_neumann():
    rho = random_density(AC, 3, seed=7)
    assert renyi_conditional(rho, "A", "C", EntropyParams(1.0)) == conditional_entropy(rho, "A", "C")


def test_empty_conditioning_gives_marginal_entropy():
    rho = random_density(AC, 3, seed=8)
    got = renyi_conditional(rho, "A", (), EntropyParams(2.0))
    assert got == pytest.approx(renyi_entropy(rho.marginal("A"), 2.0))


@pytest.mark.parametrize("alpha", [1.25, 1.5, 2.0])
def test_duality_on_pure_states(alpha):
    for seed in range(3):
        rho = random_pure_state(ABRE, seed).density()
        h_re = renyi_conditional(rho, "A", ["R", "E"], EntropyParams(alpha))
        h_b = renyi_conditional(rho, "A", "B", EntropyParams(dual_alpha(alpha)))
        assert abs(h_re + h_b) <= 1e-5


def test_monotone_in_alpha_and_bounded():
    rho = random_density(QUBIT_ABR, 2, seed=9)
    values = [renyi_conditional(rho, "A", ["B", "R"], EntropyParams(a)) for a in np.linspace(1.1, 2.0, 5)]
    assert all(b <= a + 1e-7 for a, b in zip(values, values[1:]))
    assert all(-1.0 - 1e-7 <= v <= 1.0 + 1e-7 for v in values)


@pytest.mark.parametrize("alpha", [0.75, 2.0])
def test_gradient_matches_finite_differences(alpha):
    rho = random_density(AC, 4, seed=10)
    obj = SandwichedObjective(rho.entries, 2, 2, alpha)
    rng = np.random.default_rng(11)
    x = obj.start_point() + 0.1 * rng.standard_normal(8)
    _, grad = obj(x)
    h = 1e-6
    numeric = np.array([
        (obj.value(x + h * e) - obj.value(x - h * e)) / (2 * h) for e in np.eye(x.size)
    ])
    np.testing.assert_allclose(grad, numeric, atol=1e-6)
