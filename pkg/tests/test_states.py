import numpy as np
import pytest

from src.config import ResourceCaps
from src.errors import CapacityError, InvalidStateError
from src.states import (
    QUBIT_ABR, DensityOperator, PureState, builtin_state, classical_correlated, ghz_state,
    max_entangled_ar, maximally_mixed, n_copies_grouped, n_copies_grouped_pure, product_state,
    purify, random_density, random_pure_state, reduce_vector,
)
from src.tensor_core import Operator, SubsystemLayout, kron, partial_trace, trace_norm

A = SubsystemLayout.of(("A", 2))
AB = SubsystemLayout.of(("A", 2), ("B", 2))


def test_density_rejects_bad_trace():
    with pytest.raises(InvalidStateError, match="Trace"):
        DensityOperator(Operator(A, np.eye(2)))


def test_density_rejects_negative_eigenvalue():
    with pytest.raises(InvalidStateError, match="Negative"):
        DensityOperator(Operator(A, np.diag([1.5, -0.5])))


def test_pure_state_needs_unit_norm():
    with pytest.raises(InvalidStateError):
        PureState(A, [1.0, 1.0])
    psi, norm_sq = PureState.from_vector(A, [1.0, 1.0])
    assert norm_sq == pytest.approx(2.0)
    np.testing.assert_allclose(psi.amplitudes, [2 ** -0.5, 2 ** -0.5])


def test_purify_has_minimal_environment():
    rho = random_density(QUBIT_ABR, 2, seed=3)
    psi = purify(rho)
    assert psi.layout.labels == ("A", "B", "R", "E")
    assert psi.layout.dim("E") == 2
    back = psi.reduced(["A", "B", "R"])
    assert trace_norm(back.op - rho.op) < 1e-9


def test_purify_orders_environment_by_weight():
    rho = DensityOperator(Operator(A, np.diag([0.25, 0.75])))
    e = purify(rho).reduced("E").entries
    np.testing.assert_allclose(np.diag(e).real, [0.75, 0.25], atol=1e-12)


def test_n_copies_groups_factors():
    rho = random_density(AB, 4, seed=5)
    two = n_copies_grouped(rho, 2)
    assert two.layout.labels == ("A^2", "B^2")
    assert two.layout.dims == (4, 4)
    rho_a = rho.marginal("A").op
    np.testing.assert_allclose(
        partial_trace(two.op, "A^2").entries, kron(rho_a, rho_a).entries, atol=1e-12
    )


def test_single_copy_relabels_only():
    rho = random_density(AB, 2, seed=6)
    one = n_copies_grouped(rho, 1)
    assert one.layout.labels == ("A^1", "B^1")
    np.testing.assert_allclose(one.entries, rho.entries)


def test_pure_copies_match_density_copies():
    psi = random_pure_state(AB, seed=7)
    lhs = n_copies_grouped_pure(psi, 3).density()
    rhs = n_copies_grouped(psi.density(), 3)
    np.testing.assert_allclose(lhs.entries, rhs.entries, atol=1e-12)


def test_capacity_is_enforced():
    rho = random_density(AB, 2, seed=8)
    with pytest.raises(CapacityError):
        n_copies_grouped(rho, 3, ResourceCaps(max_density_dim=32))
    with pytest.raises(CapacityError):
        n_copies_grouped_pure(random_pure_state(AB, 1), 4, ResourceCaps(max_pure_dim=64))


def test_reduce_vector_matches_density_marginal():
    psi = random_pure_state(QUBIT_ABR, seed=9)
    got = reduce_vector(psi.layout, psi.amplitudes, ["R", "A"])
    assert got.layout.labels == ("A", "R")
    np.testing.assert_allclose(got.entries, psi.density().marginal(["A", "R"]).entries, atol=1e-12)


def test_random_density_rank_and_seed():
    rho = random_density(QUBIT_ABR, 2, seed=10)
    w = rho.eigenvalues()
    assert np.sum(w > 1e-12) == 2
    np.testing.assert_allclose(rho.entries, random_density(QUBIT_ABR, 2, seed=10).entries)


def test_builtin_states_are_valid():
    for name in ("ghz", "max-entangled-AR", "product", "classical", "random"):
        rho = builtin_state(name, seed=1)
        assert rho.layout.labels == ("A", "B", "R")
    with pytest.raises(ValueError, match="Unknown builtin"):
        builtin_state("werner")


def test_builtin_marginals():
    np.testing.assert_allclose(max_entangled_ar().marginal("B").entries, np.eye(2) / 2)
    np.testing.assert_allclose(ghz_state().marginal("A").entries, np.eye(2) / 2, atol=1e-12)
    np.testing.assert_allclose(classical_correlated().marginal("R").entries, np.eye(2) / 2)
    prod = product_state(seed=2)
    joint = kron(prod.marginal("A").op, prod.marginal(["B", "R"]).op)
    assert trace_norm(joint - prod.op) < 1e-12


def test_maximally_mixed():
    np.testing.assert_allclose(maximally_mixed(AB).entries, np.eye(4) / 4)
