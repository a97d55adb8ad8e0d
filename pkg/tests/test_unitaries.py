import numpy as np
import pytest

from src.errors import NotUnitaryError
from src.states import PureState, random_density, random_pure_state
from src.tensor_core import Operator, SubsystemLayout, identity, kron, partial_trace, trace_norm
from src.unitaries import (
    apply_T_W, embed_unitary, haar_unitary, heisenberg_weyl,
    make_partial_isometry, pure_trace_distance, twirl, uhlmann_overlap, uhlmann_unitary,
    unitarity_deviation,
)

FX = SubsystemLayout.of(("F", 2), ("X", 3))


def achieved_overlap(v, target, source, act_on):
    mt = target.cut_matrix(act_on)
    ms = source.cut_matrix(act_on)
    return float(abs(np.trace(mt.conj().T @ v.entries @ ms)))


def test_haar_unitary_is_unitary_and_seeded():
    u = haar_unitary(5, seed=1)
    assert unitarity_deviation(u.entries) < 1e-10
    np.testing.assert_array_equal(u.entries, haar_unitary(5, seed=1).entries)
    assert abs(abs(haar_unitary(1, seed=2).entries[0, 0]) - 1) < 1e-12


def test_haar_first_moment():
    vals = [abs(haar_unitary(2, seed=s).entries[0, 0]) ** 2 for s in range(2000)]
    assert np.mean(vals) == pytest.approx(0.5, abs=0.05)


def test_heisenberg_weyl_qubit_order():
    hw = heisenberg_weyl(2)
    x = np.array([[0, 1], [1, 0]])
    z = np.diag([1, -1])
    for got, want in zip(hw.unitaries, [np.eye(2), z, x, x @ z]):
        np.testing.assert_allclose(got, want, atol=1e-12)


@pytest.mark.parametrize("d", [1, 3, 4])
def test_heisenberg_weyl_is_orthogonal_basis(d):
    hw = heisenberg_weyl(d)
    assert len(hw) == d * d
    gram = np.array([[np.trace(u.conj().T @ v) for v in hw.unitaries] for u in hw.unitaries])
    np.testing.assert_allclose(gram, d * np.eye(d * d), atol=1e-10)


def test_partial_isometry_invariants():
    iso = make_partial_isometry(8, 4, seed=3)
    w = iso.w.entries
    np.testing.assert_allclose(w @ w.conj().T, np.eye(4), atol=1e-10)
    p = iso.projector().entries
    np.testing.assert_allclose(p @ p, p, atol=1e-10)
    assert np.trace(p).real == pytest.approx(4.0, abs=1e-9)
    np.testing.assert_allclose(iso.tau().entries, p / 4)


def test_partial_isometry_rejects_large_target():
    with pytest.raises(ValueError, match="F"):
        make_partial_isometry(4, 8, seed=1)


def test_canonical_isometry_takes_first_rows():
    iso = make_partial_isometry(4, 2, canonical=True)
    np.testing.assert_array_equal(iso.w.entries, np.eye(4)[:2])


def test_T_W_maps_mixed_to_mixed():
    iso = make_partial_isometry(8, 2, seed=4)
    rest = SubsystemLayout.of(("B", 3))
    tau = random_density(rest, 3, seed=5).op
    sigma = kron(identity(iso.source) * (1 / 8), tau)
    out = apply_T_W(iso, sigma)
    assert out.layout.labels == ("F", "B")
    expected = kron(identity(iso.target) * 0.5, tau)
    np.testing.assert_allclose(out.entries, expected.entries, atol=1e-12)


def test_T_W_trace_matches_direct_formula():
    iso = make_partial_isometry(4, 2, seed=6)
    sigma = random_density(SubsystemLayout.of(("A", 4)), 4, seed=7).op
    out = apply_T_W(iso, sigma)
    direct = 2 * np.trace(iso.projector().entries @ sigma.entries).real
    assert out.trace().real == pytest.approx(direct, abs=1e-10)


def test_twirl_single_member_is_identity_map():
    sigma = random_density(FX, 6, seed=8).op
    np.testing.assert_allclose(twirl(heisenberg_weyl(2), 1, sigma).entries, sigma.entries)


def test_full_twirl_depolarizes():
    sigma = random_density(FX, 6, seed=9).op
    out = twirl(heisenberg_weyl(2), 4, sigma)
    expected = kron(identity(FX.sub("F")) * 0.5, partial_trace(sigma, "X"))
    assert trace_norm(out - expected) < 1e-10


def test_two_member_twirl_on_plus_state():
    plus = np.full((2, 2), 0.5)
    sigma = kron(Operator(SubsystemLayout.of(("F", 2)), plus), identity(SubsystemLayout.of(("X", 2))))
    out = twirl(heisenberg_weyl(2), 2, sigma)
    np.testing.assert_allclose(out.entries, np.eye(4) / 2, atol=1e-12)


def test_twirl_rejects_bad_m():
    with pytest.raises(ValueError, match="M"):
        twirl(heisenberg_weyl(2), 5, random_density(FX, 2, seed=1).op)


def test_embed_unitary():
    iso = make_partial_isometry(8, 4, seed=10)
    np.testing.assert_allclose(embed_unitary(iso, identity(iso.target)).entries, np.eye(8), atol=1e-12)
    w_dag = iso.w.entries.conj().T
    for v in heisenberg_weyl(4).operators(iso.target):
        out = embed_unitary(iso, v).entries
        assert unitarity_deviation(out) < 1e-10
        np.testing.assert_allclose(out @ w_dag, w_dag @ v.entries, atol=1e-10)


def test_embed_unitary_full_rank_case():
    iso = make_partial_isometry(4, 4, seed=11)
    v = heisenberg_weyl(4).operators(iso.target)[5]
    w = iso.w.entries
    np.testing.assert_allclose(embed_unitary(iso, v).entries, w.conj().T @ v.entries @ w, atol=1e-12)


def test_embed_unitary_rejects_non_unitary():
    iso = make_partial_isometry(4, 2, seed=12)
    with pytest.raises(NotUnitaryError):
        embed_unitary(iso, identity(iso.target) * 2)


ABC = SubsystemLayout.of(("A", 2), ("B", 2), ("C", 2))


def test_uhlmann_self_alignment():
    psi = random_pure_state(ABC, seed=13)
    v = uhlmann_unitary(psi, psi, ["A", "B"])
    assert achieved_overlap(v, psi, psi, ["A", "B"]) == pytest.approx(1.0, abs=1e-10)
    assert unitarity_deviation(v.entries) < 1e-10


def test_uhlmann_orthogonal_complements():
    ab = SubsystemLayout.of(("A", 2), ("C", 2))
    t = PureState(ab, [1, 0, 0, 0])
    s = PureState(ab, [0, 1, 0, 0])
    v = uhlmann_unitary(t, s, "A")
    assert uhlmann_overlap(t, s, "A") == pytest.approx(0.0)
    assert achieved_overlap(v, t, s, "A") == pytest.approx(0.0, abs=1e-12)
    assert unitarity_deviation(v.entries) < 1e-10


def test_uhlmann_beats_random_unitaries():
    t = random_pure_state(ABC, seed=14)
    s = random_pure_state(ABC, seed=15)
    v = uhlmann_unitary(t, s, ["A", "B"])
    best = achieved_overlap(v, t, s, ["A", "B"])
    assert best == pytest.approx(uhlmann_overlap(t, s, ["A", "B"]), abs=1e-10)
    layout = ABC.sub(["A", "B"])
    for seed in range(500):
        assert achieved_overlap(haar_unitary(layout, seed), t, s, ["A", "B"]) <= best + 1e-12


def test_aligned_trace_distance_follows_overlap():
    t = random_pure_state(ABC, seed=16)
    s = random_pure_state(ABC, seed=17)
    v = uhlmann_unitary(t, s, ["A", "B"])
    _, aligned = s.apply(v, ["A", "B"])
    diff = np.outer(t.amplitudes, t.amplitudes.conj()) - np.outer(aligned, aligned.conj())
    direct = trace_norm(Operator(ABC, diff))
    f = uhlmann_overlap(t, s, ["A", "B"])
    assert direct == pytest.approx(2 * np.sqrt(1 - f ** 2), abs=1e-9)


def test_pure_trace_distance_unnormalized():
    rng = np.random.default_rng(18)
    b = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    b /= np.linalg.norm(b)
    a = 0.8 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
    diff = np.outer(a, a.conj()) - np.outer(b, b.conj())
    direct = trace_norm(Operator(SubsystemLayout.of(("A", 4)), diff))
    got = pure_trace_distance(a, b)
    assert got == pytest.approx(direct, abs=1e-10)


@pytest.mark.parametrize("seed", range(5))
def test_pure_trace_distance_of_same_state_is_tiny(seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    a /= np.linalg.norm(a)
    phased = np.exp(0.7j) * a
    assert pure_trace_distance(a, phased) < 1e-12


def test_pure_trace_distance_resolves_small_angles():
    b = np.zeros(4, dtype=complex)
    b[0] = 1.0
    for t in (1e-6, 1e-9, 1e-12):
        a = np.array([np.cos(t), np.sin(t), 0, 0], dtype=complex)
        assert pure_trace_distance(a, b) == pytest.approx(2 * np.sin(t), rel=1e-6)
