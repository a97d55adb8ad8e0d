"""
Density operators and pure states over a SubsystemLayout: purification,
n-copy construction regrouped as A^n B^n R^n ..., seeded random states
and the builtin anchor states used by the harness.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg as la

from .config import (
    DEFAULT_CAPS, DEFAULT_RANDOM_RANK, HERMITIAN_TOL, NORM_TOL, PSD_TOL,
    SUPPORT_CUTOFF, TRACE_TOL, ResourceCaps,
)
from .errors import CapacityError, InvalidStateError, ShapeMismatchError
from .tensor_core import (
    Labels, Operator, SubsystemLayout, as_labels, eig_hermitian,
    hermitian_deviation, kron, partial_trace, permute_axes, permute_subsystems,
)

QUBIT_ABR = SubsystemLayout.of(("A", 2), ("B", 2), ("R", 2))


@dataclass(frozen=True, eq=False)
class DensityOperator:
    op: Operator

    def __post_init__(self):
        op = self.op
        if not op.is_square:
            raise InvalidStateError("A density operator must be square")
        dev = hermitian_deviation(op.entries)
        if dev > HERMITIAN_TOL:
            raise InvalidStateError(f"Not Hermitian (deviation {dev:.3e})")
        tr = float(np.trace(op.entries).real)
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidStateError(f"Trace is {tr!r}, expected 1")
        w = self.eigenvalues()
        if w.size and w[0] < -PSD_TOL:
            raise InvalidStateError(f"Negative eigenvalue {w[0]:.3e}")

    @classmethod
    def from_entries(cls, layout: SubsystemLayout, entries) -> "DensityOperator":
        return cls(Operator(layout, entries))

    @property
    def layout(self) -> SubsystemLayout:
        return self.op.layout

    @property
    def entries(self) -> np.ndarray:
        return self.op.entries

    def eigenvalues(self) -> np.ndarray:
        e = self.op.entries
        return la.eigvalsh(0.5 * (e + e.conj().T))

    def marginal(self, keep: Labels) -> "DensityOperator":
        return DensityOperator(partial_trace(self.op, keep))

    def permuted(self, order: Labels) -> "DensityOperator":
        return DensityOperator(permute_subsystems(self.op, order))


def cut_matrix(layout: SubsystemLayout, vec: np.ndarray, act_on: Labels) -> np.ndarray:
    """Reshape a vector into a (act_on) x (complement) matrix."""
    act = as_labels(act_on)
    rest = layout.without(act)
    perm = [layout.index(label) for label in act + rest.labels]
    v = vec
    if perm != list(range(len(perm))):
        v = permute_axes(vec, layout.dims, perm, 1)
    return v.reshape(layout.sub(act).total_dim, rest.total_dim)


def reduce_vector(layout: SubsystemLayout, vec: np.ndarray, keep: Labels) -> Operator:
    """Marginal |v><v| on `keep` (original relative order); works unnormalized."""
    keep_set = set(as_labels(keep))
    for label in keep_set:
        layout.index(label)
    kept = tuple(label for label in layout.labels if label in keep_set)
    m = cut_matrix(layout, vec, kept)
    return Operator(layout.sub(kept), m @ m.conj().T)


def apply_to_vector(x: Operator, layout: SubsystemLayout, vec: np.ndarray,
                    labels: Labels) -> Tuple[SubsystemLayout, np.ndarray]:
    """x acting on the named factors; the acted group moves to the front."""
    labels = as_labels(labels)
    group = layout.sub(labels)
    if group.total_dim != x.source_layout.total_dim:
        raise ShapeMismatchError(f"Map from [{x.source_layout}] cannot act on [{group}]")
    m = cut_matrix(layout, vec, labels)
    return x.layout.concat(layout.without(labels)), (x.entries @ m).reshape(-1)


@dataclass(frozen=True, eq=False)
class PureState:
    layout: SubsystemLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        arr = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if arr.shape != (self.layout.total_dim,):
            raise ShapeMismatchError(
                f"{arr.size} amplitudes for layout [{self.layout}] of dimension {self.layout.total_dim}"
            )
        norm = float(np.linalg.norm(arr))
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidStateError(f"State norm is {norm!r}, expected 1")
        arr.setflags(write=False)
        object.__setattr__(self, "amplitudes", arr)

    @classmethod
    def from_vector(cls, layout: SubsystemLayout, vec) -> Tuple["PureState", float]:
        """Normalize an arbitrary nonzero vector; also return its squared norm."""
        vec = np.asarray(vec, dtype=complex)
        norm_sq = float(np.vdot(vec, vec).real)
        if norm_sq <= 0.0:
            raise InvalidStateError("Cannot normalize the zero vector")
        return cls(layout, vec / np.sqrt(norm_sq)), norm_sq

    def density(self) -> DensityOperator:
        v = self.amplitudes
        return DensityOperator(Operator(self.layout, np.outer(v, v.conj())))

    def reduced(self, keep: Labels) -> DensityOperator:
        return DensityOperator(reduce_vector(self.layout, self.amplitudes, keep))

    def cut_matrix(self, act_on: Labels) -> np.ndarray:
        return cut_matrix(self.layout, self.amplitudes, act_on)

    def apply(self, x: Operator, labels: Labels) -> Tuple[SubsystemLayout, np.ndarray]:
        return apply_to_vector(x, self.layout, self.amplitudes, labels)


def maximally_mixed(layout: SubsystemLayout) -> DensityOperator:
    d = layout.total_dim
    return DensityOperator(Operator(layout, np.eye(d) / d))


def purify(rho: DensityOperator, env_label: str = "E") -> PureState:
    """Minimal-rank purification: |E| equals the numerical rank of rho."""
    w, v = eig_hermitian(rho.op)
    support = w > SUPPORT_CUTOFF * max(float(w[-1]), 0.0)
    # heaviest eigenvector first, so E's basis is ordered by weight
    lam = w[support][::-1]
    vecs = v.entries[:, support][:, ::-1]
    m = vecs * np.sqrt(lam)
    layout = rho.layout.concat(SubsystemLayout.of((env_label, int(lam.size))))
    psi, _ = PureState.from_vector(layout, m.reshape(-1))
    return psi


def copies_label(label: str, n: int) -> str:
    return f"{label}^{n}"


def grouped_layout(layout: SubsystemLayout, n: int) -> SubsystemLayout:
    return SubsystemLayout(tuple((copies_label(label, n), dim ** n) for label, dim in layout.factors))


def _grouped_power(arr: np.ndarray, dims: Tuple[int, ...], n: int, n_index_sets: int) -> np.ndarray:
    out = arr
    for _ in range(n - 1):
        out = np.kron(out, arr)
    k = len(dims)
    perm = [c * k + f for f in range(k) for c in range(n)]
    return permute_axes(out, tuple(dims) * n, perm, n_index_sets)


def n_copies_grouped(rho: DensityOperator, n: int, caps: ResourceCaps = DEFAULT_CAPS) -> DensityOperator:
    if n < 1:
        raise ValueError(f"Need n >= 1, got {n}")
    total = rho.layout.total_dim ** n
    if total > caps.max_density_dim:
        raise CapacityError(f"{n} copies of a density on [{rho.layout}]", total, caps.max_density_dim)
    entries = _grouped_power(rho.entries, rho.layout.dims, n, 2)
    return DensityOperator(Operator(grouped_layout(rho.layout, n), entries))


def n_copies_grouped_pure(psi: PureState, n: int, caps: ResourceCaps = DEFAULT_CAPS) -> PureState:
    if n < 1:
        raise ValueError(f"Need n >= 1, got {n}")
    total = psi.layout.total_dim ** n
    if total > caps.max_pure_dim:
        raise CapacityError(f"{n} copies of a pure state on [{psi.layout}]", total, caps.max_pure_dim)
    amps = _grouped_power(psi.amplitudes, psi.layout.dims, n, 1)
    return PureState(grouped_layout(psi.layout, n), amps)


def random_density(layout: SubsystemLayout, rank: int, seed) -> DensityOperator:
    """Marginal of a seeded Gaussian pure state on layout (x) rank-dim ancilla."""
    d = layout.total_dim
    if not 1 <= rank <= d:
        raise ValueError(f"Rank must lie in [1, {d}], got {rank}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityOperator(Operator(layout, rho / np.trace(rho).real))


def random_pure_state(layout: SubsystemLayout, seed) -> PureState:
    rng = np.random.default_rng(seed)
    d = layout.total_dim
    psi, _ = PureState.from_vector(layout, rng.standard_normal(d) + 1j * rng.standard_normal(d))
    return psi


# ---------- Builtin anchor states (qubits A, B, R) ----------
def _basis_mixture(weights_by_index) -> DensityOperator:
    rho = np.zeros((8, 8), dtype=complex)
    for idx, p in weights_by_index.items():
        rho[idx, idx] = p
    return DensityOperator(Operator(QUBIT_ABR, rho))


def ghz_state() -> DensityOperator:
    """(|000> + |111>)/sqrt(2) on A, B, R."""
    v = np.zeros(8, dtype=complex)
    v[0] = v[7] = 1 / np.sqrt(2)
    return PureState(QUBIT_ABR, v).density()


def max_entangled_ar() -> DensityOperator:
    """Phi^{AR} (x) pi^B, reordered to A, B, R."""
    phi = np.zeros(4, dtype=complex)
    phi[0] = phi[3] = 1 / np.sqrt(2)
    phi_ar = Operator(SubsystemLayout.of(("A", 2), ("R", 2)), np.outer(phi, phi.conj()))
    pi_b = Operator(SubsystemLayout.of(("B", 2)), np.eye(2) / 2)
    return DensityOperator(permute_subsystems(kron(phi_ar, pi_b), ["A", "B", "R"]))


def product_state(seed) -> DensityOperator:
    """rho^A (x) rho^{BR}, both seeded random."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    seed_a, seed_br = ss.spawn(2)
    rho_a = random_density(SubsystemLayout.of(("A", 2)), 2, seed_a)
    rho_br = random_density(SubsystemLayout.of(("B", 2), ("R", 2)), 2, seed_br)
    return DensityOperator(kron(rho_a.op, rho_br.op))


def classical_correlated() -> DensityOperator:
    """(|000><000| + |111><111|)/2: every conditional entropy vanishes."""
    return _basis_mixture({0: 0.5, 7: 0.5})


def builtin_state(name: str, rank: int = DEFAULT_RANDOM_RANK, seed=0) -> DensityOperator:
    if name == "ghz":
        return ghz_state()
    if name == "max-entangled-AR":
        return max_entangled_ar()
    if name == "product":
        return product_state(seed)
    if name == "classical":
        return classical_correlated()
    if name == "random":
        return random_density(QUBIT_ABR, rank, seed)
    raise ValueError(f"Unknown builtin state {name!r}")
