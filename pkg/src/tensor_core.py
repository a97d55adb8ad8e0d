"""
Dense complex operators over labeled tensor factorizations.

Row-major index convention throughout: the leftmost factor is the most
significant index, which is what np.kron and ndarray.reshape produce.
All functions are pure; Operator entries are stored read-only.
"""
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Tuple, Union

import numpy as np
import scipy.linalg as la

from .config import HERMITIAN_TOL, PSD_TOL, SUPPORT_CUTOFF
from .errors import (
    LabelCollisionError, LayoutError, NotHermitianError, NotPSDError,
    PermutationError, ShapeMismatchError, UnknownLabelError,
)

Labels = Union[str, Iterable[str]]


def as_labels(labels: Labels) -> Tuple[str, ...]:
    """Accept a single label or any iterable of labels."""
    if isinstance(labels, str):
        return (labels,)
    return tuple(labels)


@dataclass(frozen=True)
class SubsystemLayout:
    factors: Tuple[Tuple[str, int], ...]

    def __post_init__(self):
        factors = tuple((str(label), int(dim)) for label, dim in self.factors)
        object.__setattr__(self, "factors", factors)
        labels = [label for label, _ in factors]
        if len(set(labels)) != len(labels):
            raise LabelCollisionError(labels)
        for label, dim in factors:
            if dim < 1:
                raise LayoutError(f"Factor {label!r} has dimension {dim}; need >= 1")

    @classmethod
    def of(cls, *pairs) -> "SubsystemLayout":
        return cls(tuple(pairs))

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(label for label, _ in self.factors)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabelError(label, self.labels) from None

    def dim(self, label: str) -> int:
        return self.dims[self.index(label)]

    def sub(self, labels: Labels) -> "SubsystemLayout":
        """Layout of the named factors, in the order given."""
        return SubsystemLayout(tuple((label, self.dim(label)) for label in as_labels(labels)))

    def without(self, labels: Labels) -> "SubsystemLayout":
        drop = set(as_labels(labels))
        for label in drop:
            self.index(label)
        return SubsystemLayout(tuple(f for f in self.factors if f[0] not in drop))

    def concat(self, other: "SubsystemLayout") -> "SubsystemLayout":
        return SubsystemLayout(self.factors + other.factors)

    def __str__(self) -> str:
        return " ".join(f"{label}:{dim}" for label, dim in self.factors)


@dataclass(frozen=True, eq=False)
class Operator:
    """Matrix from `source` (columns) to `layout` (rows); square when source is None."""
    layout: SubsystemLayout
    entries: np.ndarray
    source: Optional[SubsystemLayout] = None

    def __post_init__(self):
        if self.source is not None and self.source == self.layout:
            object.__setattr__(self, "source", None)
        arr = np.array(self.entries, dtype=complex)
        expected = (self.layout.total_dim, self.source_layout.total_dim)
        if arr.shape != expected:
            raise ShapeMismatchError(
                f"Entries shape {arr.shape} does not match layout [{self.layout}] -> {expected}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def source_layout(self) -> SubsystemLayout:
        return self.layout if self.source is None else self.source

    @property
    def is_square(self) -> bool:
        return self.source is None

    def trace(self) -> complex:
        _require_square(self, "trace")
        return complex(np.trace(self.entries))

    def _same_shape(self, other: "Operator") -> None:
        if self.layout != other.layout or self.source_layout != other.source_layout:
            raise ShapeMismatchError(
                f"Layouts differ: [{self.layout}] vs [{other.layout}]"
            )

    def __add__(self, other: "Operator") -> "Operator":
        self._same_shape(other)
        return Operator(self.layout, self.entries + other.entries, self.source)

    def __sub__(self, other: "Operator") -> "Operator":
        self._same_shape(other)
        return Operator(self.layout, self.entries - other.entries, self.source)

    def __mul__(self, scalar) -> "Operator":
        return Operator(self.layout, self.entries * scalar, self.source)

    __rmul__ = __mul__

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.source_layout.total_dim != other.layout.total_dim:
            raise ShapeMismatchError(
                f"Cannot compose [{self.source_layout}] with [{other.layout}]"
            )
        return Operator(self.layout, self.entries @ other.entries, other.source_layout)


def _require_square(op: Operator, what: str) -> None:
    if not op.is_square:
        raise ShapeMismatchError(f"{what} needs a square operator, got [{op.source_layout}] -> [{op.layout}]")


def identity(layout: SubsystemLayout) -> Operator:
    return Operator(layout, np.eye(layout.total_dim))


def dagger(op: Operator) -> Operator:
    return Operator(op.source_layout, op.entries.conj().T, op.layout)


def hermitian_deviation(entries: np.ndarray) -> float:
    """Max absolute entry of A - A^dagger."""
    if entries.size == 0:
        return 0.0
    return float(np.max(np.abs(entries - entries.conj().T)))


def kron(a: Operator, b: Operator) -> Operator:
    layout = a.layout.concat(b.layout)
    source = None
    if not (a.is_square and b.is_square):
        source = a.source_layout.concat(b.source_layout)
    return Operator(layout, np.kron(a.entries, b.entries), source)


def permute_axes(tensor: np.ndarray, dims: Tuple[int, ...], perm, n_index_sets: int) -> np.ndarray:
    """Reorder tensor factors of a vector (1 index set) or matrix (2 index sets)."""
    k = len(dims)
    total = math.prod(dims)
    axes = []
    for s in range(n_index_sets):
        axes.extend(s * k + p for p in perm)
    t = tensor.reshape(tuple(dims) * n_index_sets).transpose(axes)
    return t.reshape((total,) * n_index_sets)


def partial_trace(op: Operator, keep: Labels) -> Operator:
    _require_square(op, "partial_trace")
    layout = op.layout
    keep_set = set(as_labels(keep))
    for label in keep_set:
        layout.index(label)
    kept = [label for label in layout.labels if label in keep_set]
    keep_idx = [layout.index(label) for label in kept]
    traced_idx = [i for i in range(len(layout.dims)) if i not in keep_idx]

    dims = layout.dims
    dk = math.prod(dims[i] for i in keep_idx)
    dt = math.prod(dims[i] for i in traced_idx)
    k = len(dims)
    t = op.entries.reshape(dims + dims)
    t = t.transpose(keep_idx + traced_idx + [k + i for i in keep_idx] + [k + i for i in traced_idx])
    t = t.reshape(dk, dt, dk, dt)
    return Operator(layout.sub(kept), np.einsum("ajbj->ab", t))


def permute_subsystems(op: Operator, new_order: Labels) -> Operator:
    _require_square(op, "permute_subsystems")
    layout = op.layout
    new_order = as_labels(new_order)
    if len(new_order) != len(layout.labels) or set(new_order) != set(layout.labels):
        raise PermutationError(
            f"{list(new_order)} is not a permutation of {list(layout.labels)}"
        )
    perm = [layout.index(label) for label in new_order]
    return Operator(layout.sub(new_order), permute_axes(op.entries, layout.dims, perm, 2))


def trace_norm(op: Operator) -> float:
    if op.entries.size == 0:
        return 0.0
    return float(np.sum(la.svdvals(op.entries)))


def eig_hermitian(op: Operator):
    """Eigenvalues (ascending) and the unitary of eigenvectors (as columns)."""
    _require_square(op, "eig_hermitian")
    dev = hermitian_deviation(op.entries)
    if dev > HERMITIAN_TOL:
        raise NotHermitianError(f"Operator on [{op.layout}] deviates from Hermitian by {dev:.3e}")
    sym = 0.5 * (op.entries + op.entries.conj().T)
    w, v = la.eigh(sym)
    return w, Operator(op.layout, v)


def matrix_power_psd(op: Operator, p: float) -> Operator:
    w, v = eig_hermitian(op)
    top = max(float(w[-1]), 0.0) if w.size else 0.0
    if w.size and w[0] < -PSD_TOL * max(1.0, top):
        raise NotPSDError(f"Smallest eigenvalue {w[0]:.3e} is below -{PSD_TOL}")
    support = w > SUPPORT_CUTOFF * top
    powered = np.zeros_like(w)
    powered[support] = w[support] ** p
    vecs = v.entries
    return Operator(op.layout, (vecs * powered) @ vecs.conj().T)


def conjugate_apply(x: Operator, sigma: Operator) -> Operator:
    """x sigma x^dagger, with the output layout of x."""
    _require_square(sigma, "conjugate_apply")
    if x.source_layout.total_dim != sigma.layout.total_dim:
        raise ShapeMismatchError(
            f"Cannot conjugate [{sigma.layout}] by a map from [{x.source_layout}]"
        )
    xe = x.entries
    return Operator(x.layout, xe @ sigma.entries @ xe.conj().T)


def conjugate_on(x: Operator, sigma: Operator, labels: Labels) -> Operator:
    """
    Conjugate sigma by x acting on the named factors only.
    The acted group, replaced by x.layout, moves to the front of the output;
    the other factors keep their relative order.
    """
    _require_square(sigma, "conjugate_on")
    labels = as_labels(labels)
    group = sigma.layout.sub(labels)
    if group.total_dim != x.source_layout.total_dim:
        raise ShapeMismatchError(
            f"Map from [{x.source_layout}] cannot act on [{group}]"
        )
    rest = sigma.layout.without(labels)
    order = list(labels) + list(rest.labels)
    perm = [sigma.layout.index(label) for label in order]
    entries = sigma.entries
    if perm != list(range(len(perm))):
        entries = permute_axes(entries, sigma.layout.dims, perm, 2)

    dg, dr, do = group.total_dim, rest.total_dim, x.layout.total_dim
    t = entries.reshape(dg, dr, dg, dr)
    xe = x.entries
    first = np.tensordot(xe, t, axes=(1, 0))                 # (a, r, h, s)
    out = np.tensordot(first, xe.conj(), axes=(2, 1))        # (a, r, s, b)
    out = out.transpose(0, 1, 3, 2).reshape(do * dr, do * dr)
    return Operator(x.layout.concat(rest), out)
