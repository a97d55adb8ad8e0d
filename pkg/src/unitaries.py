"""
Unitaries and isometries used by the protocol: Haar sampling, the
Heisenberg-Weyl set, full-rank partial isometries with their T_W map,
twirls, embedded unitaries and the Uhlmann alignment unitary.
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
import scipy.linalg as la

from .config import SUPPORT_CUTOFF, UNITARY_TOL
from .errors import NotUnitaryError, ShapeMismatchError
from .states import PureState
from .tensor_core import (
    Labels, Operator, SubsystemLayout, as_labels, conjugate_on, dagger, permute_subsystems,
)

log = logging.getLogger(__name__)

Space = Union[int, SubsystemLayout]


def _as_layout(space: Space, label: str) -> SubsystemLayout:
    if isinstance(space, SubsystemLayout):
        return space
    return SubsystemLayout.of((label, int(space)))


def unitarity_deviation(mat: np.ndarray) -> float:
    return float(np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[1])))) if mat.size else 0.0


def _haar_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = la.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def haar_unitary(space: Space, seed) -> Operator:
    """Haar-distributed unitary: QR of a Ginibre matrix with R's diagonal phases removed."""
    layout = _as_layout(space, "H")
    if layout.total_dim < 1:
        raise ValueError("Dimension must be >= 1")
    return Operator(layout, _haar_matrix(layout.total_dim, np.random.default_rng(seed)))


# ---------- Heisenberg-Weyl ----------
@dataclass(frozen=True, eq=False)
class HWSet:
    d: int
    unitaries: Tuple[np.ndarray, ...]

    def __len__(self) -> int:
        return len(self.unitaries)

    def operators(self, layout: SubsystemLayout, m: int = None) -> Tuple[Operator, ...]:
        m = len(self) if m is None else m
        return tuple(Operator(layout, u) for u in self.unitaries[:m])


def heisenberg_weyl(d: int) -> HWSet:
    """X^a Z^b for (a, b) in row-major order; X|k> = |k+1 mod d>, Z = diag(w^k)."""
    if d < 1:
        raise ValueError(f"Dimension must be >= 1, got {d}")
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    members = []
    for a in range(d):
        xa = np.linalg.matrix_power(shift, a)
        for b in range(d):
            u = xa @ np.linalg.matrix_power(clock, b)
            u.setflags(write=False)
            members.append(u)
    return HWSet(d, tuple(members))


# ---------- partial isometries ----------
@dataclass(frozen=True, eq=False)
class PartialIsometry:
    """w: source (A^n) -> target (F) with w w^dagger = 1_F."""
    w: Operator

    def __post_init__(self):
        e = self.w.entries
        if e.shape[0] > e.shape[1]:
            raise ShapeMismatchError(f"|F| = {e.shape[0]} exceeds the source dimension {e.shape[1]}")
        dev = float(np.max(np.abs(e @ e.conj().T - np.eye(e.shape[0]))))
        if dev > UNITARY_TOL:
            raise NotUnitaryError(f"w w^dagger deviates from the identity by {dev:.3e}")

    @property
    def source(self) -> SubsystemLayout:
        return self.w.source_layout

    @property
    def target(self) -> SubsystemLayout:
        return self.w.layout

    @property
    def dim_source(self) -> int:
        return self.source.total_dim

    @property
    def dim_target(self) -> int:
        return self.target.total_dim

    def projector(self) -> Operator:
        return dagger(self.w) @ self.w

    def tau(self) -> Operator:
        """W^dagger . pi^F, i.e. the projector w^dagger w scaled by 1/|F|."""
        return self.projector() * (1.0 / self.dim_target)


def make_partial_isometry(source: Space, dim_f: int, seed=None, canonical: bool = False,
                          label: str = "F") -> PartialIsometry:
    """First dim_f rows of a seeded Haar unitary on source (or of the identity if canonical)."""
    source = _as_layout(source, "A")
    d = source.total_dim
    if not 1 <= dim_f <= d:
        raise ValueError(f"|F| must lie in [1, {d}], got {dim_f}")
    if canonical:
        rows = np.eye(d)[:dim_f]
    else:
        rows = _haar_matrix(d, np.random.default_rng(seed))[:dim_f]
    target = SubsystemLayout.of((label, dim_f))
    return PartialIsometry(Operator(target, rows, source))


def apply_T_W(iso: PartialIsometry, sigma: Operator, labels: Labels = None) -> Operator:
    """(|A|/|F|) (w (x) 1) sigma (w (x) 1)^dagger; F becomes the first factor."""
    labels = iso.source.labels if labels is None else as_labels(labels)
    scale = iso.dim_source / iso.dim_target
    return conjugate_on(iso.w, sigma, labels) * scale


def average_conjugations(ops: Sequence[Operator], sigma: Operator, labels: Labels) -> Operator:
    if not ops:
        raise ValueError("Need at least one operator to average over")
    total = None
    for op in ops:
        term = conjugate_on(op, sigma, labels)
        total = term.entries.copy() if total is None else total + term.entries
        layout = term.layout
    return Operator(layout, total / len(ops))


def twirl(hw: HWSet, m: int, sigma: Operator, label: str = None) -> Operator:
    """Average of conjugations by the first m Heisenberg-Weyl members on one factor."""
    if not 1 <= m <= len(hw):
        raise ValueError(f"M must lie in [1, {len(hw)}], got {m}")
    label = sigma.layout.labels[0] if label is None else label
    if sigma.layout.dim(label) != hw.d:
        raise ShapeMismatchError(f"Factor {label!r} has dimension {sigma.layout.dim(label)}, set has d = {hw.d}")
    out = average_conjugations(hw.operators(sigma.layout.sub(label), m), sigma, label)
    if out.layout.labels != sigma.layout.labels:
        out = permute_subsystems(out, sigma.layout.labels)
    return out


def embed_unitary(iso: PartialIsometry, v_f: Operator) -> Operator:
    """w^dagger v_f w + (1 - w^dagger w): a unitary on A^n with V w^dagger = w^dagger v_f."""
    v = v_f.entries
    if v.shape != (iso.dim_target, iso.dim_target):
        raise ShapeMismatchError(f"Expected a unitary on [{iso.target}], got shape {v.shape}")
    if unitarity_deviation(v) > UNITARY_TOL:
        raise NotUnitaryError(f"Operator on [{iso.target}] is not unitary")
    w = iso.w.entries
    proj = w.conj().T @ w
    out = w.conj().T @ v @ w + (np.eye(iso.dim_source) - proj)
    intertwine = float(np.max(np.abs(out @ w.conj().T - w.conj().T @ v)))
    if intertwine > UNITARY_TOL:
        raise RuntimeError(f"Embedded unitary breaks V w^dagger = w^dagger v by {intertwine:.3e}")
    return Operator(iso.source, out)


# ---------- Uhlmann ----------
def _overlap_matrix(target: PureState, source: PureState, act_on: Labels) -> np.ndarray:
    if target.layout != source.layout:
        raise ShapeMismatchError(f"Layouts differ: [{target.layout}] vs [{source.layout}]")
    return target.cut_matrix(act_on) @ source.cut_matrix(act_on).conj().T


def uhlmann_overlap(target: PureState, source: PureState, act_on: Labels) -> float:
    """max over unitaries V on act_on of |<target|(V (x) 1)|source>|."""
    k = _overlap_matrix(target, source, act_on)
    return float(np.sum(la.svdvals(k)))


def uhlmann_unitary(target: PureState, source: PureState, act_on: Labels) -> Operator:
    """
    Polar unitary of M_t M_s^dagger. On the null space the completion is the
    unitary closest to the identity; the global phase makes the largest entry
    real and positive.
    """
    act_on = as_labels(act_on)
    k = _overlap_matrix(target, source, act_on)
    u, s, vh = la.svd(k)
    r = int(np.sum(s > SUPPORT_CUTOFF * s[0])) if s.size and s[0] > 0 else 0
    ur, vhr = u[:, :r], vh[:r, :]
    v = ur @ vhr
    if r < k.shape[0]:
        q_left = la.null_space(ur.conj().T) if r else np.eye(k.shape[0])
        q_right = la.null_space(vhr) if r else np.eye(k.shape[1])
        a, _, bh = la.svd(q_left.conj().T @ q_right)
        v = v + q_left @ (a @ bh) @ q_right.conj().T
    flat = v.reshape(-1)
    top = flat[np.argmax(np.abs(flat))]
    v = v * (np.conj(top) / abs(top))
    return Operator(target.layout.sub(act_on), v)


def pure_trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """|| |a><a| - |b><b| ||_1 for a unit vector b and any vector a."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    c = float(np.vdot(a, a).real)
    # <a|a> - |<a|b>|^2 as the squared norm of the part of a orthogonal to b
    perp = a - b * np.vdot(b, a)
    gap = float(np.vdot(perp, perp).real)
    return math.sqrt((c - 1.0) ** 2 + 4.0 * gap)
