"""
Conditional erasure / state deconstruction on rho^{ABR}, n copies.

Pipeline for one run:
  1. purify rho to Psi^{ABRE}; form Psi^{(x)n} and rho^{(x)n} grouped as A^n B^n R^n (E^n)
  2. draw a partial isometry W: A^n -> F and several Haar candidates U on A^n;
     keep the U with the smallest max(eps, theta)
  3. align W^dagger . T_W[U . Psi^{(x)n}] with Psi^{(x)n} by an Uhlmann unitary V_U on A^n B^n
  4. Upsilon = (1/M) sum_i (V_i^{A^n} V_U) . rho^{(x)n} over the first M Heisenberg-Weyl members
  5. measure the erasure, marginal and deconstruction errors against tau = W^dagger . pi^F
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .bounds import BoundReport, Dims, bound_report, xi
from .config import (
    DEFAULT_ALPHA, DEFAULT_CAPS, DEFAULT_DELTA, DEFAULT_NUM_U_CANDIDATES, EXP_BASE, ResourceCaps,
)
from .entropy import EntropyParams, cmi, dual_alpha, renyi_conditional
from .errors import InvalidStateError
from .states import (
    DensityOperator, PureState, apply_to_vector, copies_label, n_copies_grouped,
    n_copies_grouped_pure, purify, reduce_vector,
)
from .tensor_core import Operator, conjugate_on, identity, kron, partial_trace, trace_norm
from .unitaries import (
    PartialIsometry, apply_T_W, average_conjugations, embed_unitary, haar_unitary,
    heisenberg_weyl, make_partial_isometry, pure_trace_distance, twirl, uhlmann_unitary,
)

log = logging.getLogger(__name__)

PARTIES = ("A", "B", "R")
ENV = "E"


@dataclass(frozen=True, eq=False)
class ProtocolConfig:
    rho: DensityOperator
    n: int = 1
    alpha: float = DEFAULT_ALPHA
    delta: float = DEFAULT_DELTA
    log2_F: Optional[float] = None
    log2_M: Optional[float] = None
    num_U_candidates: int = DEFAULT_NUM_U_CANDIDATES
    seed: int = 0
    entropy_params: EntropyParams = field(default_factory=EntropyParams)
    caps: ResourceCaps = DEFAULT_CAPS
    exp_base: float = EXP_BASE

    def __post_init__(self):
        labels = self.rho.layout.labels
        if set(labels) != set(PARTIES) or len(labels) != 3:
            raise InvalidStateError(f"Protocol needs a state on A, B, R; got labels {list(labels)}")
        if labels != PARTIES:
            object.__setattr__(self, "rho", self.rho.permuted(PARTIES))
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 1.0 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (1, 2], got {self.alpha!r}")
        if self.delta < 0:
            raise ValueError(f"delta must be >= 0, got {self.delta!r}")
        if self.num_U_candidates < 1:
            raise ValueError(f"num_U_candidates must be >= 1, got {self.num_U_candidates}")
        max_f = self.n * math.log2(self.rho.layout.dim("A"))
        if self.log2_F is not None and not 0 <= self.log2_F <= max_f + 1e-12:
            raise ValueError(f"log2_F must lie in [0, {max_f}], got {self.log2_F!r}")
        if self.log2_M is not None:
            cap = 2 * (self.log2_F if self.log2_F is not None else max_f)
            if not 0 <= self.log2_M <= cap + 1e-12:
                raise ValueError(f"log2_M must lie in [0, {cap}], got {self.log2_M!r}")

    @property
    def params(self) -> EntropyParams:
        return self.entropy_params.with_alpha(self.alpha)


@dataclass(frozen=True)
class ProtocolEntropies:
    H_alphatilde_A_given_B: float
    H_alpha_A_given_BR: float
    H_alpha_A_given_RE: float
    cmi: float


def protocol_entropies(rho: DensityOperator, alpha: float,
                       params: EntropyParams = EntropyParams()) -> ProtocolEntropies:
    """The three Rényi terms of the size rule plus I(A;R|B), from rho and its purification."""
    p = params.with_alpha(alpha)
    psi = purify(rho, ENV)
    return ProtocolEntropies(
        H_alphatilde_A_given_B=renyi_conditional(rho, "A", "B", p.with_alpha(dual_alpha(alpha))),
        H_alpha_A_given_BR=renyi_conditional(rho, "A", ("B", "R"), p),
        H_alpha_A_given_RE=renyi_conditional(psi.reduced(("A", "R", ENV)), "A", ("R", ENV), p),
        cmi=cmi(rho, "A", "R", "B"),
    )


@dataclass(frozen=True)
class SizeChoice:
    dim_f: int
    m: int
    log2_F: float
    log2_M: float
    raw_log2_F: float
    raw_log2_M: float
    clamped_F: bool = False
    clamped_M: bool = False
    warnings: Tuple[str, ...] = ()


def _ceil(x: float) -> int:
    # formula values that land on an integer up to rounding stay on it
    return math.ceil(round(x, 9))


def choose_sizes(config: ProtocolConfig, entropies: ProtocolEntropies, dims: Dims) -> SizeChoice:
    n, delta = config.n, config.delta
    max_f = dims.dA ** n
    warnings = []

    if config.log2_F is not None:
        raw_f = float(config.log2_F)
        dim_f = int(round(2.0 ** raw_f))
    else:
        raw_f = _ceil(n * entropies.H_alphatilde_A_given_B
                      + dims.dR * dims.dE * math.log2(n + 1) + n * delta / 2.0)
        dim_f = 2 ** raw_f if raw_f > 0 else 1
    clamped_f = not 1 <= dim_f <= max_f
    dim_f = min(max(dim_f, 1), max_f)
    if clamped_f:
        warnings.append(f"log2_F formula gave {raw_f}; clamped |F| to {dim_f}")
    log2_f = math.log2(dim_f)

    if config.log2_M is not None:
        raw_m = float(config.log2_M)
    else:
        raw_m = log2_f + _ceil(-n * entropies.H_alpha_A_given_BR
                               + dims.dB * dims.dR * math.log2(n + 1) + n * delta / 2.0)
    m_cap = dim_f * dim_f
    clamped_m = raw_m < 0 or raw_m > 2 * log2_f + 1e-12
    m = int(math.floor(2.0 ** min(max(raw_m, 0.0), 2 * log2_f) + 1e-9))
    m = min(max(m, 1), m_cap)
    if clamped_m:
        warnings.append(f"log2_M formula gave {raw_m}; clamped M to {m}")
    for w in warnings:
        log.warning(w)
    return SizeChoice(dim_f, m, log2_f, math.log2(m), float(raw_f), float(raw_m),
                      clamped_f, clamped_m, tuple(warnings))


@dataclass(frozen=True, eq=False)
class ProtocolRun:
    config: ProtocolConfig
    dims: Dims
    entropies: ProtocolEntropies
    sizes: SizeChoice
    upsilon: DensityOperator
    tau: Operator
    eps_emp: float
    theta_emp: float
    erasure_err: float
    marginal_err: float
    decon_err: float
    product_err: float
    uhlmann_err: float
    uhlmann_err_unnormalized: float
    renorm_factor: float
    erasure_err_marginal_tau: float
    candidates: Tuple[Tuple[float, float], ...]
    chosen: int
    bounds: BoundReport

    @property
    def chain_bound(self) -> float:
        return xi(self.eps_emp) + self.theta_emp

    @property
    def chain_bound_erasure(self) -> float:
        return 2.0 * xi(self.eps_emp) + 2.0 * self.theta_emp

    @property
    def warnings(self) -> Tuple[str, ...]:
        return self.sizes.warnings


def _distance_to_product(upsilon: DensityOperator, tau: Operator) -> float:
    labels = upsilon.layout.labels
    rest = partial_trace(upsilon.op, labels[1:])
    return trace_norm(upsilon.op - kron(tau, rest))


def erasure_error(upsilon: DensityOperator, tau: Operator, reference: Operator) -> Tuple[float, float]:
    """(||Upsilon - tau (x) Upsilon^{rest}||_1, ||Upsilon^{rest} - reference||_1)."""
    rest = partial_trace(upsilon.op, upsilon.layout.labels[1:])
    return _distance_to_product(upsilon, tau), trace_norm(rest - reference)


def deconstruction_error(upsilon: DensityOperator, iso: PartialIsometry) -> float:
    """Error of the recovery map sigma -> (W^dagger . pi^F) (x) sigma."""
    return _distance_to_product(upsilon, iso.tau())


def _candidate_errors(iso: PartialIsometry, hw, m: int, u: Operator, psi_n: PureState,
                      rho_n: DensityOperator, rho_re_n: Operator, theta_target: Operator,
                      a_label: str, keep_re) -> Tuple[float, float]:
    scale = iso.dim_source / iso.dim_target
    layout, vec = apply_to_vector(iso.w @ u, psi_n.layout, psi_n.amplitudes, a_label)
    eps = trace_norm(reduce_vector(layout, vec, keep_re) * scale - rho_re_n)
    mixed = apply_T_W(iso, conjugate_on(u, rho_n.op, a_label))
    theta = trace_norm(twirl(hw, m, mixed) - theta_target)
    return eps, theta


def run_protocol(config: ProtocolConfig, entropies: Optional[ProtocolEntropies] = None) -> ProtocolRun:
    rho, n = config.rho, config.n
    psi = purify(rho, ENV)
    dims = Dims(*(psi.layout.dim(x) for x in PARTIES + (ENV,)))
    if entropies is None:
        entropies = protocol_entropies(rho, config.alpha, config.params)
    sizes = choose_sizes(config, entropies, dims)

    a_n, b_n, r_n, e_n = (copies_label(x, n) for x in PARTIES + (ENV,))
    psi_n = n_copies_grouped_pure(psi, n, config.caps)
    rho_n = n_copies_grouped(rho, n, config.caps)
    rho_re_n = reduce_vector(psi_n.layout, psi_n.amplitudes, (r_n, e_n))
    rho_br_n = partial_trace(rho_n.op, (b_n, r_n))

    iso_seed, *u_seeds = np.random.SeedSequence(config.seed).spawn(1 + config.num_U_candidates)
    iso = make_partial_isometry(psi_n.layout.sub(a_n), sizes.dim_f, iso_seed)
    hw = heisenberg_weyl(sizes.dim_f)
    pi_f = identity(iso.target) * (1.0 / sizes.dim_f)
    theta_target = kron(pi_f, rho_br_n)

    unitaries, candidates = [], []
    for seed in u_seeds:
        u = haar_unitary(iso.source, seed)
        unitaries.append(u)
        candidates.append(_candidate_errors(
            iso, hw, sizes.m, u, psi_n, rho_n, rho_re_n, theta_target, a_n, (r_n, e_n)))
    scores = [max(e, t) for e, t in candidates]
    chosen = int(np.argmin(scores))
    u = unitaries[chosen]
    eps_emp, theta_emp = candidates[chosen]

    # W^dagger . T_W[U . Psi] as a vector: sqrt(|A^n|/|F|) w^dagger w U |Psi>
    scale = iso.dim_source / iso.dim_target
    _, raw = apply_to_vector(iso.projector() @ u, psi_n.layout, psi_n.amplitudes, a_n)
    raw = raw * math.sqrt(scale)
    target, renorm = PureState.from_vector(psi_n.layout, raw)
    v_u = uhlmann_unitary(target, psi_n, (a_n, b_n))
    _, aligned = apply_to_vector(v_u, psi_n.layout, psi_n.amplitudes, (a_n, b_n))
    uhlmann_err = pure_trace_distance(target.amplitudes, aligned)
    uhlmann_err_unnormalized = pure_trace_distance(raw, aligned)

    aligned_rho = conjugate_on(v_u, rho_n.op, (a_n, b_n))
    embedded = [embed_unitary(iso, op) for op in hw.operators(iso.target, sizes.m)]
    upsilon = DensityOperator(average_conjugations(embedded, aligned_rho, a_n))

    tau = iso.tau()
    erasure_err, marginal_err = erasure_error(upsilon, tau, rho_br_n)
    decon_err = deconstruction_error(upsilon, iso)
    product_err = trace_norm(upsilon.op - kron(tau, rho_br_n))
    marginal_tau = partial_trace(upsilon.op, a_n)
    erasure_err_marginal_tau = _distance_to_product(upsilon, marginal_tau)

    bounds = bound_report(
        config.alpha, config.delta, n, dims, sizes.log2_F, sizes.log2_M,
        entropies.H_alphatilde_A_given_B, entropies.H_alpha_A_given_BR,
        entropies.H_alpha_A_given_RE, entropies.cmi, config.exp_base,
    )
    log.debug("n=%d |F|=%d M=%d eps=%.3g theta=%.3g erasure=%.3g",
              n, sizes.dim_f, sizes.m, eps_emp, theta_emp, erasure_err)
    return ProtocolRun(
        config=config, dims=dims, entropies=entropies, sizes=sizes, upsilon=upsilon, tau=tau,
        eps_emp=eps_emp, theta_emp=theta_emp, erasure_err=erasure_err, marginal_err=marginal_err,
        decon_err=decon_err, product_err=product_err, uhlmann_err=uhlmann_err,
        uhlmann_err_unnormalized=uhlmann_err_unnormalized, renorm_factor=renorm,
        erasure_err_marginal_tau=erasure_err_marginal_tau, candidates=tuple(candidates),
        chosen=chosen, bounds=bounds,
    )
