"""
Closed-form error bounds and rates for the erasure / deconstruction protocol.

All entropies and log-sizes are in bits; exp{...} is evaluated in `exp_base`
(2 by default, math.e for the natural-base reading).
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

from .config import EXP_BASE, VACUOUS_LEVEL
from .entropy import cmi, dual_alpha
from .states import DensityOperator

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dims:
    dA: int
    dB: int
    dR: int
    dE: int

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.dA, self.dB, self.dR, self.dE)


def xi(eps: float) -> float:
    """sqrt(eps (2 + eps + 2 sqrt(1 + eps)))."""
    if eps < 0:
        raise ValueError(f"xi needs eps >= 0, got {eps!r}")
    return math.sqrt(eps * (2.0 + eps + 2.0 * math.sqrt(1.0 + eps)))


def _check_alpha(alpha: float) -> float:
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (1, 2], got {alpha!r}")
    return (alpha - 1.0) / (2.0 * alpha)


def _overhead(d1: int, d2: int, n: int) -> float:
    return d1 * d2 * math.log2(n + 1)


def epsilon_n(alpha: float, n: int, dim_r: int, dim_e: int, H_alpha_A_given_RE: float,
              log2_F: float, exp_base: float = EXP_BASE) -> float:
    k = _check_alpha(alpha)
    return 8.0 * exp_base ** (k * (_overhead(dim_r, dim_e, n) - n * H_alpha_A_given_RE - log2_F))


def epsilon_n_dual(alpha: float, n: int, dim_r: int, dim_e: int, H_alphatilde_A_given_B: float,
                   log2_F: float, exp_base: float = EXP_BASE) -> float:
    """Same bound with H_alpha(A|RE) replaced by -H_alpha~(A|B)."""
    k = _check_alpha(alpha)
    return 8.0 * exp_base ** (k * (_overhead(dim_r, dim_e, n) + n * H_alphatilde_A_given_B - log2_F))


def theta_n(alpha: float, n: int, dim_b: int, dim_r: int, H_alpha_A_given_BR: float,
            log2_M: float, log2_F: float, exp_base: float = EXP_BASE) -> float:
    k = _check_alpha(alpha)
    return 8.0 * exp_base ** (
        k * (_overhead(dim_b, dim_r, n) - n * H_alpha_A_given_BR - log2_M + log2_F)
    )


def _rate(alpha: float, delta: float, n: int, dims: Dims, H_alphatilde_A_given_B: float,
          H_alpha_A_given_BR: float, include_overhead: bool = True) -> float:
    _check_alpha(alpha)
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta!r}")
    rate = H_alphatilde_A_given_B - H_alpha_A_given_BR + delta
    if include_overhead:
        rate += (dims.dE + dims.dB) * dims.dR * math.log2(n + 1) / n
    return rate


def finite_n_rate(alpha: float, delta: float, n: int, dims: Dims, H_alphatilde_A_given_B: float,
                  H_alpha_A_given_BR: float, include_overhead: bool = True) -> float:
    """Bits per copy: H_alpha~(A|B) - H_alpha(A|BR) + (|E|+|B|)|R| log(n+1)/n + delta, delta > 0."""
    if delta <= 0:
        raise ValueError(f"delta must be > 0, got {delta!r}")
    return _rate(alpha, delta, n, dims, H_alphatilde_A_given_B, H_alpha_A_given_BR, include_overhead)


def asymptotic_target(rho: DensityOperator) -> float:
    """I(A;R|B), the optimal asymptotic rate."""
    return cmi(rho, "A", "R", "B")


@dataclass(frozen=True)
class BoundReport:
    alpha: float
    alpha_tilde: float
    n: int
    dims: Dims
    delta: float
    log2_F: float
    log2_M: float
    H_alphatilde_A_given_B: float
    H_alpha_A_given_BR: float
    H_alpha_A_given_RE: float
    eps_bound: float
    theta_bound: float
    chain_bound_erasure: float
    rate: float
    rate_formula: float
    cmi_target: float

    @property
    def eps_vacuous(self) -> bool:
        return self.eps_bound > VACUOUS_LEVEL

    @property
    def theta_vacuous(self) -> bool:
        return self.theta_bound > VACUOUS_LEVEL

    @property
    def vacuous(self) -> bool:
        return self.chain_bound_erasure > VACUOUS_LEVEL

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__ if k != "dims"}
        out.update(dimA=self.dims.dA, dimB=self.dims.dB, dimR=self.dims.dR, dimE=self.dims.dE)
        out.update(eps_vacuous=self.eps_vacuous, theta_vacuous=self.theta_vacuous, vacuous=self.vacuous)
        return out


def bound_report(alpha: float, delta: float, n: int, dims: Dims, log2_F: float, log2_M: float,
                 H_alphatilde_A_given_B: float, H_alpha_A_given_BR: float,
                 H_alpha_A_given_RE: Optional[float] = None, cmi_target: float = math.nan,
                 exp_base: float = EXP_BASE) -> BoundReport:
    if H_alpha_A_given_RE is None:
        H_alpha_A_given_RE = -H_alphatilde_A_given_B
    eps = epsilon_n(alpha, n, dims.dR, dims.dE, H_alpha_A_given_RE, log2_F, exp_base)
    theta = theta_n(alpha, n, dims.dB, dims.dR, H_alpha_A_given_BR, log2_M, log2_F, exp_base)
    report = BoundReport(
        alpha=alpha, alpha_tilde=dual_alpha(alpha), n=n, dims=dims, delta=delta,
        log2_F=log2_F, log2_M=log2_M,
        H_alphatilde_A_given_B=H_alphatilde_A_given_B, H_alpha_A_given_BR=H_alpha_A_given_BR,
        H_alpha_A_given_RE=H_alpha_A_given_RE,
        eps_bound=eps, theta_bound=theta, chain_bound_erasure=2.0 * xi(eps) + 2.0 * theta,
        rate=log2_M / n,
        rate_formula=_rate(alpha, delta, n, dims, H_alphatilde_A_given_B, H_alpha_A_given_BR),
        cmi_target=cmi_target,
    )
    if report.vacuous:
        log.debug("Bounds vacuous at n=%d alpha=%s: eps=%.3g theta=%.3g", n, alpha, eps, theta)
    return report


@dataclass(frozen=True)
class DecayProfile:
    n0: int
    n_values: Tuple[int, ...] = field(default_factory=tuple)
    eps: Tuple[float, ...] = field(default_factory=tuple)
    theta: Tuple[float, ...] = field(default_factory=tuple)
    product: Tuple[float, ...] = field(default_factory=tuple)

    def strictly_decreasing(self) -> bool:
        return all(b < a for a, b in zip(self.product, self.product[1:]))


def decay_crossover(delta: float, dims: Dims) -> int:
    """First n after which (|E|+|B|)|R| log2(n+1) - n delta decreases strictly."""
    if delta <= 0:
        raise ValueError(f"delta must be > 0 for decay, got {delta!r}")
    c = (dims.dE + dims.dB) * dims.dR
    return max(1, math.ceil(c / (delta * math.log(2.0))))


def bound_decay(alpha: float, delta: float, dims: Dims, H_alphatilde_A_given_B: float,
                H_alpha_A_given_BR: float, extra: int = 50,
                exp_base: float = EXP_BASE) -> DecayProfile:
    """
    eps_n * theta_n for n in [n0, n0 + extra] with
    log2|F| = n (H_alpha~(A|B) + delta/2) and log2 M = n (H_alpha~(A|B) - H_alpha(A|BR) + delta).
    """
    _check_alpha(alpha)
    n0 = decay_crossover(delta, dims)
    ns, eps, theta, prod = [], [], [], []
    for n in range(n0, n0 + extra + 1):
        log2_F = n * (H_alphatilde_A_given_B + delta / 2.0)
        log2_M = n * (H_alphatilde_A_given_B - H_alpha_A_given_BR + delta)
        e = epsilon_n_dual(alpha, n, dims.dR, dims.dE, H_alphatilde_A_given_B, log2_F, exp_base)
        t = theta_n(alpha, n, dims.dB, dims.dR, H_alpha_A_given_BR, log2_M, log2_F, exp_base)
        ns.append(n)
        eps.append(e)
        theta.append(t)
        prod.append(e * t)
    return DecayProfile(n0, tuple(ns), tuple(eps), tuple(theta), tuple(prod))
