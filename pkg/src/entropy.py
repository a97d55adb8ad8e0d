"""
Von Neumann and Rényi entropies in bits.

The conditional Rényi entropy is the optimized sandwiched one,

    H_alpha(A|C) = - min_sigma D_alpha(rho^{AC} || 1_A (x) sigma^C),

with D_alpha(rho||sigma) = log2 Tr[(sigma^b rho sigma^b)^alpha] / (alpha - 1),
b = (1 - alpha) / (2 alpha). The minimum is found by L-BFGS-B over
sigma = T T^dagger / Tr(T T^dagger) with an analytic gradient, with a
Powell restart when the quasi-Newton run stalls.
"""
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg as la
from scipy.optimize import minimize

from .config import DEFAULT_ALPHA, ENTROPY_MAX_ITER, ENTROPY_TOL, PSD_TOL, SUPPORT_CUTOFF
from .errors import LayoutError, NonConvergenceError
from .states import DensityOperator
from .tensor_core import Labels, as_labels

log = logging.getLogger(__name__)

LN2 = math.log(2.0)
START_MIX = 1e-3     # weight of pi^C in the starting sigma


@dataclass(frozen=True)
class EntropyParams:
    alpha: float = DEFAULT_ALPHA
    tolerance: float = ENTROPY_TOL
    max_iterations: int = ENTROPY_MAX_ITER

    def __post_init__(self):
        if not 0.5 < self.alpha <= 2.0:
            raise ValueError(f"alpha must lie in (1/2, 2], got {self.alpha!r}")
        if self.tolerance <= 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance!r}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations!r}")

    def with_alpha(self, alpha: float) -> "EntropyParams":
        return EntropyParams(alpha, self.tolerance, self.max_iterations)


def dual_alpha(alpha: float) -> float:
    """alpha / (2 alpha - 1): the order paired with alpha by 1/alpha + 1/alpha~ = 2."""
    if alpha <= 0.5:
        raise ValueError(f"alpha must exceed 1/2, got {alpha!r}")
    return alpha / (2.0 * alpha - 1.0)


# ---------- array helpers ----------
def _eigh(mat: np.ndarray):
    return la.eigh(0.5 * (mat + mat.conj().T))


def _support(w: np.ndarray) -> np.ndarray:
    top = max(float(w[-1]), 0.0) if w.size else 0.0
    return w > SUPPORT_CUTOFF * top


def _psd_power(mat: np.ndarray, p: float) -> np.ndarray:
    w, v = _eigh(mat)
    keep = _support(w)
    powered = np.zeros_like(w)
    powered[keep] = w[keep] ** p
    return (v * powered) @ v.conj().T


def _trace_out_first(mat: np.ndarray, d_first: int, d_rest: int) -> np.ndarray:
    return np.einsum("ijik->jk", mat.reshape(d_first, d_rest, d_first, d_rest))


def _disjoint(*groups: Tuple[str, ...]) -> None:
    seen = set()
    for g in groups:
        overlap = seen.intersection(g)
        if overlap:
            raise LayoutError(f"Label sets overlap on {sorted(overlap)}")
        seen.update(g)


# ---------- unconditional ----------
def von_neumann(rho: DensityOperator) -> float:
    w = rho.eigenvalues()
    w = w[_support(w)]
    return float(-np.sum(w * np.log2(w)))


def renyi_entropy(rho: DensityOperator, alpha: float) -> float:
    """log2 Tr[rho^alpha] / (1 - alpha); von Neumann at alpha = 1."""
    if alpha == 1.0:
        return von_neumann(rho)
    w = rho.eigenvalues()
    w = w[_support(w)]
    return float(np.log2(np.sum(w ** alpha)) / (1.0 - alpha))


def conditional_entropy(rho: DensityOperator, a: Labels, b: Labels) -> float:
    """H(AB) - H(B); H(A) when b is empty."""
    a, b = as_labels(a), as_labels(b)
    _disjoint(a, b)
    h_ab = von_neumann(rho.marginal(a + b))
    if not b:
        return h_ab
    return h_ab - von_neumann(rho.marginal(b))


def cmi(rho: DensityOperator, a: Labels, r: Labels, b: Labels) -> float:
    """I(A;R|B) = H(A|B) - H(A|RB)."""
    a, r, b = as_labels(a), as_labels(r), as_labels(b)
    _disjoint(a, r, b)
    return conditional_entropy(rho, a, b) - conditional_entropy(rho, a, r + b)


def sandwiched_divergence(rho: DensityOperator, sigma: DensityOperator, alpha: float) -> float:
    """D_alpha(rho || sigma) in bits; +inf when the support condition fails."""
    if not 0.5 <= alpha <= 2.0 or alpha == 1.0:
        raise ValueError(f"alpha must lie in [1/2, 1) or (1, 2], got {alpha!r}")
    if rho.layout.total_dim != sigma.layout.total_dim:
        raise LayoutError(f"Layouts differ: [{rho.layout}] vs [{sigma.layout}]")
    w, v = _eigh(sigma.entries)
    keep = _support(w)
    if alpha > 1.0:
        outside = v[:, ~keep]
        leak = float(np.trace(outside.conj().T @ rho.entries @ outside).real) if outside.size else 0.0
        if leak > PSD_TOL:
            return math.inf
    b = (1.0 - alpha) / (2.0 * alpha)
    powered = np.zeros_like(w)
    powered[keep] = w[keep] ** b
    s = (v * powered) @ v.conj().T
    inner = s @ rho.entries @ s
    wi = _eigh(inner)[0]
    q = float(np.sum(wi[_support(wi)] ** alpha))
    if q <= 0.0:
        return math.inf
    return math.log2(q) / (alpha - 1.0)


# ---------- conditional ----------
class SandwichedObjective:
    """
    x -> (D_alpha(rho^{AC} || 1_A (x) sigma(x)), gradient), where x packs the
    real and imaginary parts of T and sigma(x) = T T^dagger / Tr(T T^dagger).
    rho^{AC} must have the A factors first.
    """

    def __init__(self, rho_ac: np.ndarray, dim_a: int, dim_c: int, alpha: float):
        self.dim_a = dim_a
        self.dim_c = dim_c
        self.alpha = alpha
        self.beta = (1.0 - alpha) / alpha
        self.rho_ac = rho_ac
        self.rho_half = _psd_power(rho_ac, 0.5)
        self.rho_c = _trace_out_first(rho_ac, dim_a, dim_c)

    def sigma(self, x: np.ndarray) -> np.ndarray:
        t = self.unpack(x)
        s = t @ t.conj().T
        return s / np.trace(s).real

    def unpack(self, x: np.ndarray) -> np.ndarray:
        n = self.dim_c * self.dim_c
        return (x[:n] + 1j * x[n:]).reshape(self.dim_c, self.dim_c)

    @staticmethod
    def pack(t: np.ndarray) -> np.ndarray:
        return np.concatenate([t.real.ravel(), t.imag.ravel()])

    def start_point(self) -> np.ndarray:
        d = self.dim_c
        sigma0 = (1.0 - START_MIX) * self.rho_c + START_MIX * np.eye(d) / d
        return self.pack(_psd_power(sigma0, 0.5))

    def _power_and_frechet(self, sigma: np.ndarray):
        """sigma^beta and its divided-difference matrix in sigma's eigenbasis."""
        lam, v = _eigh(sigma)
        lam = np.maximum(lam, SUPPORT_CUTOFF * max(float(lam[-1]), 0.0))
        f = lam ** self.beta
        df = self.beta * lam ** (self.beta - 1.0)
        diff = lam[:, None] - lam[None, :]
        close = np.abs(diff) <= 1e-12 * np.maximum(np.abs(lam[:, None]), np.abs(lam[None, :]))
        with np.errstate(divide="ignore", invalid="ignore"):
            dd = (f[:, None] - f[None, :]) / diff
        dd = np.where(close, 0.5 * (df[:, None] + df[None, :]), dd)
        return (v * f) @ v.conj().T, v, dd

    def _q_and_k(self, sigma_pow: np.ndarray):
        p = np.kron(np.eye(self.dim_a), sigma_pow)
        y = self.rho_half @ p @ self.rho_half
        w, u = _eigh(y)
        keep = _support(w)
        q = float(np.sum(w[keep] ** self.alpha))
        dy = np.zeros_like(w)
        dy[keep] = self.alpha * w[keep] ** (self.alpha - 1.0)
        k = self.rho_half @ ((u * dy) @ u.conj().T) @ self.rho_half
        return q, k

    def value(self, x: np.ndarray) -> float:
        sigma_pow, _, _ = self._power_and_frechet(self.sigma(x))
        q, _ = self._q_and_k(sigma_pow)
        if q <= 0.0:
            return math.inf
        return math.log2(q) / (self.alpha - 1.0)

    def __call__(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
        t = self.unpack(x)
        tt = t @ t.conj().T
        norm = float(np.trace(tt).real)
        sigma = tt / norm
        sigma_pow, v, dd = self._power_and_frechet(sigma)
        q, k = self._q_and_k(sigma_pow)
        if q <= 0.0:
            return math.inf, np.zeros_like(x)
        k_c = _trace_out_first(k, self.dim_a, self.dim_c)
        g = v @ (dd * (v.conj().T @ k_c @ v)) @ v.conj().T
        c = float(np.trace(g @ sigma).real)
        b = (2.0 / norm) * (g - c * np.eye(self.dim_c)) @ t
        scale = 1.0 / (q * (self.alpha - 1.0) * LN2)
        value = math.log2(q) / (self.alpha - 1.0)
        return value, scale * self.pack(b)


def _minimize_divergence(obj: SandwichedObjective, params: EntropyParams) -> float:
    best = {"value": math.inf, "x": obj.start_point()}
    last = {"x": best["x"], "step": math.inf}

    def tracked(x):
        val, grad = obj(x)
        if val < best["value"]:
            best["value"], best["x"] = val, np.array(x)
        return val, grad

    def step(x):
        last["step"] = float(np.linalg.norm(x - last["x"]))
        last["x"] = np.array(x)

    tol = params.tolerance
    res = minimize(
        tracked, best["x"], jac=True, method="L-BFGS-B", callback=step,
        options={"maxiter": params.max_iterations, "gtol": tol, "ftol": tol * 1e-2},
    )
    if res.success or float(np.max(np.abs(res.jac))) <= math.sqrt(tol):
        return min(float(res.fun), best["value"])

    log.warning("L-BFGS-B stopped (%s); restarting with Powell", res.message)
    res = minimize(
        lambda x: tracked(x)[0], best["x"], method="Powell", callback=step,
        options={"maxiter": params.max_iterations * best["x"].size, "xtol": tol, "ftol": tol},
    )
    if res.success:
        return min(float(res.fun), best["value"])
    raise NonConvergenceError(
        f"Conditional entropy minimizer did not converge at alpha={obj.alpha}",
        best_value=-best["value"], step_size=last["step"],
    )


def renyi_conditional(rho: DensityOperator, a: Labels, c: Labels,
                      params: EntropyParams = EntropyParams()) -> float:
    a, c = as_labels(a), as_labels(c)
    _disjoint(a, c)
    if params.alpha == 1.0:
        return conditional_entropy(rho, a, c)
    if not c:
        return renyi_entropy(rho.marginal(a), params.alpha)

    rho_ac = rho.marginal(a + c).permuted(a + c)
    dim_a = rho.layout.sub(a).total_dim
    dim_c = rho.layout.sub(c).total_dim
    obj = SandwichedObjective(rho_ac.entries, dim_a, dim_c, params.alpha)
    if dim_c == 1:
        return -obj.value(obj.start_point())
    return -_minimize_divergence(obj, params)
