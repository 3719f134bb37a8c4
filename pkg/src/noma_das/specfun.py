"""Exponential integrals and Rayleigh ergodic-capacity building blocks.

The ergodic rate formulas reduce to terms of the form

    C_t(x) = (1/ln 2) * sum_{k=0}^{t-1} e^(1/x) * E_{k+1}(1/x)

with E_n the generalized exponential integral int_1^inf e^(-x t) / t^n dt,
plus partial-fraction weights for sums of independent exponential gains.
E_n is evaluated by a power series for x <= 1 and a modified Lentz continued
fraction for x > 1.  The continued fraction yields e^x * E_n(x) directly,
which keeps C_t finite at small x where e^(1/x) alone would overflow.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

EULER_GAMMA = 0.5772156649015328606
LN2 = np.log(2.0)

_SERIES_MAX_TERMS = 80
_CF_MAX_ITER = 400
_FPMIN = 1e-300

#: products closer than this (relatively) count as coincident poles
DEGENERACY_REL_TOL = 1e-9
#: relative size of the multiplicative perturbation that separates them
DEGENERACY_BUMP = 1e-7


def _check_order(n) -> int:
    if not float(n).is_integer() or int(n) < 1:
        raise ValueError("order n must be an integer >= 1")
    return int(n)


def _expn_series(n: int, x: np.ndarray) -> np.ndarray:
    """E_n(x) for 0 <= x <= 1 (x > 0 when n == 1) via the log-series."""
    lx = np.log(np.where(x > 0.0, x, 1.0))
    psi = -EULER_GAMMA + sum(1.0 / k for k in range(1, n))
    if n == 1:
        ans = -lx - EULER_GAMMA
    else:
        ans = np.full_like(x, 1.0 / (n - 1))
    fact = np.ones_like(x)
    for i in range(1, _SERIES_MAX_TERMS + 1):
        fact = fact * (-x) / i
        if i == n - 1:
            delta = fact * (psi - lx)
        else:
            delta = -fact / (i - (n - 1))
        ans = ans + delta
        if np.all(np.abs(delta) <= 1e-16 * np.abs(ans)):
            return ans
    raise RuntimeError("exponential-integral series did not converge")


def _expn_cf_scaled(n: int, x: np.ndarray) -> np.ndarray:
    """e^x * E_n(x) for x > 1 via the modified Lentz continued fraction."""
    b = x + n
    c = np.full_like(x, 1.0 / _FPMIN)
    d = 1.0 / b
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for i in range(1, _CF_MAX_ITER + 1):
        a = -i * (n - 1 + i)
        b = b + 2.0
        d = a * d + b
        d = 1.0 / np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = b + a / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        delta = c * d
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < 1e-15
        if done.all():
            return h
    raise RuntimeError("exponential-integral continued fraction did not converge")


def _expn_dispatch(n: int, x, scaled: bool):
    n = _check_order(n)
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr < 0.0) or np.any(np.isnan(arr)):
        raise ValueError("E_n is defined for x >= 0 only")
    if n == 1 and np.any(arr == 0.0):
        raise ValueError("E_1 diverges at x = 0")
    out = np.empty_like(arr)
    small = arr <= 1.0
    if small.any():
        s = _expn_series(n, arr[small])
        out[small] = s * np.exp(arr[small]) if scaled else s
    big = ~small
    if big.any():
        cf = _expn_cf_scaled(n, arr[big])
        out[big] = cf if scaled else cf * np.exp(-arr[big])
    return float(out[0]) if scalar else out


def exp_integral_E(n, x):
    """Generalized exponential integral E_n(x) = int_1^inf e^(-x t) t^-n dt.

    Accepts scalar or array x >= 0 (x > 0 for n = 1).  Relative accuracy is
    near machine precision; note the unscaled value underflows for x above
    roughly 700, where ``exp_integral_scaled`` should be used instead.
    """
    return _expn_dispatch(n, x, scaled=False)


def exp_integral_scaled(n, x):
    """Overflow-safe product e^x * E_n(x), same domain as exp_integral_E."""
    return _expn_dispatch(n, x, scaled=True)


def exp_integral_quadrature(n, x: float, scaled: bool = False) -> float:
    """Slow adaptive-quadrature reference for E_n, used by tests and selftest.

    Integrates the defining integral directly (the e^x-scaled integrand when
    ``scaled``), independently of the series / continued-fraction path.
    """
    n = _check_order(n)
    if x < 0.0 or (n == 1 and x == 0.0):
        raise ValueError("x outside the domain of E_n")
    if x > 1.0:
        # substitute u = x (t - 1) so the decay scale is O(1) for any x
        integrand = lambda u: np.exp(-u) * (1.0 + u / x) ** (-n) / x
        val, _ = quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=400)
        return val if scaled else val * np.exp(-x)
    if scaled:
        integrand = lambda t: np.exp(-x * (t - 1.0)) / t**n
    else:
        integrand = lambda t: np.exp(-x * t) / t**n
    val, _ = quad(integrand, 1.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=400)
    return val


def ergodic_capacity_C(t, x):
    """C_t(x): ergodic capacity terms of a unit-mean exponential power gain.

    C_t(x) = (1/ln 2) sum_{k=0}^{t-1} e^(1/x) E_{k+1}(1/x), in bits/s/Hz.
    For t = 1 this is E[log2(1 + x Z)] with Z ~ Exp(1).  Requires x > 0;
    evaluation stays finite down to x ~ 1e-3 and far below.
    """
    t = _check_order(t)
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr <= 0.0) or np.any(np.isnan(arr)):
        raise ValueError("ergodic_capacity_C requires x > 0")
    y = 1.0 / arr
    total = np.zeros_like(arr)
    for k in range(t):
        total += exp_integral_scaled(k + 1, y)
    total /= LN2
    return float(total[0]) if scalar else total


def resolve_degenerate_products(products, rel_tol: float = DEGENERACY_REL_TOL,
                                bump: float = DEGENERACY_BUMP) -> np.ndarray:
    """Separate coincident pole locations before partial fractioning.

    Values agreeing within ``rel_tol`` (relatively) form a group; the j-th
    member of a group is multiplied by (1 + c_j * bump) with alternating
    offsets c_j = +1, -1, +2, -2, ...  A pair therefore gets the symmetric
    +/-bump, larger groups stay pairwise separated.
    """
    x = np.array(products, dtype=float, copy=True).reshape(-1)
    order = np.argsort(x, kind="stable")
    sx = x[order]
    start = 0
    for i in range(1, len(x) + 1):
        if i < len(x) and sx[i] - sx[i - 1] <= rel_tol * max(abs(sx[i]), abs(sx[i - 1])):
            continue
        if i - start >= 2:
            for j, idx in enumerate(order[start:i]):
                sign = 1.0 if j % 2 == 0 else -1.0
                x[idx] *= 1.0 + sign * (j // 2 + 1) * bump
        start = i
    return x


def _pairwise_weights(x: np.ndarray) -> np.ndarray:
    """Partial-fraction weights pi_i = prod_{k != i} x_i / (x_i - x_k).

    ``x`` has shape (..., k) with pairwise-distinct entries along the last
    axis (use resolve_degenerate_products first).
    """
    k = x.shape[-1]
    diff = x[..., :, None] - x[..., None, :]
    eye = np.eye(k, dtype=bool)
    diff = np.where(eye, 1.0, diff)
    ratio = np.where(eye, 1.0, x[..., :, None] / diff)
    return np.prod(ratio, axis=-1)


def mixture_weights(products) -> np.ndarray:
    """Weights of the exponential-mixture capacity expansion.

    Given per-branch mean received powers x_i (variance-power products), the
    ergodic capacity of sum_i x_i Z_i with i.i.d. Z_i ~ Exp(1) expands as
    sum_i pi_i C_1(x_i).  Coincident products are separated by
    resolve_degenerate_products before weighting, so the weights returned
    refer to the resolved products.
    """
    x = np.asarray(products, dtype=float).reshape(-1)
    if x.size == 0:
        raise ValueError("mixture_weights needs at least one product")
    if np.any(x <= 0.0) or not np.all(np.isfinite(x)):
        raise ValueError("variance-power products must be positive and finite")
    return _pairwise_weights(resolve_degenerate_products(x))


@dataclass(frozen=True)
class CapacityTermList:
    """Resolved (product, weight) pairs plus the noise power they divide by."""

    products: np.ndarray
    weights: np.ndarray
    noise_var: float = 1.0

    def __post_init__(self) -> None:
        p = np.asarray(self.products, dtype=float).reshape(-1)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if p.size != w.size or p.size == 0:
            raise ValueError("products and weights must be equal-length and nonempty")
        if np.any(p <= 0.0):
            raise ValueError("variance-power products must be positive")
        if not self.noise_var > 0.0:
            raise ValueError("noise variance must be positive")
        object.__setattr__(self, "products", p)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_products(cls, products, noise_var: float = 1.0) -> "CapacityTermList":
        """Build resolved terms from raw products; exact-zero products carry
        no received power and are dropped."""
        x = np.asarray(products, dtype=float).reshape(-1)
        if np.any(x < 0.0):
            raise ValueError("variance-power products must be nonnegative")
        x = x[x > 0.0]
        if x.size == 0:
            raise ValueError("no positive variance-power products left")
        resolved = resolve_degenerate_products(x)
        return cls(products=resolved, weights=_pairwise_weights(resolved),
                   noise_var=noise_var)


def ergodic_capacity_mixture(terms: CapacityTermList) -> float:
    """E[log2(1 + sum_i x_i Z_i / sigma^2)] from partial-fraction terms."""
    vals = ergodic_capacity_C(1, terms.products / terms.noise_var)
    return float(np.sum(terms.weights * vals))


def mixture_weights_rows(products: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise resolved products and weights for a (n, k) product array.

    Fast path assumes rows are nondegenerate; rows containing coincident
    products are routed through resolve_degenerate_products individually.
    """
    x = np.array(products, dtype=float, copy=True)
    sx = np.sort(x, axis=-1)
    gaps = sx[..., 1:] - sx[..., :-1]
    bad = np.any(gaps <= DEGENERACY_REL_TOL * np.abs(sx[..., 1:]), axis=-1)
    if bad.any():
        flat = x.reshape(-1, x.shape[-1])
        for r in np.flatnonzero(bad.reshape(-1)):
            flat[r] = resolve_degenerate_products(flat[r])
        x = flat.reshape(x.shape)
    return x, _pairwise_weights(x)


def mixture_capacity_rows(products: np.ndarray, sigma2: float = 1.0) -> np.ndarray:
    """Row-wise ergodic mixture capacity for a (n, k) array of products."""
    resolved, w = mixture_weights_rows(products)
    return np.sum(w * ergodic_capacity_C(1, resolved / sigma2), axis=-1)
