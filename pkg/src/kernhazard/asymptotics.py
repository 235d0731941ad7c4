"""Leading-order bias/variance of the hazard estimators and their optimal bandwidths.

With ``m = 1 - F`` and kernel moments ``A[i, j]`` the direct estimator has

    bias     ~ h^2 * B1,   B1 = A12/2 * (m (m f'' + 4 f f') + 3 f^3) / m^5
    variance ~ V1 / (n h), V1 = A20 * f / m

while the naive ratio estimator has

    bias     ~ h^2 * A12/2 * (m f'' + f f') / m^2
    variance ~ A20 * f / m^2 / (n h).

``AMSE = h^4 * bias_coeff^2 + variance_coeff / (n h)``; it is minimised at
``h = (variance_coeff / (4 n bias_coeff^2))^(1/5)``.

Table-style ("n-scaled") values are obtained with ``n = h = 1``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate, optimize

from .kernels import Kernel, epanechnikov
from .models import ParametricModel, SurvivalUnderflowError

__all__ = [
    "BiasDegenerateError",
    "AmseReport",
    "direct_bias_coeff",
    "direct_variance_coeff",
    "naive_bias_coeff",
    "naive_variance_coeff",
    "bias_coeff",
    "variance_coeff",
    "amse",
    "optimal_bandwidth",
    "numeric_optimal_bandwidth",
    "a2",
    "a4",
    "ts_bias",
    "ts_bias_coeff",
    "ts_variance_constant",
    "mise_optimal_bandwidth",
    "ts_optimal_bandwidth",
]

_DEGENERATE = 1e-300


class BiasDegenerateError(ArithmeticError):
    """Squared-bias coefficient vanishes, so the optimal bandwidth is unbounded."""


@dataclass(frozen=True)
class AmseReport:
    """Leading AMSE terms at ``(n, h)``; ``optimal_h`` is ``None`` when unbounded."""

    estimator: str
    x0: float
    n: float
    h: float
    bias_sq: float
    variance: float
    amse: float
    optimal_h: float | None

    @property
    def unbounded(self) -> bool:
        return self.optimal_h is None

    def to_dict(self) -> dict:
        return asdict(self)


def _survival_terms(model: ParametricModel, x0: float, order: int):
    m = model.survival(x0)
    return m, model.derivatives(x0, order)


def _cancel(*terms: float) -> float:
    """Sum of terms, snapped to 0 when below its own rounding noise."""
    total = math.fsum(terms)
    if abs(total) <= 32 * np.finfo(float).eps * sum(abs(t) for t in terms):
        return 0.0
    return total


def direct_bias_coeff(model: ParametricModel, x0: float, kernel: Kernel = epanechnikov) -> float:
    m, (f, f1, f2) = _survival_terms(model, x0, 2)
    m5 = m ** 5
    if m5 == 0.0:
        raise SurvivalUnderflowError(f"(1 - F({x0}))^5 underflows")
    num = _cancel(m * m * f2, 4.0 * m * f * f1, 3.0 * f ** 3)
    return 0.5 * kernel.moment(1, 2) * num / m5


def direct_variance_coeff(model: ParametricModel, x0: float, kernel: Kernel = epanechnikov) -> float:
    m = model.survival(x0)
    return kernel.moment(2, 0) * model.pdf_deriv(x0, 0) / m


def naive_bias_coeff(model: ParametricModel, x0: float, kernel: Kernel = epanechnikov) -> float:
    m, (f, f1, f2) = _survival_terms(model, x0, 2)
    return 0.5 * kernel.moment(1, 2) * _cancel(m * f2, f * f1) / m ** 2


def naive_variance_coeff(model: ParametricModel, x0: float, kernel: Kernel = epanechnikov) -> float:
    m = model.survival(x0)
    return kernel.moment(2, 0) * model.pdf_deriv(x0, 0) / m ** 2


def bias_coeff(kind: str, model, x0, kernel=epanechnikov) -> float:
    if kind == "direct":
        return direct_bias_coeff(model, x0, kernel)
    if kind == "naive":
        return naive_bias_coeff(model, x0, kernel)
    raise ValueError(f"no closed-form bias for estimator kind {kind!r}")


def variance_coeff(kind: str, model, x0, kernel=epanechnikov) -> float:
    if kind == "direct":
        return direct_variance_coeff(model, x0, kernel)
    if kind == "naive":
        return naive_variance_coeff(model, x0, kernel)
    raise ValueError(f"no closed-form variance for estimator kind {kind!r}")


def _optimal_h(b2: float, v: float, n: float) -> float:
    if b2 < _DEGENERATE:
        raise BiasDegenerateError("squared-bias coefficient vanishes; optimal bandwidth is unbounded")
    return (v / (4.0 * b2 * n)) ** 0.2


def amse(kind: str, model: ParametricModel, x0: float, n: float, h: float,
         kernel: Kernel = epanechnikov) -> AmseReport:
    """Leading squared bias, variance and their sum at bandwidth ``h``."""
    if not h > 0 or not n >= 1:
        raise ValueError("need h > 0 and n >= 1")
    b = bias_coeff(kind, model, x0, kernel)
    v = variance_coeff(kind, model, x0, kernel)
    b2 = b * b
    bias_sq = h ** 4 * b2
    variance = v / (n * h)
    try:
        opt = _optimal_h(b2, v, n)
    except BiasDegenerateError:
        opt = None
    return AmseReport(kind, float(x0), n, h, bias_sq, variance, bias_sq + variance, opt)


def optimal_bandwidth(kind: str, model: ParametricModel, x0: float, n: float,
                      kernel: Kernel = epanechnikov) -> float:
    """Closed-form AMSE minimiser (``h*`` for direct, ``h**`` for naive)."""
    b = bias_coeff(kind, model, x0, kernel)
    v = variance_coeff(kind, model, x0, kernel)
    return _optimal_h(b * b, v, n)


def least_amse(kind: str, model: ParametricModel, x0: float, n: float = 1,
               kernel: Kernel = epanechnikov) -> AmseReport:
    """AMSE report evaluated at the optimal bandwidth."""
    h = optimal_bandwidth(kind, model, x0, n, kernel)
    return amse(kind, model, x0, n, h, kernel)


def numeric_optimal_bandwidth(kind: str, model: ParametricModel, x0: float, n: float,
                              kernel: Kernel = epanechnikov) -> float:
    """Golden-section minimisation of the AMSE over ``log h``."""
    b = bias_coeff(kind, model, x0, kernel)
    v = variance_coeff(kind, model, x0, kernel)
    if b * b < _DEGENERATE:
        raise BiasDegenerateError("squared-bias coefficient vanishes; optimal bandwidth is unbounded")
    # bracket from the scale-free pieces only, so the search never sees the closed form
    centre = 0.2 * (math.log(v / n) - math.log(b * b))

    def objective(t):
        h = math.exp(t)
        # divide out the AMSE scale so the tolerance is relative
        return (h ** 4 * b * b + v / (n * h)) / (v / n) ** 0.8 / (b * b) ** 0.2

    res = optimize.minimize_scalar(objective, bracket=(centre - 3.0, centre, centre + 3.0),
                                   method="golden", tol=1e-10)
    return math.exp(res.x)


# -- higher order bias and the bias-reduced estimator ------------------------

def _m_derivs(model: ParametricModel, x0: float, upto: int):
    """``[m, m', ..., m^(upto)]`` with ``m^(k) = -f^(k-1)``."""
    m = model.survival(x0)
    fs = model.derivatives(x0, upto - 1)
    return [m] + [-fk for fk in fs]


def a2(model: ParametricModel, x0: float, kernel: Kernel = epanechnikov) -> float:
    """Coefficient of ``h^2`` in the bias of the direct estimator."""
    m, m1, m2, m3 = _m_derivs(model, x0, 3)
    num = _cancel(-m * m * m3, 4.0 * m * m1 * m2, -3.0 * m1 ** 3)
    return 0.5 * kernel.moment(1, 2) * num / m ** 5


def a4(model: ParametricModel, x0: float, kernel: Kernel = epanechnikov) -> float:
    """Coefficient of ``h^4`` in the bias of the direct estimator.

    Equal to ``A14 / 24`` times the fourth derivative of
    ``t -> H(M^-1(M(x0) + t))`` at zero, where ``M' = m``.
    """
    m, m1, m2, m3, m4, m5 = _m_derivs(model, x0, 5)
    num = _cancel(-60.0 * m ** 2 * m1 ** 2 * m3, 15.0 * m ** 3 * m2 * m3, 11.0 * m ** 3 * m1 * m4,
                  -m ** 4 * m5, 210.0 * m * m1 ** 3 * m2, -70.0 * m ** 2 * m1 * m2 ** 2,
                  -105.0 * m1 ** 5)
    return kernel.moment(1, 4) / 24.0 * num / m ** 9


def ts_bias_coeff(model: ParametricModel, x0: float, kernel: Kernel = epanechnikov) -> float:
    """``(2 a2^2 - 4 a4 H) / H``, the ``h^4`` bias coefficient of the bias-reduced estimator."""
    hz = float(model.hazard(x0))
    if hz == 0.0:
        raise ZeroDivisionError(f"hazard vanishes at x0={x0}")
    return (2.0 * a2(model, x0, kernel) ** 2 - 4.0 * a4(model, x0, kernel) * hz) / hz


def ts_bias(model: ParametricModel, x0: float, h: float, kernel: Kernel = epanechnikov) -> float:
    return ts_bias_coeff(model, x0, kernel) * h ** 4


def ts_variance_constant(kernel: Kernel = epanechnikov) -> float:
    """``int L^2`` for ``L(u) = 4/3 K(u) - 1/6 K(u/2)``, the linearised two-bandwidth kernel."""
    d = 2.0 * kernel.halfwidth

    def sq(u):
        return (4.0 / 3.0 * kernel.eval(u) - kernel.eval(0.5 * u) / 6.0) ** 2

    pts = [-kernel.halfwidth, kernel.halfwidth]
    val, _ = integrate.quad(sq, -d, d, points=pts, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def _x_grid(model: ParametricModel, quantile_range, grid: int) -> np.ndarray:
    lo, hi = quantile_range
    if not 0.0 < lo < hi < 1.0 or grid < 2:
        raise ValueError("need 0 < lo < hi < 1 and grid >= 2")
    return np.linspace(model.quantile(lo), model.quantile(hi), grid)


def mise_optimal_bandwidth(kind: str, model: ParametricModel, n: float, kernel: Kernel = epanechnikov,
                           quantile_range=(0.05, 0.95), grid: int = 101) -> float:
    """Bandwidth minimising the AMSE integrated (trapezoid) over a quantile range."""
    x = _x_grid(model, quantile_range, grid)
    b2 = np.array([bias_coeff(kind, model, xi, kernel) ** 2 for xi in x])
    v = np.array([variance_coeff(kind, model, xi, kernel) for xi in x])
    return _optimal_h(float(integrate.trapezoid(b2, x)), float(integrate.trapezoid(v, x)), n)


def ts_optimal_bandwidth(model: ParametricModel, n: float, x0: float | None = None,
                         kernel: Kernel = epanechnikov, *, mode: str = "rule",
                         base_bandwidth: float | None = None,
                         quantile_range=(0.05, 0.95), grid: int = 101) -> float:
    """Bandwidth for the bias-reduced estimator.

    ``mode="rule"`` returns ``h_dagger ** (5/9)`` where ``h_dagger`` is the
    integrated-AMSE optimal bandwidth of the direct estimator (or
    ``base_bandwidth`` when given). ``mode="proxy"`` is a heuristic: it
    minimises ``ts_bias^2 + H * int L^2 / (n h)`` at ``x0``, whose minimiser is
    ``(H int L^2 / (8 n c^2))^(1/9)`` for bias coefficient ``c``.
    """
    if mode == "rule":
        if base_bandwidth is None:
            base_bandwidth = mise_optimal_bandwidth("direct", model, n, kernel, quantile_range, grid)
        return base_bandwidth ** (5.0 / 9.0)
    if mode != "proxy":
        raise ValueError("mode must be 'rule' or 'proxy'")
    if x0 is None:
        raise ValueError("proxy mode needs an evaluation point x0")
    c = ts_bias_coeff(model, x0, kernel)
    if c * c < _DEGENERATE:
        raise BiasDegenerateError("bias-reduced estimator has vanishing h^4 bias coefficient")
    v = float(model.hazard(x0)) * ts_variance_constant(kernel)
    return (v / (8.0 * n * c * c)) ** (1.0 / 9.0)
