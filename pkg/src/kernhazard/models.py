"""Parametric lifetime distributions used as ground truth.

Each model exposes its density and the first four density derivatives in
closed form, the survival function, the hazard ``f / (1 - F)``, a quantile
function and a seeded inverse-CDF sampler.

Density derivatives are assembled from derivatives of the log-density
``g = log f``::

    f'    = f g'
    f''   = f (g'' + g'^2)
    f'''  = f (g''' + 3 g' g'' + g'^3)
    f'''' = f (g'''' + 4 g' g''' + 3 g''^2 + 6 g'^2 g'' + g'^4)

which keeps everything well scaled even where ``f`` itself is tiny.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

__all__ = [
    "DomainError",
    "SurvivalUnderflowError",
    "ParametricModel",
    "Exponential",
    "Uniform",
    "Gamma",
    "Weibull",
    "ScaledBeta",
    "parse_model",
]

MAX_ORDER = 4
_SF_FLOOR = 1e-300


class DomainError(ValueError):
    """Evaluation point outside the open support of the model."""


class SurvivalUnderflowError(ArithmeticError):
    """``1 - F(x)`` is too small to divide by."""


def _falling(a: float, k: int) -> float:
    out = 1.0
    for i in range(k):
        out *= a - i
    return out


class ParametricModel:
    """Common machinery; subclasses supply the family-specific pieces."""

    family: str = ""
    # density extends continuously to the left endpoint (right limits are used there)
    closed_lower: bool = False

    # -- family hooks -------------------------------------------------------
    @property
    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def logpdf(self, x):
        raise NotImplementedError

    def _dlog(self, x: np.ndarray, k: int) -> np.ndarray:
        """k-th derivative of log f at interior points, k >= 1."""
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def sf(self, x):
        raise NotImplementedError

    def _ppf_guess(self, q: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- shared -------------------------------------------------------------
    @property
    def params(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}

    def __str__(self) -> str:
        args = ",".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.family}:{args}"

    def pdf(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = ((x >= lo) if self.closed_lower else (x > lo)) & (x < hi)
        safe = np.where(inside, x, 0.5 * (lo + hi) if math.isfinite(hi) else lo + 1.0)
        out = np.where(inside, np.exp(self.logpdf(safe)), 0.0)
        return out if out.ndim else float(out)

    def _check_interior(self, x: np.ndarray) -> None:
        lo, hi = self.support
        left = (x >= lo) if self.closed_lower else (x > lo)
        if np.any(~(left & (x < hi))):
            raise DomainError(f"{self}: x outside the support ({lo}, {hi})")

    def pdf_deriv(self, x, order: int):
        """``order``-th derivative of the density (0 <= order <= 4)."""
        if not 0 <= order <= MAX_ORDER:
            raise ValueError(f"derivative order must be in 0..{MAX_ORDER}, got {order}")
        x = np.asarray(x, dtype=float)
        self._check_interior(x)
        f = np.exp(self.logpdf(x))
        if order == 0:
            return f if f.ndim else float(f)
        g = [None] + [self._dlog(x, k) for k in range(1, order + 1)]
        if order == 1:
            poly = g[1]
        elif order == 2:
            poly = g[2] + g[1] ** 2
        elif order == 3:
            poly = g[3] + 3 * g[1] * g[2] + g[1] ** 3
        else:
            poly = g[4] + 4 * g[1] * g[3] + 3 * g[2] ** 2 + 6 * g[1] ** 2 * g[2] + g[1] ** 4
        out = f * poly
        return out if out.ndim else float(out)

    def derivatives(self, x: float, upto: int = 2) -> list[float]:
        """``[f, f', ..., f^(upto)]`` at a scalar point."""
        return [self.pdf_deriv(x, k) for k in range(upto + 1)]

    def survival(self, x: float) -> float:
        m = float(self.sf(x))
        if not m > _SF_FLOOR:
            raise SurvivalUnderflowError(f"{self}: 1 - F({x}) = {m:g} underflows")
        return m

    def hazard(self, x):
        """``f(x) / (1 - F(x))``."""
        x = np.asarray(x, dtype=float)
        m = np.asarray(self.sf(x))
        if np.any(~(m > _SF_FLOOR)):
            raise SurvivalUnderflowError(f"{self}: survival underflows at x={x}")
        out = self.pdf(x) / m
        return out if np.ndim(out) else float(out)

    def ppf(self, q):
        """Vectorised quantile: family inverse followed by Newton polish on the CDF."""
        q = np.asarray(q, dtype=float)
        if np.any(~((q > 0) & (q < 1))):
            raise ValueError("quantile level must lie in (0, 1)")
        lo, hi = self.support
        x = np.asarray(self._ppf_guess(q), dtype=float)
        for _ in range(3):
            f = self.pdf(x)
            ok = f > 0
            step = np.where(ok, (np.asarray(self.cdf(x)) - q) / np.where(ok, f, 1.0), 0.0)
            cand = x - step
            # keep iterates strictly inside the support; fall back to bisection-style halving
            bad = ~((cand > lo) & (cand < hi))
            cand = np.where(bad, np.where(step > 0, 0.5 * (x + lo), 0.5 * (x + hi)), cand)
            x = np.where(np.abs(step) > 0, cand, x)
        return x if x.ndim else float(x)

    def quantile(self, eps: float) -> float:
        if not 0.0 < eps < 1.0:
            raise ValueError(f"quantile level must lie in (0, 1), got {eps}")
        return float(self.ppf(eps))

    def sample(self, n: int, seed=None) -> np.ndarray:
        """Inverse-CDF draws from ``numpy.random.default_rng(seed)``."""
        if n < 1:
            raise ValueError("sample size must be >= 1")
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        u = rng.random(n)
        # random() can return exactly 0
        u = np.where(u > 0, u, np.nextafter(0.0, 1.0))
        return np.asarray(self.ppf(u), dtype=float)

    def mean(self) -> float:
        raise NotImplementedError

    def std(self) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class Exponential(ParametricModel):
    """Exponential with rate ``rate``: F(x) = 1 - exp(-rate x)."""

    rate: float = 1.0
    family = "exponential"
    closed_lower = True

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")

    @property
    def support(self):
        return (0.0, math.inf)

    def logpdf(self, x):
        return math.log(self.rate) - self.rate * np.asarray(x, dtype=float)

    def _dlog(self, x, k):
        return np.full_like(x, -self.rate if k == 1 else 0.0)

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return -np.expm1(-self.rate * x)

    def sf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return np.exp(-self.rate * x)

    def _ppf_guess(self, q):
        return -np.log1p(-q) / self.rate

    def mean(self):
        return 1.0 / self.rate

    def std(self):
        return 1.0 / self.rate


@dataclass(frozen=True)
class Uniform(ParametricModel):
    """Uniform on ``(0, b)``."""

    b: float = 1.0
    family = "uniform"
    closed_lower = True

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError("b must be positive")

    @property
    def support(self):
        return (0.0, self.b)

    def logpdf(self, x):
        return np.full_like(np.asarray(x, dtype=float), -math.log(self.b))

    def _dlog(self, x, k):
        return np.zeros_like(x)

    def cdf(self, x):
        return np.clip(np.asarray(x, dtype=float) / self.b, 0.0, 1.0)

    def sf(self, x):
        return np.clip((self.b - np.asarray(x, dtype=float)) / self.b, 0.0, 1.0)

    def _ppf_guess(self, q):
        return q * self.b

    def mean(self):
        return 0.5 * self.b

    def std(self):
        return self.b / math.sqrt(12.0)


@dataclass(frozen=True)
class Gamma(ParametricModel):
    """Gamma with shape ``shape`` and scale ``scale`` (mean ``shape * scale``)."""

    shape: float = 1.0
    scale: float = 1.0
    family = "gamma"

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError("shape and scale must be positive")

    @property
    def support(self):
        return (0.0, math.inf)

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        p, s = self.shape, self.scale
        return (p - 1) * np.log(x) - x / s - special.gammaln(p) - p * math.log(s)

    def _dlog(self, x, k):
        p = self.shape
        poly = (p - 1) * (-1) ** (k - 1) * math.factorial(k - 1) / x ** k
        return poly - 1.0 / self.scale if k == 1 else poly

    def cdf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return special.gammainc(self.shape, x / self.scale)

    def sf(self, x):
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        return special.gammaincc(self.shape, x / self.scale)

    def _ppf_guess(self, q):
        return special.gammaincinv(self.shape, q) * self.scale

    def mean(self):
        return self.shape * self.scale

    def std(self):
        return math.sqrt(self.shape) * self.scale


@dataclass(frozen=True)
class Weibull(ParametricModel):
    """Weibull with shape ``shape`` and scale ``scale``: F(x) = 1 - exp(-(x/scale)^shape)."""

    shape: float = 1.0
    scale: float = 1.0
    family = "weibull"

    def __post_init__(self):
        if not (self.shape > 0 and self.scale > 0):
            raise ValueError("shape and scale must be positive")

    @property
    def support(self):
        return (0.0, math.inf)

    def logpdf(self, x):
        z = np.asarray(x, dtype=float) / self.scale
        q = self.shape
        return math.log(q / self.scale) + (q - 1) * np.log(z) - z ** q

    def _dlog(self, x, k):
        q, s = self.shape, self.scale
        log_part = (q - 1) * (-1) ** (k - 1) * math.factorial(k - 1) / x ** k
        return log_part - _falling(q, k) * x ** (q - k) / s ** q

    def cdf(self, x):
        z = np.maximum(np.asarray(x, dtype=float), 0.0) / self.scale
        return -np.expm1(-(z ** self.shape))

    def sf(self, x):
        z = np.maximum(np.asarray(x, dtype=float), 0.0) / self.scale
        return np.exp(-(z ** self.shape))

    def _ppf_guess(self, q):
        return self.scale * (-np.log1p(-q)) ** (1.0 / self.shape)

    def mean(self):
        return self.scale * math.gamma(1 + 1 / self.shape)

    def std(self):
        g1 = math.gamma(1 + 1 / self.shape)
        g2 = math.gamma(1 + 2 / self.shape)
        return self.scale * math.sqrt(g2 - g1 * g1)


@dataclass(frozen=True)
class ScaledBeta(ParametricModel):
    """``scale * Z`` with ``Z ~ Beta(r, s)``; support ``(0, scale)``."""

    r: float = 1.0
    s: float = 1.0
    scale: float = 1.0
    family = "beta"

    def __post_init__(self):
        if not (self.r > 0 and self.s > 0 and self.scale > 0):
            raise ValueError("r, s and scale must be positive")

    @property
    def support(self):
        return (0.0, self.scale)

    def logpdf(self, x):
        z = np.asarray(x, dtype=float) / self.scale
        return ((self.r - 1) * np.log(z) + (self.s - 1) * np.log1p(-z)
                - special.betaln(self.r, self.s) - math.log(self.scale))

    def _dlog(self, x, k):
        c = (-1) ** (k - 1) * math.factorial(k - 1)
        return (self.r - 1) * c / x ** k - (self.s - 1) * math.factorial(k - 1) / (self.scale - x) ** k

    def cdf(self, x):
        z = np.clip(np.asarray(x, dtype=float) / self.scale, 0.0, 1.0)
        return special.betainc(self.r, self.s, z)

    def sf(self, x):
        z = np.clip(np.asarray(x, dtype=float) / self.scale, 0.0, 1.0)
        return special.betainc(self.s, self.r, 1.0 - z)

    def _ppf_guess(self, q):
        return special.betaincinv(self.r, self.s, q) * self.scale

    def mean(self):
        return self.scale * self.r / (self.r + self.s)

    def std(self):
        r, s = self.r, self.s
        return self.scale * math.sqrt(r * s / ((r + s) ** 2 * (r + s + 1)))


_FAMILIES = {
    "exponential": (Exponential, {"rate": "rate", "lambda": "rate", "lam": "rate"}),
    "exp": (Exponential, {"rate": "rate", "lambda": "rate", "lam": "rate"}),
    "uniform": (Uniform, {"b": "b", "scale": "b"}),
    "gamma": (Gamma, {"shape": "shape", "p": "shape", "scale": "scale", "sigma": "scale"}),
    "weibull": (Weibull, {"shape": "shape", "q": "shape", "scale": "scale", "sigma": "scale"}),
    "beta": (ScaledBeta, {"r": "r", "s": "s", "scale": "scale", "sigma": "scale"}),
}


def _number(text: str) -> float:
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def parse_model(text: str) -> ParametricModel:
    """Build a model from ``family:key=value,...``, e.g. ``gamma:shape=0.5,scale=100``.

    Fractions such as ``shape=1/2`` are accepted.
    """
    family, _, rest = text.strip().partition(":")
    try:
        cls, aliases = _FAMILIES[family.lower()]
    except KeyError:
        raise ValueError(f"unknown model family {family!r}") from None
    kwargs = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep or key.strip().lower() not in aliases:
            raise ValueError(f"bad parameter {item!r} for family {family!r}")
        kwargs[aliases[key.strip().lower()]] = _number(value.strip())
    return cls(**kwargs)
