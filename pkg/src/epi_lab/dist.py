"""Zero-mean continuous distributions on the real line.

Every family here has a density that is positive everywhere, a finite second
moment and finite entropy. Each exposes pdf / logpdf / cdf / sf / quantile /
isf in vectorised form, and sampling goes through the quantile so that draws
exercise the same inverse-cdf code path that transport maps use.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

MAX_MIXTURE_COMPONENTS = 8
_QUANTILE_TOL = 1e-13


class DomainError(ValueError):
    """Argument outside the domain of an operation."""


class Family(str, enum.Enum):
    GAUSSIAN = "gaussian"
    GAUSSIAN_MIXTURE = "gaussian_mixture"
    LAPLACE = "laplace"
    LOGISTIC = "logistic"


def _as_finite(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("x must be finite")
    return x


def _as_prob(u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if not np.all((u > 0.0) & (u < 1.0)):
        raise DomainError("u must lie in the open interval (0, 1)")
    return u


def _out(x: np.ndarray):
    return float(x) if x.ndim == 0 else x


class Distribution1D:
    """Base class. Subclasses are frozen dataclasses, hence hashable."""

    family: Family

    # subclasses implement the underscored versions on float arrays
    def _logpdf(self, x): raise NotImplementedError
    def _cdf(self, x): raise NotImplementedError
    def _sf(self, x): raise NotImplementedError
    def _quantile(self, u): raise NotImplementedError
    def _isf(self, u): raise NotImplementedError

    @property
    def power(self) -> float:
        raise NotImplementedError

    @property
    def std(self) -> float:
        return math.sqrt(self.power)

    def scaled(self, a: float) -> "Distribution1D":
        """Law of ``a * X``."""
        raise NotImplementedError

    def logpdf(self, x):
        return _out(self._logpdf(_as_finite(x)))

    def pdf(self, x):
        return _out(np.exp(self._logpdf(_as_finite(x))))

    def cdf(self, x):
        return _out(self._cdf(_as_finite(x)))

    def sf(self, x):
        return _out(self._sf(_as_finite(x)))

    def quantile(self, u):
        return _out(self._quantile(_as_prob(u)))

    def isf(self, u):
        """Inverse survival function, accurate for tiny upper-tail masses."""
        return _out(self._isf(_as_prob(u)))

    def evaluate(self, x: float) -> dict:
        x = float(_as_finite(x))
        lp = float(self._logpdf(np.asarray(x)))
        return {"pdf": math.exp(lp), "logpdf": lp, "cdf": float(self._cdf(np.asarray(x)))}

    def sample(self, n: int, seed: int) -> np.ndarray:
        if n < 1:
            raise DomainError("n must be >= 1")
        rng = np.random.default_rng(seed)
        # draws of exactly 0.0 are possible in principle and invalid for quantile
        u = rng.uniform(np.finfo(float).tiny, 1.0, size=n)
        return self._quantile(u)

    def to_spec(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Gaussian(Distribution1D):
    var: float = 1.0
    family: Family = field(default=Family.GAUSSIAN, init=False, repr=False)

    def __post_init__(self):
        if not 0 < self.var < math.inf:
            raise DomainError("variance must be positive")

    @property
    def sigma(self) -> float:
        return math.sqrt(self.var)

    @property
    def power(self) -> float:
        return self.var

    def scaled(self, a):
        return Gaussian(a * a * self.var)

    def _logpdf(self, x):
        return -0.5 * x * x / self.var - 0.5 * math.log(2 * math.pi * self.var)

    def _cdf(self, x):
        return special.ndtr(x / self.sigma)

    def _sf(self, x):
        return special.ndtr(-x / self.sigma)

    def _quantile(self, u):
        return self.sigma * special.ndtri(u)

    def _isf(self, u):
        return -self.sigma * special.ndtri(u)

    def to_spec(self):
        return {"family": "gaussian", "var": self.var}


@dataclass(frozen=True)
class Laplace(Distribution1D):
    b: float = 1.0
    family: Family = field(default=Family.LAPLACE, init=False, repr=False)

    def __post_init__(self):
        if not 0 < self.b < math.inf:
            raise DomainError("scale b must be positive")

    @property
    def power(self) -> float:
        return 2.0 * self.b * self.b

    def scaled(self, a):
        return Laplace(abs(a) * self.b)

    def _logpdf(self, x):
        return -np.abs(x) / self.b - math.log(2 * self.b)

    def _cdf(self, x):
        return np.where(x < 0, 0.5 * np.exp(np.minimum(x, 0) / self.b),
                        1.0 - 0.5 * np.exp(-np.maximum(x, 0) / self.b))

    def _sf(self, x):
        return self._cdf(-x)

    def _quantile(self, u):
        return np.where(u < 0.5, self.b * np.log(2 * np.minimum(u, 0.5)),
                        -self.b * np.log(2 * (1 - np.maximum(u, 0.5))))

    def _isf(self, u):
        return -self._quantile(u)

    def to_spec(self):
        return {"family": "laplace", "b": self.b}


@dataclass(frozen=True)
class Logistic(Distribution1D):
    s: float = 1.0
    family: Family = field(default=Family.LOGISTIC, init=False, repr=False)

    def __post_init__(self):
        if not 0 < self.s < math.inf:
            raise DomainError("scale s must be positive")

    @property
    def power(self) -> float:
        return (math.pi * self.s) ** 2 / 3.0

    def scaled(self, a):
        return Logistic(abs(a) * self.s)

    def _logpdf(self, x):
        z = np.abs(x) / self.s
        return -z - 2.0 * np.log1p(np.exp(-z)) - math.log(self.s)

    def _cdf(self, x):
        return special.expit(x / self.s)

    def _sf(self, x):
        return special.expit(-x / self.s)

    def _quantile(self, u):
        return self.s * special.logit(u)

    def _isf(self, u):
        return -self.s * special.logit(u)

    def to_spec(self):
        return {"family": "logistic", "s": self.s}


@dataclass(frozen=True)
class GaussianMixture(Distribution1D):
    """Finite Gaussian mixture, recentred so its mean is exactly zero.

    ``scales`` are component standard deviations. Weights are normalised.
    """

    weights: tuple[float, ...]
    means: tuple[float, ...]
    scales: tuple[float, ...]
    family: Family = field(default=Family.GAUSSIAN_MIXTURE, init=False, repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        m = np.asarray(self.means, dtype=float)
        s = np.asarray(self.scales, dtype=float)
        if not (w.ndim == m.ndim == s.ndim == 1 and len(w) == len(m) == len(s)):
            raise DomainError("weights, means and scales must be equal-length sequences")
        if not 1 <= len(w) <= MAX_MIXTURE_COMPONENTS:
            raise DomainError(f"mixture needs 1..{MAX_MIXTURE_COMPONENTS} components")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(m)) and np.all(np.isfinite(s))):
            raise DomainError("mixture parameters must be finite")
        if np.any(w <= 0) or np.any(s <= 0):
            raise DomainError("weights and scales must be positive")
        w = w / w.sum()
        m = m - np.dot(w, m)
        object.__setattr__(self, "weights", tuple(float(v) for v in w))
        object.__setattr__(self, "means", tuple(float(v) for v in m))
        object.__setattr__(self, "scales", tuple(float(v) for v in s))

    @functools.cached_property
    def _w(self):
        return np.asarray(self.weights)

    @functools.cached_property
    def _m(self):
        return np.asarray(self.means)

    @functools.cached_property
    def _s(self):
        return np.asarray(self.scales)

    @functools.cached_property
    def _log_norm(self):
        return np.log(self._w) - np.log(self._s) - 0.5 * math.log(2 * math.pi)

    @property
    def power(self) -> float:
        return float(np.dot(self._w, self._m ** 2 + self._s ** 2))

    def scaled(self, a):
        if a == 0:
            raise DomainError("scale factor must be nonzero")
        return GaussianMixture(self.weights, tuple(a * v for v in self.means),
                               tuple(abs(a) * v for v in self.scales))

    def _z(self, x):
        return (x[..., None] - self._m) / self._s

    def _logpdf(self, x):
        z = self._z(x)
        comp = self._log_norm - 0.5 * z * z
        top = comp.max(axis=-1)
        return top + np.log(np.exp(comp - top[..., None]).sum(axis=-1))

    def _cdf(self, x):
        return special.ndtr(self._z(x)) @ self._w

    def _sf(self, x):
        return special.ndtr(-self._z(x)) @ self._w

    def _bracket(self):
        return float(np.max(np.abs(self._m)) + 12.0 * np.max(self._s))

    def _solve(self, u, upper: bool):
        """Safeguarded Newton on cdf(x) = u (or sf(x) = u when ``upper``).

        Uses relative residuals so tiny tail masses resolve to full precision.
        """
        u = np.asarray(u, dtype=float)
        if u.size == 0:
            return u.copy()
        g = self._sf if upper else self._cdf
        sign = -1.0 if upper else 1.0
        lo = np.full(u.shape, -self._bracket())
        hi = np.full(u.shape, self._bracket())
        # widen the bracket until it contains the root (far tails)
        for _ in range(64):
            bad = (g(lo) - u) * sign > 0
            if not bad.any():
                break
            lo = np.where(bad, 2 * lo, lo)
        for _ in range(64):
            bad = (g(hi) - u) * sign < 0
            if not bad.any():
                break
            hi = np.where(bad, 2 * hi, hi)

        # Newton on log g: the tails are exponential-like, so steps in the raw
        # cdf would crawl; bisection takes over whenever Newton leaves the bracket
        x = np.clip(np.zeros(u.shape), lo, hi)
        log_u = np.log(u)
        for _ in range(200):
            gx = g(x)
            r = gx - u
            above = r * sign > 0
            hi = np.where(above, x, hi)
            lo = np.where(above, lo, x)
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                step = sign * (np.log(gx) - log_u) * gx / np.exp(self._logpdf(x))
                xn = x - step
            inside = np.isfinite(xn) & (xn > lo) & (xn < hi)
            xn = np.where(inside, xn, 0.5 * (lo + hi))
            done = ((np.abs(r) <= _QUANTILE_TOL * u)
                    | (hi - lo <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(x))))
            if done.all():
                break
            x = np.where(done, x, xn)
        return x

    def _quantile(self, u):
        # solve on whichever tail keeps the target mass small
        u = np.asarray(u, dtype=float)
        flat = u.reshape(-1)
        lower = flat <= 0.5
        out = np.empty(flat.shape)
        out[lower] = self._solve(flat[lower], upper=False)
        out[~lower] = self._solve(1.0 - flat[~lower], upper=True)
        return out.reshape(u.shape)

    def _isf(self, u):
        u = np.asarray(u, dtype=float)
        flat = u.reshape(-1)
        upper = flat <= 0.5
        out = np.empty(flat.shape)
        out[upper] = self._solve(flat[upper], upper=True)
        out[~upper] = self._solve(1.0 - flat[~upper], upper=False)
        return out.reshape(u.shape)

    def to_spec(self):
        return {"family": "gaussian_mixture", "weights": list(self.weights),
                "means": list(self.means), "scales": list(self.scales)}


def from_spec(spec: dict) -> Distribution1D:
    """Build a distribution from a ``{family, params...}`` record."""
    spec = dict(spec)
    try:
        family = Family(spec.pop("family"))
    except (KeyError, ValueError) as exc:
        raise DomainError(f"unknown or missing family in {spec!r}") from exc
    if family is Family.GAUSSIAN:
        d = Gaussian(float(spec.pop("var", 1.0)))
    elif family is Family.LAPLACE:
        d = Laplace(float(spec.pop("b", 1.0)))
    elif family is Family.LOGISTIC:
        d = Logistic(float(spec.pop("s", 1.0)))
    else:
        try:
            d = GaussianMixture(tuple(spec.pop("weights")), tuple(spec.pop("means")),
                                tuple(spec.pop("scales")))
        except KeyError as exc:
            raise DomainError(f"gaussian_mixture needs {exc.args[0]!r}") from exc
    if spec:
        raise DomainError(f"unexpected parameters for {family.value}: {sorted(spec)}")
    return d

def power(d: Distribution1D) -> float:
    return d.power


def quantile(d: Distribution1D, u):
    return d.quantile(u)


def sample(d: Distribution1D, n: int, seed: int) -> np.ndarray:
    return d.sample(n, seed)


def evaluate(d: Distribution1D, x: float) -> dict:
    return d.evaluate(x)
