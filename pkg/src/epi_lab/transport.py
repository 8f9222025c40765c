"""Monotone transport maps and the change-of-variable identities they satisfy.

A 1-D transport pushes ``source`` onto ``target`` through
``T = F_target^{-1} o F_source``. Its derivative is taken from the two
densities, ``T'(x) = p_source(x) / p_target(T(x))``, never by differencing.
The 2-D Knothe map is the triangular analogue for product sources.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .dist import Distribution1D, DomainError, Gaussian, GaussianMixture, Laplace
from .entropy import diff_entropy
from .gaussian import CovMatrix, gaussian_entropy

TAIL_SIGMAS = 10.0
PROBE_POINTS = 10_000
_TINY = np.finfo(float).tiny


class TransportError(RuntimeError):
    pass


@dataclass(frozen=True)
class Transport1D:
    source: Distribution1D
    target: Distribution1D

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        lo = np.clip(self.source.cdf(x), _TINY, 1.0)
        hi = np.clip(self.source.sf(x), _TINY, 1.0)
        lower = lo <= 0.5
        # pick the tail whose probability is represented accurately
        out = np.empty(x.shape)
        if lower.any():
            out[lower] = self.target.quantile(lo[lower])
        if not lower.all():
            out[~lower] = self.target.isf(hi[~lower])
        return float(out) if out.ndim == 0 else out

    def log_derivative(self, x):
        x = np.asarray(x, dtype=float)
        out = self.source.logpdf(x) - self.target.logpdf(self(x))
        return out

    def derivative(self, x):
        return np.exp(self.log_derivative(x))

    def kinks(self) -> list[float]:
        """Source points where log T' is not smooth."""
        pts = []
        if isinstance(self.source, Laplace):
            pts.append(0.0)
        if isinstance(self.target, Laplace):
            # T(x) = 0 where F_source(x) = F_target(0) = 1/2
            pts.append(float(self.source.quantile(0.5)))
        return sorted(set(pts))

    def probe_grid(self, n: int = PROBE_POINTS) -> np.ndarray:
        half = TAIL_SIGMAS * self.source.std
        return np.linspace(-half, half, n)


def build_transport(source: Distribution1D, target: Distribution1D,
                    validate: bool = True) -> Transport1D:
    """Increasing map T with T(X_source) distributed as target.

    With ``validate`` the map is probed for strict monotonicity, a positive
    derivative and the pushforward identity ``F_target(T(x)) = F_source(x)``.
    """
    t = Transport1D(source, target)
    if validate:
        x = t.probe_grid()
        y = t(x)
        if not np.all(np.diff(y) > 0):
            raise TransportError("transport is not strictly increasing on the probe grid")
        if not np.all(t.derivative(x) > 0):
            raise TransportError("transport derivative is not positive on the probe grid")
        lower = x <= 0
        push = np.where(lower, np.abs(target.cdf(y) - source.cdf(x)),
                        np.abs(target.sf(y) - source.sf(x)))
        if push.max() > 1e-10:
            raise TransportError(f"pushforward mismatch {push.max():.3g} exceeds 1e-10")
    return t


@dataclass(frozen=True)
class IdentityCheck:
    """Signed residual ``lhs - rhs`` of an identity expected to hold exactly."""

    lhs: float
    rhs: float
    err: float

    @property
    def signed(self) -> float:
        return self.lhs - self.rhs

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)


@functools.lru_cache(maxsize=256)
def expected_log_derivative(t: Transport1D, tol: float = 1e-10) -> numerics.QuadratureResult:
    """E_source[log T'] by adaptive quadrature over +-10 source standard deviations."""
    src = t.source

    def integrand(x):
        return math.exp(src.logpdf(x)) * float(t.log_derivative(x))

    half = TAIL_SIGMAS * src.std
    pts = t.kinks()
    if isinstance(src, GaussianMixture):
        pts = sorted(set(pts) | set(src.means))
    res = numerics.integrate_1d(integrand, -half, half, tol=tol, points=pts)
    # bound the neglected tails by the mass there times |log T'| at the cut
    out = float(src.cdf(-half) + src.sf(half))
    edge = max(abs(float(t.log_derivative(-half))), abs(float(t.log_derivative(half))))
    return numerics.QuadratureResult(res.value, res.err_estimate + out * (edge + 1.0),
                                     res.evaluations)


def verify_change_of_variable(t: Transport1D) -> IdentityCheck:
    """h(target) against h(source) + E[log T'(source)]."""
    e = expected_log_derivative(t)
    hs, ht = diff_entropy(t.source), diff_entropy(t.target)
    return IdentityCheck(ht.nats, hs.nats + e.value, hs.err + ht.err + e.err_estimate)


@dataclass(frozen=True)
class JensenResult:
    e_mix: float
    mix_of_e: float

    @property
    def gap(self) -> float:
        return self.e_mix - self.mix_of_e


def jensen_expectation(tX: Transport1D, tY: Transport1D, lam: float,
                       panels: int = 160) -> JensenResult:
    """E log(l T'(X*) + (1-l) U'(Y*)) against l E log T'(X*) + (1-l) E log U'(Y*).

    Both sides use one positive-weight product rule (composite Gauss-Legendre
    under the Gaussian weights, split at kinks of log T'), so concavity of
    the logarithm makes the discrete gap nonnegative up to round-off.
    """
    if not 0.0 < lam < 1.0:
        raise DomainError(f"lambda must lie in (0, 1), got {lam}")
    for t in (tX, tY):
        if not isinstance(t.source, Gaussian):
            raise DomainError("jensen_expectation needs transports sourced from Gaussians")
    la, lb = math.log(lam), math.log1p(-lam)

    def run(k):
        rx = numerics.gaussian_panel_rule(tX.source.sigma, tX.kinks(), panels=k)
        ry = numerics.gaussian_panel_rule(tY.source.sigma, tY.kinks(), panels=k)
        a = tX.log_derivative(rx.nodes)
        b = tY.log_derivative(ry.nodes)
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise FloatingPointError("log-derivative not finite at a quadrature node")
        e_mix = numerics.panel_expect_2d(a, b, lambda p, q: np.logaddexp(la + p, lb + q), rx, ry)
        mass_x, mass_y = rx.weights.sum(), ry.weights.sum()
        # normalise the one-dimensional terms to the same truncated product measure
        mix = lam * float(rx.weights @ a) * mass_y + (1 - lam) * float(ry.weights @ b) * mass_x
        return JensenResult(float(e_mix), float(mix))

    try:
        return run(panels)
    except FloatingPointError:
        return run(2 * panels)


@dataclass(frozen=True)
class Gaussian2D:
    K: CovMatrix


@dataclass(frozen=True)
class KnotheMap2D:
    """Triangular map T(x1, x2) = (T1(x1), T2(x1, x2)) from a product source.

    For a product target both components are 1-D quantile transports. For a
    Gaussian target N(0, K) the second component transports the source's
    second marginal to the conditional law of the target given T1(x1).
    """

    source: tuple[Distribution1D, Distribution1D]
    target: tuple[Distribution1D, Distribution1D] | Gaussian2D
    first: Transport1D
    second: Transport1D
    slope: float = 0.0  # dT2/dx1 = slope * T1'(x1) for Gaussian targets

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        y1 = self.first(x[..., 0])
        y2 = self.slope * y1 + self.second(x[..., 1])
        return np.stack([y1, y2], axis=-1)

    def jacobian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d1 = self.first.derivative(x[..., 0])
        d2 = self.second.derivative(x[..., 1])
        J = np.zeros(x.shape[:-1] + (2, 2))
        J[..., 0, 0] = d1
        J[..., 1, 0] = self.slope * d1
        J[..., 1, 1] = d2
        return J

    def log_det_jacobian(self, x) -> np.ndarray:
        # triangular: the determinant is the product of the diagonal partials
        x = np.asarray(x, dtype=float)
        return self.first.log_derivative(x[..., 0]) + self.second.log_derivative(x[..., 1])

    def is_linear(self) -> bool:
        return all(isinstance(t.source, Gaussian) and isinstance(t.target, Gaussian)
                   for t in (self.first, self.second))

    def matrix(self) -> np.ndarray:
        """The lower-triangular matrix of a linear Gaussian-to-Gaussian map."""
        if not self.is_linear():
            raise DomainError("map is not linear")
        return self.jacobian(np.zeros(2))


def build_knothe_2d(source, target) -> KnotheMap2D:
    s1, s2 = source
    if isinstance(target, Gaussian2D):
        K = target.K.array
        if K.shape != (2, 2):
            raise DomainError("Gaussian2D target must be 2x2")
        k11, k21, k22 = K[0, 0], K[1, 0], K[1, 1]
        schur = k22 - k21 * k21 / k11
        first = build_transport(s1, Gaussian(k11))
        second = build_transport(s2, Gaussian(schur))
        return KnotheMap2D((s1, s2), target, first, second, slope=k21 / k11)
    t1, t2 = target
    return KnotheMap2D((s1, s2), (t1, t2), build_transport(s1, t1), build_transport(s2, t2))


def _target_entropy_2d(m: KnotheMap2D) -> float:
    if isinstance(m.target, Gaussian2D):
        return gaussian_entropy(m.target.K)
    return diff_entropy(m.target[0]).nats + diff_entropy(m.target[1]).nats


def verify_change_of_variable_2d(m: KnotheMap2D) -> IdentityCheck:
    """h(target) against h(source) + E[log det DT(source)].

    The diagonal partials of these maps depend on their own coordinate only,
    so the expectation splits into two 1-D quadratures.
    """
    e1 = expected_log_derivative(m.first)
    e2 = expected_log_derivative(m.second)
    hs = diff_entropy(m.source[0]).nats + diff_entropy(m.source[1]).nats
    return IdentityCheck(_target_entropy_2d(m), hs + e1.value + e2.value,
                         e1.err_estimate + e2.err_estimate)
