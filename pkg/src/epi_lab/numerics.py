"""Integration engines: adaptive 1-D quadrature, tensor Gauss-Hermite
expectations, and grid densities with FFT convolution."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, signal, special

from .dist import Distribution1D, DomainError

DEFAULT_GRID_POINTS = 2 ** 14
DEFAULT_HALF_WIDTH = 12.0
DEFAULT_QUAD_TOL = 1e-10
DEFAULT_GH_NODES = 96
MIN_GRID_POINTS = 2 ** 10
MAX_TAIL_MASS = 1e-7
# floor applied to densities inside log; cells below DROP_BELOW are ignored
PDF_FLOOR = 1e-300
DROP_BELOW = 1e-30


class QuadratureError(RuntimeError):
    def __init__(self, msg: str, partial: "QuadratureResult"):
        super().__init__(msg)
        self.partial = partial


class TailMassError(RuntimeError):
    pass


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    err_estimate: float
    evaluations: int


def integrate_1d(f: Callable[[float], float], a: float, b: float,
                 tol: float = DEFAULT_QUAD_TOL, points=None, limit: int = 500) -> QuadratureResult:
    """Adaptive Gauss-Kronrod quadrature of ``f`` over ``[a, b]``.

    ``points`` lists interior breakpoints (kinks) to split at. Raises
    :class:`QuadratureError` carrying the partial estimate when the error
    estimate does not reach ``tol``.
    """
    if not a < b:
        raise DomainError("need a < b")
    if not tol > 0:
        raise DomainError("tol must be positive")
    pts = None
    if points is not None:
        pts = [p for p in points if a < p < b] or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, err, info = integrate.quad(f, a, b, epsabs=tol, epsrel=0.0, limit=limit,
                                          points=pts, full_output=True)[:3]
    res = QuadratureResult(float(value), float(err), int(info["neval"]))
    if not (np.isfinite(value) and err <= tol):
        raise QuadratureError(f"quadrature did not converge: err {err:.3g} > tol {tol:.3g}", res)
    return res


def _hermite_rule(nodes: int):
    # probabilists' Hermite rule: weights integrate against the standard normal
    t, w = special.roots_hermitenorm(nodes)
    return t, w / math.sqrt(2 * math.pi)


@dataclass(frozen=True, eq=False)
class PanelRule:
    """Nodes and weights of a 1-D rule for expectations under N(0, sigma^2)."""

    nodes: np.ndarray
    weights: np.ndarray


def gaussian_panel_rule(sigma: float, breaks=(), half_width_sigmas: float = 10.0,
                        panels: int = 160, order: int = 8) -> PanelRule:
    """Composite Gauss-Legendre rule for E[g(X)], X ~ N(0, sigma^2).

    Panels cover +-half_width_sigmas standard deviations and are split at
    ``breaks`` so kinks of g fall on panel edges, where Gauss-Hermite would
    converge only algebraically.
    """
    half = half_width_sigmas * sigma
    edges = np.linspace(-half, half, panels + 1)
    inner = [b for b in breaks if -half < b < half]
    edges = np.unique(np.concatenate([edges, inner]))
    t, w = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (edges[1:] + edges[:-1])
    rad = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + rad[:, None] * t).ravel()
    wx = (rad[:, None] * w).ravel()
    dens = np.exp(-0.5 * (x / sigma) ** 2) / (sigma * math.sqrt(2 * math.pi))
    return PanelRule(x, wx * dens)


def panel_expect_2d(a: np.ndarray, b: np.ndarray, combine, rx: PanelRule, ry: PanelRule) -> float:
    """E[combine(a(X), b(Y))] given a, b tabulated at the nodes of rx, ry."""
    total = 0.0
    for i0 in range(0, len(a), 256):
        vals = combine(a[i0:i0 + 256, None], b[None, :])
        total += float(rx.weights[i0:i0 + 256] @ vals @ ry.weights)
    return total


def gauss_hermite_expect_2d(g: Callable[[np.ndarray, np.ndarray], np.ndarray],
                            sigma_x: float, sigma_y: float,
                            nodes: int = DEFAULT_GH_NODES) -> float:
    """E[g(X, Y)] for independent X ~ N(0, sigma_x^2), Y ~ N(0, sigma_y^2).

    ``g`` receives broadcastable arrays. Node pairs whose product weight
    underflows are skipped.
    """
    if nodes < 32:
        raise DomainError("need at least 32 nodes per axis")
    t, w = _hermite_rule(nodes)
    W = np.outer(w, w)
    keep = W > 1e-300
    X = np.broadcast_to(sigma_x * t[:, None], W.shape)[keep]
    Y = np.broadcast_to(sigma_y * t[None, :], W.shape)[keep]
    vals = np.broadcast_to(np.asarray(g(X, Y), dtype=float), X.shape)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("integrand not finite at some quadrature node")
    return float(np.dot(W[keep], vals))


def gauss_hermite_expect_1d(g, sigma: float, nodes: int = DEFAULT_GH_NODES) -> float:
    t, w = _hermite_rule(nodes)
    keep = w > 1e-300
    vals = np.asarray(g(sigma * t[keep]), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("integrand not finite at some quadrature node")
    return float(np.dot(w[keep], vals))


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Density sampled at ``x0 + dx * k`` for ``k = 0 .. len(values) - 1``.

    ``mass`` is the trapezoid integral of the samples as constructed; values
    are never silently renormalised. ``lost_mass`` is the probability that
    fell outside the sampled span(s) this grid was built from.
    """

    x0: float
    dx: float
    values: np.ndarray
    mass: float
    lost_mass: float = 0.0

    @classmethod
    def from_values(cls, x0: float, dx: float, values, lost_mass: float = 0.0) -> "GridDensity":
        values = np.asarray(values, dtype=float)
        if not dx > 0:
            raise DomainError("dx must be positive")
        if values.ndim != 1 or len(values) < MIN_GRID_POINTS:
            raise DomainError(f"grid needs at least {MIN_GRID_POINTS} points")
        values = np.maximum(values, 0.0)
        values.setflags(write=False)
        return cls(float(x0), float(dx), values, trapezoid(values, dx), float(lost_mass))

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(len(self.values))

    def __len__(self):
        return len(self.values)

    def entropy(self) -> tuple[float, float]:
        """Differential entropy (nats) and an error estimate.

        The error combines the step-halving difference of the trapezoid rule,
        half the extrapolated tail correction, the entropy that truncated
        source mass may carry, and the deviation of the mass from one.
        """
        f = self.values
        integrand = _neg_f_log_f(f)
        h = trapezoid(integrand, self.dx)
        # every other sample; on even-length grids the dropped end point is a tail sample
        h_coarse = trapezoid(integrand[::2], 2 * self.dx)
        tail = _tail_entropy(f[0], f[1], self.dx) + _tail_entropy(f[-1], f[-2], self.dx)
        edge = max(min(f[0], f[-1]), PDF_FLOOR)
        err = (abs(h - h_coarse) / 3.0 + 0.5 * abs(tail)
               + self.lost_mass * (1.0 - math.log(edge))
               + abs(self.mass - 1.0) * (1.0 + abs(h)) + 1e-13 * abs(h))
        return float(h + tail), float(err)


def _tail_entropy(edge: float, inner: float, dx: float) -> float:
    """Entropy beyond a grid edge, extrapolating an exponential tail."""
    if edge < DROP_BELOW or inner <= edge:
        return 0.0
    rate = math.log(inner / edge) / dx
    return edge / rate * (1.0 - math.log(edge))


def _neg_f_log_f(f: np.ndarray) -> np.ndarray:
    out = np.zeros_like(f)
    live = f >= DROP_BELOW
    out[live] = -f[live] * np.log(np.maximum(f[live], PDF_FLOOR))
    return out


def trapezoid(y: np.ndarray, dx: float) -> float:
    return float(dx * (y.sum() - 0.5 * (y[0] + y[-1])))


def grid_density(d: Distribution1D, half_width_sigmas: float = DEFAULT_HALF_WIDTH,
                 n: int = DEFAULT_GRID_POINTS, max_tail_mass: float = MAX_TAIL_MASS) -> GridDensity:
    """Sample ``d`` on ``n`` points spanning ``[-L, L)`` with ``L = half_width_sigmas * sqrt(P)``.

    The origin is always a grid node. Raises :class:`TailMassError` when the
    mass outside the span exceeds ``max_tail_mass``.
    """
    if n < 2 ** 12 or n & (n - 1):
        raise DomainError("n must be a power of two >= 4096")
    half = half_width_sigmas * d.std
    return _sample_grid(d, -half, 2 * half / n, n, max_tail_mass)


def _sample_grid(d: Distribution1D, x0: float, dx: float, n: int,
                 max_tail_mass: float = MAX_TAIL_MASS) -> GridDensity:
    x = x0 + dx * np.arange(n)
    outside = float(d.cdf(x[0]) + d.sf(x[-1]))
    if outside > max_tail_mass:
        raise TailMassError(f"grid misses tail mass {outside:.3g} > {max_tail_mass:.3g}")
    return GridDensity.from_values(x0, dx, d.pdf(x), lost_mass=outside)


def convolve(f: GridDensity, g: GridDensity) -> GridDensity:
    """Density of the sum of independent variables with densities f and g."""
    if not math.isclose(f.dx, g.dx, rel_tol=1e-12):
        raise GridMismatchError(f"grid spacings differ: {f.dx} vs {g.dx}")
    vals = signal.fftconvolve(f.values, g.values) * f.dx
    return GridDensity.from_values(f.x0 + g.x0, f.dx, vals, f.lost_mass + g.lost_mass)


def convolve_direct(f: GridDensity, g: GridDensity) -> GridDensity:
    """O(n^2) reference convolution."""
    if not math.isclose(f.dx, g.dx, rel_tol=1e-12):
        raise GridMismatchError(f"grid spacings differ: {f.dx} vs {g.dx}")
    vals = np.convolve(f.values, g.values) * f.dx
    return GridDensity.from_values(f.x0 + g.x0, f.dx, vals, f.lost_mass + g.lost_mass)


def scale_density(f: GridDensity, a: float) -> GridDensity:
    """Density of ``a * X``: same samples on a grid stretched by ``a``."""
    if a == 0:
        raise DomainError("cannot scale a density by zero")
    vals = f.values / abs(a)
    if a > 0:
        return GridDensity.from_values(a * f.x0, a * f.dx, vals, f.lost_mass)
    last = f.x0 + f.dx * (len(f) - 1)
    return GridDensity.from_values(a * last, -a * f.dx, vals[::-1], f.lost_mass)


def lp_norm(f: GridDensity, p: float) -> float:
    """(integral f^p)^(1/p) by the trapezoid rule."""
    if not p > 0:
        raise DomainError("p must be positive")
    return integral_power(f, p) ** (1.0 / p)


def integral_power(f: GridDensity, p: float) -> float:
    """Trapezoid integral of f^p; zero samples contribute zero for any p > 0."""
    vals = f.values
    powered = np.zeros_like(vals)
    live = vals > 0
    powered[live] = vals[live] ** p
    return trapezoid(powered, f.dx)
