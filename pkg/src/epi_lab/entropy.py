"""Differential and Renyi entropies, entropy power, and entropies of linear
combinations of independent variables.

All values are in nats. Entropies of sums are computed on grids: each term is
sampled, rescaled with :func:`~epi_lab.numerics.scale_density` and the terms
are FFT-convolved together.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import numerics
from .dist import Distribution1D, DomainError, Gaussian, GaussianMixture, Laplace, Logistic
from .numerics import GridDensity

LOG_2PI_E = math.log(2 * math.pi * math.e)


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    QUADRATURE = "quadrature"
    GRID = "grid"


@dataclass(frozen=True)
class EntropyValue:
    nats: float
    method: Method
    err: float = 0.0

    def __float__(self):
        return self.nats


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise DomainError(f"lambda must lie in (0, 1), got {lam}")
    return lam


def _support_halfwidth(d: Distribution1D) -> float:
    if isinstance(d, GaussianMixture):
        return float(np.max(np.abs(d.means)) + 40.0 * np.max(d.scales))
    return 40.0 * d.std


def _kinks(d: Distribution1D) -> list[float]:
    return [0.0] if isinstance(d, Laplace) else []


@functools.lru_cache(maxsize=256)
def _diff_entropy_quad(d: Distribution1D, tol: float = 1e-10) -> EntropyValue:
    def integrand(x):
        lp = d.logpdf(x)
        return -math.exp(lp) * lp
    half = _support_halfwidth(d)
    pts = _kinks(d)
    if isinstance(d, GaussianMixture):
        pts = sorted(set(pts) | set(d.means))
    res = numerics.integrate_1d(integrand, -half, half, tol=tol, points=pts)
    return EntropyValue(res.value, Method.QUADRATURE, res.err_estimate)


def diff_entropy(d: Distribution1D, method: str = "auto") -> EntropyValue:
    """Differential entropy of ``d``.

    Closed forms for the Gaussian, Laplace and logistic families, adaptive
    quadrature of ``-f log f`` for mixtures (or for any family when
    ``method="quadrature"``).
    """
    if method == "quadrature" or isinstance(d, GaussianMixture):
        return _diff_entropy_quad(d)
    if isinstance(d, Gaussian):
        h = 0.5 * math.log(2 * math.pi * math.e * d.var)
    elif isinstance(d, Laplace):
        h = 1.0 + math.log(2 * d.b)
    elif isinstance(d, Logistic):
        h = math.log(d.s) + 2.0
    else:
        raise TypeError(f"unsupported distribution {d!r}")
    return EntropyValue(h, Method.CLOSED_FORM, 0.0)


def entropy_power_from_nats(h: float) -> float:
    return math.exp(2.0 * h) / (2 * math.pi * math.e)


def entropy_power(d: Distribution1D) -> float:
    """N(X) = exp(2 h(X)) / (2 pi e): the power of the Gaussian with the same entropy."""
    return entropy_power_from_nats(diff_entropy(d).nats)


def conjugate(p: float) -> float:
    """Holder conjugate p' with 1/p + 1/p' = 1 (negative for p < 1)."""
    if p == 1:
        return math.inf
    return p / (p - 1.0)


def _check_order(p: float) -> float:
    p = float(p)
    if not p > 0 or p == 1.0:
        raise DomainError(f"Renyi order must be positive and != 1, got {p}")
    return p


def _renyi_integral_closed(d: Distribution1D, p: float) -> float | None:
    # log of integral f^p
    if isinstance(d, Gaussian):
        return 0.5 * (1 - p) * math.log(2 * math.pi * d.var) - 0.5 * math.log(p)
    if isinstance(d, Laplace):
        return (1 - p) * math.log(2 * d.b) - math.log(p)  # (2b)^(1-p) / p
    if isinstance(d, Logistic):
        # integral = s^(1-p) B(p, p)
        return (1 - p) * math.log(d.s) + 2 * math.lgamma(p) - math.lgamma(2 * p)
    return None


def renyi_entropy(f: Distribution1D | GridDensity, p: float, method: str = "auto") -> EntropyValue:
    """Renyi entropy of order p: log(integral f^p) / (1 - p) = -p' log ||f||_p."""
    p = _check_order(p)
    if isinstance(f, GridDensity):
        norm = numerics.lp_norm(f, p)
        coarse = GridDensity(f.x0, 2 * f.dx, f.values[::2], f.mass)
        norm_c = numerics.lp_norm(coarse, p)
        if not (norm > 0 and math.isfinite(norm)):
            raise DomainError("L^p norm is not finite and positive")
        h = -conjugate(p) * math.log(norm)
        h_c = -conjugate(p) * math.log(norm_c)
        return EntropyValue(h, Method.GRID, abs(h - h_c) / 3.0 + 1e-13 * abs(h))
    log_int = None if method == "quadrature" else _renyi_integral_closed(f, p)
    if log_int is not None:
        return EntropyValue(log_int / (1 - p), Method.CLOSED_FORM, 0.0)
    res = numerics.integrate_1d(lambda x: math.exp(p * f.logpdf(x)),
                                -_support_halfwidth(f), _support_halfwidth(f),
                                tol=1e-12, points=_kinks(f) + list(getattr(f, "means", ())))
    if not res.value > 0:
        raise DomainError("integral of f^p is not positive")
    h = math.log(res.value) / (1 - p)
    return EntropyValue(h, Method.QUADRATURE, res.err_estimate / (res.value * abs(1 - p)))


def _nonzero_terms(coeffs, dists):
    coeffs = tuple(float(a) for a in coeffs)
    dists = tuple(dists)
    if len(coeffs) != len(dists):
        raise DomainError("need one coefficient per distribution")
    terms = tuple((a, d) for a, d in zip(coeffs, dists) if a != 0.0)
    if not terms:
        raise DomainError("at least one coefficient must be nonzero")
    return terms


def _term_grids(terms: tuple, half_width: float, n: int) -> list[GridDensity]:
    half = half_width * max(abs(a) * d.std for a, d in terms)
    dx = 2 * half / n
    grids = []
    for a, d in terms:
        # sample X on a grid that lands on spacing dx after scaling by a
        base = numerics._sample_grid(d, -half / abs(a), dx / abs(a), n)
        grids.append(numerics.scale_density(base, a))
    return grids


def common_grids(coeffs: Sequence[float], dists: Sequence[Distribution1D],
                 half_width: float = numerics.DEFAULT_HALF_WIDTH,
                 n: int = numerics.DEFAULT_GRID_POINTS) -> list[GridDensity]:
    """Grid densities of a_i X_i sharing one spacing, wide enough for the widest term."""
    return _term_grids(_nonzero_terms(coeffs, dists), float(half_width), int(n))


@functools.lru_cache(maxsize=512)
def _combo_density(terms: tuple, half_width: float, n: int) -> GridDensity:
    grids = _term_grids(terms, half_width, n)
    out = grids[0]
    for g in grids[1:]:
        out = numerics.convolve(out, g)
    return out


def combo_density(coeffs: Sequence[float], dists: Sequence[Distribution1D],
                  half_width: float = numerics.DEFAULT_HALF_WIDTH,
                  n: int = numerics.DEFAULT_GRID_POINTS) -> GridDensity:
    """Grid density of sum_i a_i X_i for independent X_i (zero coefficients dropped)."""
    return _combo_density(_nonzero_terms(coeffs, dists), float(half_width), int(n))


def entropy_of_combo(coeffs: Sequence[float], dists: Sequence[Distribution1D],
                     half_width: float = numerics.DEFAULT_HALF_WIDTH,
                     n: int = numerics.DEFAULT_GRID_POINTS) -> EntropyValue:
    h, err = combo_density(coeffs, dists, half_width, n).entropy()
    return EntropyValue(float(h), Method.GRID, float(err))


def _sum(*vals: EntropyValue, signs=None) -> EntropyValue:
    signs = signs or (1,) * len(vals)
    nats = sum(s * v.nats for s, v in zip(signs, vals))
    methods = {v.method for v in vals}
    method = Method.CLOSED_FORM if methods == {Method.CLOSED_FORM} else (
        Method.GRID if Method.GRID in methods else Method.QUADRATURE)
    return EntropyValue(nats, method, sum(v.err for v in vals))


@dataclass(frozen=True)
class RotatedPairReport:
    """Entropies of U = sqrt(l) X + sqrt(1-l) Y and V = -sqrt(1-l) X + sqrt(l) Y."""

    lam: float
    hU: EntropyValue
    hV: EntropyValue
    hUV: EntropyValue
    hU_given_V: EntropyValue
    mutual_info: EntropyValue
    hUV_2d: EntropyValue | None = None


def rotation_coeffs(lam: float) -> tuple[tuple[float, float], tuple[float, float]]:
    a, b = math.sqrt(lam), math.sqrt(1.0 - lam)
    return (a, b), (-b, a)


def rotated_pair(X: Distribution1D, Y: Distribution1D, lam: float,
                 cross_check: bool = False) -> RotatedPairReport:
    """Entropies, conditional entropy and mutual information of the rotated pair.

    The rotation has unit Jacobian, so h(U, V) = h(X) + h(Y) exactly and
    h(U | V) follows from the chain rule. ``cross_check`` additionally
    integrates the joint density of (U, V) on a 2-D grid.
    """
    lam = _check_lambda(lam)
    cu, cv = rotation_coeffs(lam)
    hU = entropy_of_combo(cu, (X, Y))
    hV = entropy_of_combo(cv, (X, Y))
    hUV = _sum(diff_entropy(X), diff_entropy(Y))
    cond = _sum(hUV, hV, signs=(1, -1))
    mi = _sum(hU, hV, hUV, signs=(1, 1, -1))
    joint = joint_entropy_2d(X, Y, lam) if cross_check else None
    return RotatedPairReport(lam, hU, hV, hUV, cond, mi, joint)


def joint_entropy_2d(X: Distribution1D, Y: Distribution1D, lam: float,
                     n: int = 2048, half_width: float = 12.0) -> EntropyValue:
    """h(U, V) by direct 2-D trapezoid integration of the rotated joint density

    p(u, v) = p_X(sqrt(l) u - sqrt(1-l) v) * p_Y(sqrt(1-l) u + sqrt(l) v).
    """
    lam = _check_lambda(lam)
    a, b = math.sqrt(lam), math.sqrt(1.0 - lam)
    half = half_width * max(X.std, Y.std)
    grid = -half + (2 * half / n) * np.arange(n + 1)
    du = grid[1] - grid[0]

    def run(step):
        g = grid[::step]
        wts = np.ones(len(g))
        wts[[0, -1]] = 0.5
        total = 0.0
        for i0 in range(0, len(g), 256):
            u = g[i0:i0 + 256, None]
            v = g[None, :]
            lp = X.logpdf(a * u - b * v) + Y.logpdf(b * u + a * v)
            total += float(wts[i0:i0 + 256] @ (-np.exp(lp) * lp) @ wts)
        return total * (step * du) ** 2

    fine, coarse = run(1), run(2)
    return EntropyValue(fine, Method.GRID, abs(fine - coarse) / 3.0)
