"""Covariance algebra for Gaussian vectors: rotated covariances, Schur
complements, Gaussian entropies and the determinant mean inequalities."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import DomainError

LOG_2PI_E = math.log(2 * math.pi * math.e)
SYMMETRY_TOL = 1e-12
PIVOT_RTOL = 1e-12


class NotSPDError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CovMatrix:
    """Symmetric positive-definite matrix, validated by Cholesky.

    Matrices that fail are rejected rather than regularised.
    """

    array: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.array, dtype=float)).copy()
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise NotSPDError(f"covariance must be square, got shape {a.shape}")
        scale = max(1.0, float(np.max(np.abs(a))))
        if np.max(np.abs(a - a.T)) > SYMMETRY_TOL * scale:
            raise NotSPDError("covariance is not symmetric")
        a = 0.5 * (a + a.T)
        try:
            L = np.linalg.cholesky(a)
        except np.linalg.LinAlgError as exc:
            raise NotSPDError("covariance is not positive definite") from exc
        if np.min(np.diag(L)) ** 2 <= PIVOT_RTOL * np.max(np.diag(a)):
            raise NotSPDError("covariance is numerically singular")
        a.setflags(write=False)
        L.setflags(write=False)
        object.__setattr__(self, "array", a)
        object.__setattr__(self, "_chol", L)

    @property
    def n(self) -> int:
        return self.array.shape[0]

    @property
    def cholesky(self) -> np.ndarray:
        return self._chol

    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self._chol))))

    def det(self) -> float:
        return math.exp(self.logdet())

    def inv(self) -> np.ndarray:
        eye = np.eye(self.n)
        Linv = np.linalg.solve(self._chol, eye)
        return Linv.T @ Linv

    def __array__(self, dtype=None, copy=None):
        return self.array if dtype is None else self.array.astype(dtype)

    def __repr__(self):
        return f"CovMatrix({self.array.tolist()!r})"


def as_cov(K) -> CovMatrix:
    return K if isinstance(K, CovMatrix) else CovMatrix(np.asarray(K, dtype=float))


def random_spd(n: int, rng: np.random.Generator) -> CovMatrix:
    """A A^T + 0.1 I for a standard normal n x n matrix A."""
    A = rng.standard_normal((n, n))
    return CovMatrix(A @ A.T + 0.1 * np.eye(n))


def gaussian_entropy(K) -> float:
    """h = 1/2 log((2 pi e)^n |K|) in nats."""
    K = as_cov(K)
    return 0.5 * (K.n * LOG_2PI_E + K.logdet())


def _check(KX, KY, lam):
    KX, KY = as_cov(KX), as_cov(KY)
    if KX.n != KY.n:
        raise DomainError(f"dimension mismatch: {KX.n} vs {KY.n}")
    if not 0.0 < lam < 1.0:
        raise DomainError(f"lambda must lie in (0, 1), got {lam}")
    return KX, KY


@dataclass(frozen=True, eq=False)
class RotatedCovariances:
    KU: CovMatrix
    KV: CovMatrix
    KUV: np.ndarray  # cross-covariance, symmetric but possibly indefinite

    def joint(self) -> np.ndarray:
        return np.block([[self.KU.array, self.KUV], [self.KUV.T, self.KV.array]])


def rotated_covariances(KX, KY, lam: float) -> RotatedCovariances:
    """Covariances of U = sqrt(l) X + sqrt(1-l) Y and V = -sqrt(1-l) X + sqrt(l) Y."""
    KX, KY = _check(KX, KY, lam)
    X, Y = KX.array, KY.array
    KU = lam * X + (1 - lam) * Y
    KV = (1 - lam) * X + lam * Y
    KUV = math.sqrt(lam * (1 - lam)) * (Y - X)
    return RotatedCovariances(CovMatrix(KU), CovMatrix(KV), KUV)


def schur_conditional(KU, KV, KUV) -> CovMatrix:
    """Conditional covariance K_U - K_UV K_V^{-1} K_VU of U given V."""
    KU, KV = as_cov(KU), as_cov(KV)
    KUV = np.atleast_2d(np.asarray(KUV, dtype=float))
    S = KU.array - KUV @ np.linalg.solve(KV.array, KUV.T)
    return CovMatrix(0.5 * (S + S.T))


def harmonic_mean(KX, KY, lam: float) -> np.ndarray:
    """[l K_X^{-1} + (1-l) K_Y^{-1}]^{-1}."""
    KX, KY = _check(KX, KY, lam)
    return np.linalg.inv(lam * KX.inv() + (1 - lam) * KY.inv())


def harmonic_identity_gap(KX, KY, lam: float) -> float:
    """Frobenius distance between the Schur complement of the rotated pair and
    the weighted harmonic mean of K_X and K_Y. It is an identity, so this
    measures round-off only."""
    rc = rotated_covariances(KX, KY, lam)
    S = schur_conditional(rc.KU, rc.KV, rc.KUV).array
    return float(np.linalg.norm(S - harmonic_mean(KX, KY, lam), "fro"))


@dataclass(frozen=True)
class DetMeans:
    harmonic: float
    geometric: float
    arithmetic: float
    # log-domain values; the determinants themselves can overflow for large n
    log_harmonic: float
    log_geometric: float
    log_arithmetic: float


def det_mean_chain(KX, KY, lam: float) -> DetMeans:
    """|harmonic mean| <= |K_X|^l |K_Y|^(1-l) <= |arithmetic mean|."""
    KX, KY = _check(KX, KY, lam)
    lh = CovMatrix(harmonic_mean(KX, KY, lam)).logdet()
    lg = lam * KX.logdet() + (1 - lam) * KY.logdet()
    la = CovMatrix(lam * KX.array + (1 - lam) * KY.array).logdet()
    return DetMeans(math.exp(lh), math.exp(lg), math.exp(la), lh, lg, la)


def ky_fan_gap(KX, KY, lam: float) -> float:
    """log|l K_X + (1-l) K_Y| - l log|K_X| - (1-l) log|K_Y| (concavity of log det)."""
    m = det_mean_chain(KX, KY, lam)
    return m.log_arithmetic - m.log_geometric


def bernstein_gaussian_mi(KX, KY, lam: float) -> float:
    """I(U; V) for the rotated pair of independent Gaussian vectors.

    Zero exactly when K_X = K_Y, where U and V are independent.
    """
    rc = rotated_covariances(KX, KY, lam)
    joint = CovMatrix(rc.joint())
    return 0.5 * (rc.KU.logdet() + rc.KV.logdet() - joint.logdet())
