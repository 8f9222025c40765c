"""Numerical certification of the entropy-power inequality and its relatives."""

from .dist import (
    Distribution1D,
    DomainError,
    Family,
    Gaussian,
    GaussianMixture,
    Laplace,
    Logistic,
    from_spec,
)

__all__ = [
    "Distribution1D",
    "DomainError",
    "Family",
    "Gaussian",
    "GaussianMixture",
    "Laplace",
    "Logistic",
    "clear_caches",
    "from_spec",
]


def clear_caches() -> None:
    """Drop memoised entropies, grids and transport expectations."""
    from . import entropy, transport
    entropy._diff_entropy_quad.cache_clear()
    entropy._combo_density.cache_clear()
    transport.expected_log_derivative.cache_clear()
