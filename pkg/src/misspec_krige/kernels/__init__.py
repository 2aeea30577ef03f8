"""Covariance families, spectral densities and eigenvalue sequences."""

from __future__ import annotations

from .base import (
    Box,
    CovarianceKernel,
    Domain,
    EigenSequence,
    SpectralDensity,
    Torus,
    UnitSphere,
)
from .matern import (
    ChordalMaternKernel,
    GreatCircleMaternKernel,
    MaternKernel,
    MaternParams,
    MaternSpectralDensity,
    bessel_k,
    matern_cov,
    matern_ratio_limit,
    matern_spectral_density,
)
from .periodic import DEFAULT_K_MAX, PeriodicKernel, PeriodicSpectrum, periodic_cov
from .sphere import (
    DEFAULT_L_MAX,
    SphereLegendreKernel,
    SphereLegendreParams,
    SphereSpdeKernel,
    SphereSpdeParams,
    l_max_for_tolerance,
    legendre_p,
    sphere_cov_legendre_matern,
    sphere_cov_spde,
    sphere_eigen_ratio,
    sphere_eigen_sequence,
)

from ..errors import DomainError


def eigen_sequence_of(model, truncation: int | None = None) -> EigenSequence:
    """Eigenvalue sequence of a model with known analytic eigenstructure.

    Accepts a :class:`PeriodicSpectrum` (or kernel) and either sphere series
    parameter set (or kernel); multiplicities are expanded and the per-model
    canonical ordering is used, so two models sharing an eigenbasis give
    index-aligned sequences.
    """
    if isinstance(model, PeriodicKernel):
        model = model.spectrum
    if isinstance(model, (SphereLegendreKernel, SphereSpdeKernel)):
        model = model.params
    if isinstance(model, PeriodicSpectrum):
        return model.eigen_sequence(truncation)
    if isinstance(model, (SphereLegendreParams, SphereSpdeParams)):
        return sphere_eigen_sequence(model, truncation)
    raise DomainError(f"no analytic eigenvalue sequence for {type(model).__name__}")


__all__ = [
    "Box", "Torus", "UnitSphere", "Domain",
    "CovarianceKernel", "SpectralDensity", "EigenSequence",
    "MaternParams", "MaternKernel", "ChordalMaternKernel", "GreatCircleMaternKernel",
    "MaternSpectralDensity", "bessel_k", "matern_cov", "matern_spectral_density",
    "matern_ratio_limit",
    "PeriodicSpectrum", "PeriodicKernel", "periodic_cov", "DEFAULT_K_MAX",
    "SphereLegendreParams", "SphereSpdeParams", "SphereLegendreKernel", "SphereSpdeKernel",
    "legendre_p", "sphere_cov_legendre_matern", "sphere_cov_spde", "sphere_eigen_ratio",
    "sphere_eigen_sequence", "l_max_for_tolerance", "DEFAULT_L_MAX",
    "eigen_sequence_of",
]
