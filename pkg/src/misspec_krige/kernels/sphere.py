"""Isotropic covariance models on the unit sphere S^2.

Two Matern-like families are provided, both diagonal in the (real) spherical
harmonic basis:

* the Legendre series model

      rho_1(x, x') = sum_l sigma_1^2 / (kappa_1^2 + l^2)^(nu_1 + 1/2) P_l(<x, x'>),

  whose eigenvalue for every harmonic of degree l is the P_l coefficient
  times 4 pi / (2l + 1);

* the model defined through the fractional elliptic equation
  (kappa^2 - Delta)^((nu + 1) / 2) (tau Z) = white noise on S^2, with

      rho_2(x, x') = sum_l tau^-2 (2l + 1) / (4 pi (kappa^2 + l(l+1))^(nu + 1))
                     P_l(<x, x'>)

  and eigenvalue tau^-2 / (kappa^2 + l(l+1))^(nu + 1) per degree-l harmonic.

Since |P_l| <= 1, truncating either series at L incurs at most the sum of the
dropped P_l coefficients, which :func:`tail_bound` bounds rigorously.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import legval

from ..errors import DomainError
from .base import CovarianceKernel, EigenSequence, UnitSphere, as_points, check_unit_vectors

DEFAULT_L_MAX = 256

# how far past L the coefficient sum is taken exactly before switching to an
# integral remainder bound
_TAIL_EXACT_SPAN = 4096


def legendre_p(ell: int, y):
    """Legendre polynomial P_ell(y) on [-1, 1] by the three-term recurrence

        (l + 1) P_{l+1}(y) = (2l + 1) y P_l(y) - l P_{l-1}(y).
    """
    if ell < 0 or int(ell) != ell:
        raise DomainError("ell must be a nonnegative integer")
    y_arr = np.asarray(y, dtype=float)
    if np.any(np.abs(y_arr) > 1.0 + 1e-12):
        raise DomainError("legendre_p requires |y| <= 1")
    y_arr = np.clip(y_arr, -1.0, 1.0)
    p_prev = np.ones_like(y_arr)
    if ell == 0:
        return p_prev if isinstance(y, np.ndarray) else float(p_prev)
    p_curr = y_arr.copy()
    for l in range(1, ell):
        p_prev, p_curr = p_curr, ((2 * l + 1) * y_arr * p_curr - l * p_prev) / (l + 1)
    return p_curr if isinstance(y, np.ndarray) else float(p_curr)


@dataclass(frozen=True)
class SphereLegendreParams:
    """Parameters of the Legendre series model."""

    sigma1: float
    nu1: float
    kappa1: float
    l_max: int = DEFAULT_L_MAX

    def __post_init__(self):
        if not (self.sigma1 > 0 and self.nu1 > 0 and self.kappa1 > 0 and self.l_max > 0):
            raise DomainError("all Legendre-model parameters must be positive")

    def coefficient(self, ell) -> np.ndarray:
        """P_ell multiplier sigma_1^2 / (kappa_1^2 + ell^2)^(nu_1 + 1/2)."""
        ell = np.asarray(ell, dtype=float)
        return self.sigma1 ** 2 / (self.kappa1 ** 2 + ell ** 2) ** (self.nu1 + 0.5)

    def coefficients(self) -> np.ndarray:
        return self.coefficient(np.arange(self.l_max + 1))

    def diagonal(self) -> float:
        """rho_1(x, x) of the truncated series (P_l(1) = 1)."""
        return float(self.coefficients().sum())

    def eigenvalue(self, ell) -> np.ndarray:
        """Eigenvalue shared by the 2 ell + 1 harmonics of degree ell."""
        ell = np.asarray(ell, dtype=float)
        return self.coefficient(ell) * 4.0 * math.pi / (2.0 * ell + 1.0)

    def tail_bound(self, l_trunc: int) -> float:
        """Upper bound on sum_{l > l_trunc} |P_l coefficient|."""
        mid = np.arange(l_trunc + 1, l_trunc + 1 + _TAIL_EXACT_SPAN)
        exact = float(self.coefficient(mid).sum())
        m = float(mid[-1])
        remainder = self.sigma1 ** 2 * m ** (-2.0 * self.nu1) / (2.0 * self.nu1)
        return exact + remainder


@dataclass(frozen=True)
class SphereSpdeParams:
    """Parameters of the fractional-elliptic-equation model."""

    tau: float
    nu: float
    kappa: float
    l_max: int = DEFAULT_L_MAX

    def __post_init__(self):
        if not (self.tau > 0 and self.nu > 0 and self.kappa > 0 and self.l_max > 0):
            raise DomainError("all parameters must be positive")

    def eigenvalue(self, ell) -> np.ndarray:
        """Eigenvalue tau^-2 / (kappa^2 + ell (ell + 1))^(nu + 1) per harmonic."""
        ell = np.asarray(ell, dtype=float)
        return self.tau ** -2 / (self.kappa ** 2 + ell * (ell + 1.0)) ** (self.nu + 1.0)

    def coefficient(self, ell) -> np.ndarray:
        """P_ell multiplier (eigenvalue times (2 ell + 1) / (4 pi))."""
        ell = np.asarray(ell, dtype=float)
        return self.eigenvalue(ell) * (2.0 * ell + 1.0) / (4.0 * math.pi)

    def coefficients(self) -> np.ndarray:
        return self.coefficient(np.arange(self.l_max + 1))

    def diagonal(self) -> float:
        return float(self.coefficients().sum())

    def tail_bound(self, l_trunc: int) -> float:
        """Upper bound on sum_{l > l_trunc} |P_l coefficient|."""
        mid = np.arange(l_trunc + 1, l_trunc + 1 + _TAIL_EXACT_SPAN)
        exact = float(self.coefficient(mid).sum())
        m = float(mid[-1])
        # (2t+1)/(kappa^2 + t(t+1))^(nu+1) <= (2t+1)/(t^2+t)^(nu+1), which
        # integrates to (m^2+m)^-nu / nu past m
        remainder = (m * m + m) ** (-self.nu) / (4.0 * math.pi * self.nu * self.tau ** 2)
        return exact + remainder


SphereSeriesParams = SphereLegendreParams | SphereSpdeParams


def l_max_for_tolerance(params: SphereSeriesParams, tol_rel: float = 1e-10,
                        hard_cap: int = 1 << 20) -> int:
    """Smallest truncation degree whose tail bound is below tol_rel times the
    (truncated-at-that-degree) diagonal value."""
    if not 0 < tol_rel < 1:
        raise DomainError("tol_rel must lie in (0, 1)")
    lo, hi = 1, 1
    diag_ref = float(params.coefficient(np.arange(0, 8)).sum())
    while params.tail_bound(hi) > tol_rel * diag_ref:
        hi *= 2
        if hi > hard_cap:
            raise DomainError("requested tolerance needs a truncation beyond the hard cap")
    while lo < hi:
        mid = (lo + hi) // 2
        if params.tail_bound(mid) <= tol_rel * diag_ref:
            hi = mid
        else:
            lo = mid + 1
    return lo


def _series_cov(x, x_prime, coeffs: np.ndarray) -> float:
    x = check_unit_vectors(as_points(x, 3))
    y = check_unit_vectors(as_points(x_prime, 3))
    t = float(np.clip(x @ y.T, -1.0, 1.0)[0, 0])
    return float(legval(t, coeffs))


def sphere_cov_legendre_matern(x, x_prime, p: SphereLegendreParams) -> float:
    """Legendre series covariance between two unit vectors (truncated at l_max)."""
    return _series_cov(x, x_prime, p.coefficients())


def sphere_cov_spde(x, x_prime, p: SphereSpdeParams) -> float:
    """Fractional-elliptic model covariance between two unit vectors."""
    return _series_cov(x, x_prime, p.coefficients())


def sphere_eigen_ratio(p1: SphereLegendreParams, p2: SphereSpdeParams, ell: int) -> float:
    """Per-degree eigenvalue ratio lambda_2(ell)/lambda_1(ell) of the two models.

    Tends to 1 / (tau^2 sigma_1^2 2 pi) as ell grows exactly when nu_1 = nu;
    to 0 when nu_1 < nu and to infinity when nu_1 > nu.
    """
    if ell < 0 or int(ell) != ell:
        raise DomainError("ell must be a nonnegative integer")
    return float(p2.eigenvalue(ell) / p1.eigenvalue(ell))


def sphere_eigen_sequence(params: SphereSeriesParams, l_max: int | None = None) -> EigenSequence:
    """Eigenvalues expanding each degree's multiplicity 2 ell + 1, ell ascending."""
    if l_max is None:
        l_max = params.l_max
    ells = np.arange(l_max + 1)
    values = np.repeat(params.eigenvalue(ells), 2 * ells + 1)
    return EigenSequence(values, label=f"{type(params).__name__}(l_max={l_max})")


@dataclass(frozen=True)
class SphereLegendreKernel(CovarianceKernel):
    params: SphereLegendreParams
    domain: UnitSphere = field(default_factory=UnitSphere)

    def gram(self, x, y=None) -> np.ndarray:
        x = check_unit_vectors(as_points(x, 3))
        y = x if y is None else check_unit_vectors(as_points(y, 3))
        t = np.clip(x @ y.T, -1.0, 1.0)
        return legval(t, self.params.coefficients())


@dataclass(frozen=True)
class SphereSpdeKernel(CovarianceKernel):
    params: SphereSpdeParams
    domain: UnitSphere = field(default_factory=UnitSphere)

    def gram(self, x, y=None) -> np.ndarray:
        x = check_unit_vectors(as_points(x, 3))
        y = x if y is None else check_unit_vectors(as_points(y, 3))
        t = np.clip(x @ y.T, -1.0, 1.0)
        return legval(t, self.params.coefficients())
