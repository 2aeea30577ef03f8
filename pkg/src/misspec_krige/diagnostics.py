"""Finite-scale probes of the compatibility conditions between two models.

Everything in this module reports what can be observed on a finite probe set:
eigenvalue-ratio tails for model pairs that share an eigenbasis, spectral
density ratios at high frequency for stationary pairs, quadrature
eigendecompositions of covariance operators, and a finite-rank image of the
whitened covariance perturbation.  None of these decide an infinite-
dimensional property; verdicts are worded (and should be read) as
"consistent with" or "inconsistent with" the asymptotic condition at probe
scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DomainError, NumericalFailureError
from .kernels import (
    Box,
    CovarianceKernel,
    EigenSequence,
    MaternKernel,
    MaternSpectralDensity,
    PeriodicKernel,
    SphereLegendreKernel,
    SphereSpdeKernel,
    SpectralDensity,
    Torus,
    UnitSphere,
    eigen_sequence_of,
)
from .kriging import GaussianModel
from .verdicts import LimitKind, RatioVerdict, TailWindow

DEFAULT_WINDOW = 0.2
DEFAULT_TOL = 1e-2

#: a checkpoint trend must shrink/grow past this factor to call divergence
_DIVERGENCE_FACTOR = 2.0


# ---------------------------------------------------------------------------
# ratio-limit probes
# ---------------------------------------------------------------------------

def eigen_ratio_limit(g: EigenSequence, g_tilde: EigenSequence,
                      window: float = DEFAULT_WINDOW,
                      tol: float = DEFAULT_TOL) -> RatioVerdict:
    """Verdict on the tail of the index-aligned eigenvalue ratios.

    Convergence: over the trailing ``window`` fraction of the ratios, the max
    deviation from the window mean stays below ``tol`` times that mean.
    Divergence: checkpoint medians at J/8, J/4, J/2, J move monotonically and
    change by more than a factor of two overall.  Anything else is
    inconclusive.
    """
    if len(g) != len(g_tilde):
        raise DomainError("eigenvalue sequences must have equal length")
    if len(g) < 20:
        raise DomainError("need at least 20 eigenvalues for a tail verdict")
    if not 0.0 < window <= 1.0:
        raise DomainError("window must lie in (0, 1]")
    ratios = g_tilde.values / g.values
    return _tail_verdict(ratios, window, tol, use_geometric=False)


def _tail_verdict(ratios: np.ndarray, window: float, tol: float,
                  use_geometric: bool) -> RatioVerdict:
    size = ratios.shape[0]
    start = size - max(1, math.ceil(window * size))
    tail = ratios[start:]
    if use_geometric:
        log_tail = np.log(tail)
        center = float(np.exp(log_tail.mean()))
        max_dev = float(np.max(np.abs(np.exp(log_tail - log_tail.mean()) - 1.0))) * center
    else:
        center = float(tail.mean())
        max_dev = float(np.max(np.abs(tail - center)))
    evidence = TailWindow(start_index=start, mean=center, max_deviation=max_dev)
    if center > 0.0 and max_dev < tol * center:
        return RatioVerdict.converges(center, evidence)

    checkpoints = _checkpoint_stats(ratios, use_geometric)
    decreasing = all(a > b for a, b in zip(checkpoints, checkpoints[1:]))
    increasing = all(a < b for a, b in zip(checkpoints, checkpoints[1:]))
    if decreasing and checkpoints[0] > _DIVERGENCE_FACTOR * checkpoints[-1]:
        return RatioVerdict.diverges_to_zero(evidence)
    if increasing and checkpoints[-1] > _DIVERGENCE_FACTOR * checkpoints[0]:
        return RatioVerdict.diverges_to_infinity(evidence)
    return RatioVerdict.inconclusive(evidence)


def _checkpoint_stats(ratios: np.ndarray, use_geometric: bool) -> list[float]:
    size = ratios.shape[0]
    stats = []
    for frac in (1 / 8, 1 / 4, 1 / 2, 1.0):
        idx = max(0, math.ceil(frac * size) - 1)
        halo = max(1, size // 100)
        block = ratios[max(0, idx - halo): idx + halo + 1]
        stats.append(float(np.exp(np.mean(np.log(block)))) if use_geometric
                     else float(np.median(block)))
    return stats


def spectral_ratio_limit(f: SpectralDensity, f_tilde: SpectralDensity,
                         radii: Sequence[float],
                         directions: Sequence[np.ndarray] | None = None,
                         tol: float = DEFAULT_TOL) -> RatioVerdict:
    """Verdict on f_tilde / f along rays as the frequency norm grows.

    Needs at least 3 radii spanning two decades.  The ratio is probed on the
    radii x directions grid; convergence requires the last-decade values to
    agree within ``tol`` in log space across both radii and directions (the
    geometric handling makes the verdict exactly symmetric under swapping the
    two densities).  A monotone checkpoint trend beyond a factor of two is
    reported as divergence.
    """
    if f.dim != f_tilde.dim:
        raise DomainError("spectral densities must share the ambient dimension")
    radii = np.asarray(sorted(float(r) for r in radii))
    if radii.size < 3 or radii[0] <= 0:
        raise DomainError("need at least 3 positive radii")
    if radii[-1] < 100.0 * radii[0]:
        raise DomainError("radii must span at least two decades")
    if directions is None:
        directions = _default_directions(f.dim)
    dirs = [np.asarray(u, dtype=float) / np.linalg.norm(u) for u in directions]

    grid = np.empty((len(dirs), radii.size))
    for i, u in enumerate(dirs):
        for j, r in enumerate(radii):
            denom = f(r * u)
            if denom <= 0.0:
                raise DomainError(f"f vanishes at radius {r:g}; the ratio is undefined")
            grid[i, j] = f_tilde(r * u) / denom

    last_decade = radii >= radii[-1] / 10.0
    tail_vals = grid[:, last_decade].ravel()
    log_tail = np.log(np.maximum(tail_vals, np.finfo(float).tiny))
    center = float(np.exp(log_tail.mean()))
    max_dev = float(np.max(np.abs(np.exp(log_tail - log_tail.mean()) - 1.0))) * center
    start_index = int(np.argmax(last_decade))
    evidence = TailWindow(start_index=start_index, mean=center, max_deviation=max_dev)
    if np.all(tail_vals > 0.0) and max_dev < tol * center:
        return RatioVerdict.converges(center, evidence)

    per_radius = np.exp(np.mean(np.log(np.maximum(grid, np.finfo(float).tiny)), axis=0))
    checkpoints = [per_radius[0], per_radius[per_radius.size // 2], per_radius[-1]]
    decreasing = all(a > b for a, b in zip(checkpoints, checkpoints[1:]))
    increasing = all(a < b for a, b in zip(checkpoints, checkpoints[1:]))
    if decreasing and checkpoints[0] > _DIVERGENCE_FACTOR * checkpoints[-1]:
        return RatioVerdict.diverges_to_zero(evidence)
    if increasing and checkpoints[-1] > _DIVERGENCE_FACTOR * checkpoints[0]:
        return RatioVerdict.diverges_to_infinity(evidence)
    return RatioVerdict.inconclusive(evidence)


def _default_directions(dim: int) -> list[np.ndarray]:
    dirs = [np.eye(dim)[i] for i in range(dim)]
    dirs += [-d for d in dirs]
    if dim > 1:
        dirs.append(np.ones(dim) / math.sqrt(dim))
    return dirs


def spectral_equivalence_bounds(f: SpectralDensity, f_tilde: SpectralDensity,
                                probe_grid: Sequence[np.ndarray]) -> tuple[float, float]:
    """Empirical (min, max) of f_tilde / f over a frequency probe grid.

    A finite grid cannot certify two-sided global bounds; the returned pair is
    a necessary-condition probe for the two densities being equivalent up to
    constants.
    """
    ratios = []
    for omega in probe_grid:
        denom = f(omega)
        if denom <= 0.0:
            raise DomainError("f vanishes on the probe grid")
        ratios.append(f_tilde(omega) / denom)
    ratios = np.asarray(ratios)
    return float(ratios.min()), float(ratios.max())


# ---------------------------------------------------------------------------
# quadrature eigendecomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NystromEigen:
    """Quadrature approximation of a covariance operator's eigenpairs.

    ``eigenvectors[:, j]`` holds the node values of the j-th eigenfunction,
    normalized so that the weight-weighted Gram of the retained columns is the
    identity.
    """

    nodes: np.ndarray
    weights: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        lam = self.eigenvalues
        if np.any(np.diff(lam) > 0):
            raise NumericalFailureError("eigenvalues must be sorted descending")
        gram = self.eigenvectors.T @ (self.weights[:, None] * self.eigenvectors)
        if float(np.max(np.abs(gram - np.eye(lam.size)))) > 1e-8:
            raise NumericalFailureError("eigenvectors are not weight-orthonormal")

    @property
    def rank(self) -> int:
        return int(self.eigenvalues.size)

    def mercer_reconstruction(self) -> np.ndarray:
        """sum_j gamma_j e_j(x) e_j(x') on the node grid."""
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T


def nystrom_eigen(kernel: CovarianceKernel, nodes, weights,
                  rank_cutoff: float = 1e-12) -> NystromEigen:
    """Discretize the covariance integral operator on a quadrature rule.

    Solves the symmetric eigenproblem of W^(1/2) K W^(1/2) and rescales the
    eigenvectors to weight-orthonormal node values; eigenvalues at or below
    ``rank_cutoff`` times the leading one are dropped.
    """
    nodes = np.atleast_2d(np.asarray(nodes, dtype=float))
    if nodes.shape[0] < 2:
        raise DomainError("need at least two quadrature nodes")
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (nodes.shape[0],) or np.any(weights <= 0.0):
        raise DomainError("quadrature weights must be positive, one per node")
    kmat = kernel.gram(nodes)
    asym = float(np.max(np.abs(kmat - kmat.T)))
    if asym > 1e-10 * max(1.0, float(np.max(np.abs(kmat)))):
        raise NumericalFailureError(f"kernel matrix asymmetry {asym:.3e}")
    kmat = 0.5 * (kmat + kmat.T)
    root_w = np.sqrt(weights)
    sym = root_w[:, None] * kmat * root_w[None, :]
    try:
        lam, vec = scipy.linalg.eigh(sym)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"eigendecomposition failed: {exc}") from exc
    order = np.argsort(lam)[::-1]
    lam, vec = lam[order], vec[:, order]
    if lam[0] <= 0.0:
        raise NumericalFailureError("leading eigenvalue is not positive")
    keep = lam > rank_cutoff * lam[0]
    lam, vec = lam[keep], vec[:, keep]
    funcs = vec / root_w[:, None]
    return NystromEigen(nodes=nodes, weights=weights, eigenvalues=lam,
                        eigenvectors=funcs)


def uniform_grid(n: int, lower: float = 0.0, upper: float = 1.0):
    """Trapezoid rule on [lower, upper] with n nodes (endpoints included)."""
    if n < 2:
        raise DomainError("need at least 2 nodes")
    nodes = np.linspace(lower, upper, n)
    h = (upper - lower) / (n - 1)
    weights = np.full(n, h)
    weights[0] = weights[-1] = h / 2.0
    return nodes[:, None], weights


def torus_grid(n: int, dim: int = 1):
    """Periodic rectangle rule on [0, 1)^dim; exact for retained harmonics up
    to the grid's Nyquist index."""
    if n < 2:
        raise DomainError("need at least 2 nodes per dimension")
    axis = np.arange(n) / n
    if dim == 1:
        return axis[:, None], np.full(n, 1.0 / n)
    grids = np.meshgrid(*([axis] * dim), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    return nodes, np.full(nodes.shape[0], 1.0 / n ** dim)


def fibonacci_sphere_grid(n: int, rotate: float = 0.0):
    """Deterministic near-uniform sphere nodes with equal weights 4 pi / n."""
    if n < 2:
        raise DomainError("need at least 2 nodes")
    i = np.arange(n)
    z = 1.0 - (2.0 * i + 1.0) / n
    golden = math.pi * (3.0 - math.sqrt(5.0))
    phi = golden * i + rotate
    r = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    nodes = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    return nodes, np.full(n, 4.0 * math.pi / n)


# ---------------------------------------------------------------------------
# whitened-perturbation tail
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TaTailReport:
    """Finite-rank image of C^(-1/2) C~ C^(-1/2) - a I on a leading eigenbasis.

    This is a heuristic indicator: compactness cannot be certified at finite
    rank.  The report states how the projected spectrum decays, nothing more.
    """

    a_used: float
    galerkin_eigs: np.ndarray  # sorted by decreasing magnitude
    tail_index: int
    basis_size: int

    @property
    def max_abs(self) -> float:
        return float(np.abs(self.galerkin_eigs).max(initial=0.0))

    def last_quartile_max(self) -> float:
        start = (3 * self.basis_size) // 4
        return float(np.abs(self.galerkin_eigs[start:]).max(initial=0.0))

    def to_dict(self) -> dict:
        return {"a_used": self.a_used, "basis_size": self.basis_size,
                "tail_index": self.tail_index, "max_abs": self.max_abs,
                "last_quartile_max": self.last_quartile_max()}


def t_a_tail_spectrum(true_kernel: CovarianceKernel, wrong_kernel: CovarianceKernel,
                      nodes, weights, a: float, basis_size: int,
                      tail_tol_rel: float = 0.1) -> TaTailReport:
    """Project the whitened covariance perturbation onto a leading eigenbasis.

    Builds B = G^(-1/2) E' W K~ W E G^(-1/2) - a I on the leading
    ``basis_size`` quadrature eigenpairs (E, G) of the true kernel and returns
    the magnitude-sorted spectrum of B.  ``tail_index`` is the first position
    after which every magnitude is below ``tail_tol_rel`` times the largest.
    ``a = 0`` is allowed and exposes the plain whitened spectrum, which is
    nonnegative for any covariance pair.
    """
    if a < 0.0:
        raise DomainError("the constant a must be nonnegative")
    eig = nystrom_eigen(true_kernel, nodes, weights)
    if eig.rank < basis_size:
        raise DomainError(
            f"quadrature resolves only {eig.rank} eigenpairs above the cutoff; "
            f"requested a basis of {basis_size}")
    funcs = eig.eigenvectors[:, :basis_size]
    lam = eig.eigenvalues[:basis_size]
    ktilde = wrong_kernel.gram(eig.nodes)
    weighted = eig.weights[:, None] * funcs
    middle = weighted.T @ ktilde @ weighted
    scale = 1.0 / np.sqrt(lam)
    b = scale[:, None] * middle * scale[None, :] - a * np.eye(basis_size)
    eigs = scipy.linalg.eigvalsh(0.5 * (b + b.T))
    order = np.argsort(np.abs(eigs))[::-1]
    eigs = eigs[order]
    top = abs(eigs[0]) if eigs.size else 0.0
    below = np.abs(eigs) < tail_tol_rel * top if top > 0 else np.ones_like(eigs, bool)
    tail_index = int(np.argmax(below)) if np.any(below) else int(eigs.size)
    return TaTailReport(a_used=a, galerkin_eigs=eigs, tail_index=tail_index,
                        basis_size=basis_size)


# ---------------------------------------------------------------------------
# composed report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AssumptionBudget:
    """Probe sizes and verdict tolerances for the composed report."""

    eigen_terms: int = 2000
    radii: tuple[float, float, int] = (1.0, 1.0e3, 25)  # (min, max, count), log-spaced
    quad_nodes: int = 128
    galerkin_basis: int = 24
    mean_design_sizes: tuple[int, ...] = (8, 32, 64)
    verdict_window: float = DEFAULT_WINDOW
    verdict_tol: float = DEFAULT_TOL


CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"
INCONCLUSIVE = "inconclusive"


def assumption_report(true_model: GaussianModel, wrong_model: GaussianModel,
                      domain=None, budget: AssumptionBudget | None = None) -> dict:
    """Bundle the applicable probes into one report.

    Routes: an analytic eigenvalue route when the pair shares a known
    eigenbasis (periodic pair, sphere series pair), a spectral-density route
    for stationary Euclidean pairs, and a quadrature Galerkin route otherwise.
    The report never claims the asymptotic conditions hold; it grades each
    check consistent / inconsistent / inconclusive at probe scale.
    """
    budget = budget or AssumptionBudget()
    if domain is None:
        domain = true_model.kernel.domain
    routes: dict[str, dict] = {}

    eigen_verdict = _eigen_route(true_model.kernel, wrong_model.kernel, budget, routes)
    spectral_verdict = _spectral_route(true_model.kernel, wrong_model.kernel,
                                       budget, routes)
    galerkin_verdict = None
    if eigen_verdict is None:
        # quadrature route stands in for the eigen view whenever the pair has
        # no known shared basis
        galerkin_verdict = _galerkin_route(true_model.kernel, wrong_model.kernel,
                                           domain, budget, routes)
    primary = spectral_verdict or eigen_verdict or galerkin_verdict

    t_a = None
    if primary is not None and primary.kind is LimitKind.CONVERGES:
        t_a = _tail_probe(true_model.kernel, wrong_model.kernel, domain, budget,
                          primary.a_estimate)

    mean_probe = _mean_route(true_model, wrong_model, domain, budget)

    assessment = _grade(primary, true_model.kernel, mean_probe)
    return {
        "true_model": true_model.label,
        "wrong_model": wrong_model.label,
        "routes": routes,
        "primary_route": _primary_name(routes, spectral_verdict, eigen_verdict),
        "ratio_verdict": primary.to_dict() if primary else None,
        "t_a_tail": t_a,
        "mean_check": mean_probe,
        "assessment": assessment,
        "disclaimer": ("all verdicts are finite-probe observations; no "
                       "infinite-dimensional property is certified"),
    }


def _primary_name(routes, spectral_verdict, eigen_verdict) -> str | None:
    if spectral_verdict is not None:
        return "spectral"
    if eigen_verdict is not None:
        return "eigen_analytic"
    return "eigen_galerkin" if "eigen_galerkin" in routes else None


def _eigen_route(k_true, k_wrong, budget, routes) -> RatioVerdict | None:
    periodic_pair = isinstance(k_true, PeriodicKernel) and isinstance(k_wrong, PeriodicKernel)
    sphere_types = (SphereLegendreKernel, SphereSpdeKernel)
    sphere_pair = isinstance(k_true, sphere_types) and isinstance(k_wrong, sphere_types)
    if not (periodic_pair or sphere_pair):
        return None
    if periodic_pair:
        common = min(k_true.spectrum.k_max, k_wrong.spectrum.k_max)
        g = eigen_sequence_of(k_true, common)
        g_t = eigen_sequence_of(k_wrong, common)
    else:
        common = min(k_true.params.l_max, k_wrong.params.l_max,
                     int(math.isqrt(budget.eigen_terms)))
        g = eigen_sequence_of(k_true, common)
        g_t = eigen_sequence_of(k_wrong, common)
    if len(g) != len(g_t):
        routes["eigen_analytic"] = {"error": "spectra have mismatched supports"}
        return None
    verdict = eigen_ratio_limit(g, g_t, window=budget.verdict_window,
                                tol=budget.verdict_tol)
    routes["eigen_analytic"] = verdict.to_dict()
    return verdict


def _spectral_route(k_true, k_wrong, budget, routes) -> RatioVerdict | None:
    if not (isinstance(k_true, MaternKernel) and isinstance(k_wrong, MaternKernel)):
        return None
    f = MaternSpectralDensity(k_true.params)
    f_t = MaternSpectralDensity(k_wrong.params)
    lo, hi, count = budget.radii
    radii = np.logspace(math.log10(lo), math.log10(hi), int(count))
    verdict = spectral_ratio_limit(f, f_t, radii, tol=budget.verdict_tol)
    k_hat, big_k_hat = spectral_equivalence_bounds(
        f, f_t, [r * u for r in radii for u in _default_directions(f.dim)])
    routes["spectral"] = dict(verdict.to_dict(),
                              equivalence_bounds={"k_hat": k_hat, "K_hat": big_k_hat})
    return verdict


def _galerkin_route(k_true, k_wrong, domain, budget, routes) -> RatioVerdict | None:
    try:
        nodes, weights = _quadrature_for(domain, budget.quad_nodes)
        eig = nystrom_eigen(k_true, nodes, weights)
        basis = min(budget.galerkin_basis, eig.rank)
        funcs = eig.eigenvectors[:, :basis]
        lam = eig.eigenvalues[:basis]
        weighted = weights[:, None] * funcs
        middle = weighted.T @ k_wrong.gram(nodes) @ weighted
        diag_ratios = np.diag(middle) / lam
        if np.any(diag_ratios <= 0):
            routes["eigen_galerkin"] = {"error": "nonpositive projected ratios"}
            return None
        verdict = _tail_verdict(diag_ratios, window=max(0.25, budget.verdict_window),
                                tol=budget.verdict_tol, use_geometric=False)
        routes["eigen_galerkin"] = verdict.to_dict()
        return verdict
    except (DomainError, NumericalFailureError) as exc:
        routes["eigen_galerkin"] = {"error": str(exc)}
        return None


def _tail_probe(k_true, k_wrong, domain, budget, a) -> dict | None:
    try:
        nodes, weights = _quadrature_for(domain, budget.quad_nodes)
        report = t_a_tail_spectrum(k_true, k_wrong, nodes, weights, a,
                                   basis_size=min(budget.galerkin_basis, 64))
        return report.to_dict()
    except (DomainError, NumericalFailureError) as exc:
        return {"error": str(exc)}


def _quadrature_for(domain, n: int):
    if isinstance(domain, Torus):
        per_axis = max(2, int(round(n ** (1.0 / domain.dim))))
        return torus_grid(per_axis, domain.dim)
    if isinstance(domain, UnitSphere):
        return fibonacci_sphere_grid(n)
    if isinstance(domain, Box):
        if domain.dim != 1:
            raise DomainError("quadrature grids are provided for 1-d boxes only")
        return uniform_grid(n, domain.lower[0], domain.upper[0])
    raise DomainError(f"no quadrature rule for domain {domain!r}")


def _mean_route(true_model, wrong_model, domain, budget) -> dict:
    probe_pts, _ = _quadrature_for(domain, 33)
    delta = np.array([true_model.mean(p) - wrong_model.mean(p) for p in probe_pts])
    if float(np.max(np.abs(delta))) == 0.0:
        return {"status": "means agree on the probe grid", "grade": CONSISTENT}
    if true_model.kernel != wrong_model.kernel:
        return {"status": ("means differ but so do the kernels; the normalized "
                           "interpolation-error probe applies to shared-kernel pairs"),
                "grade": INCONCLUSIVE}
    if isinstance(domain, UnitSphere):
        return {"status": "no accumulating design generator on the sphere",
                "grade": INCONCLUSIVE}
    from .harness import DesignGenerator, generate_design
    from .kriging import TargetFunctional
    from .ratios import mean_term
    gen = DesignGenerator.accumulating(domain=domain)
    target = TargetFunctional.point(np.atleast_1d(gen.x_star), label="acc")
    sizes, values = [], []
    for n in budget.mean_design_sizes:
        design = generate_design(gen, n)
        try:
            values.append(mean_term(design, target, true_model, wrong_model))
        except NumericalFailureError as exc:
            return {"status": f"mean probe degenerate at n={n}: {exc}",
                    "design_sizes": sizes, "values": values, "grade": INCONCLUSIVE}
        sizes.append(n)
    decreasing = all(a >= b for a, b in zip(values, values[1:]))
    grade = CONSISTENT if decreasing and values[-1] < values[0] else INCONCLUSIVE
    return {"status": "normalized interpolation error of the mean difference",
            "design_sizes": sizes, "values": values, "grade": grade}


def _grade(verdict: RatioVerdict | None, true_kernel, mean_probe) -> dict:
    if verdict is None:
        ratio_grade = INCONCLUSIVE
        equivalence_grade = INCONCLUSIVE
    elif verdict.kind is LimitKind.CONVERGES:
        ratio_grade = f"{CONSISTENT} (a~{verdict.a_estimate:.6g})"
        equivalence_grade = CONSISTENT
    elif verdict.kind is LimitKind.INCONCLUSIVE:
        ratio_grade = INCONCLUSIVE
        equivalence_grade = INCONCLUSIVE
    else:
        ratio_grade = INCONSISTENT
        # a diverging ratio rules out variance-norm equivalence outright for
        # finitely smooth covariances
        equivalence_grade = (INCONSISTENT
                             if true_kernel.infinitely_differentiable is False
                             else INCONCLUSIVE)
    return {
        "variance_norm_equivalence": equivalence_grade,
        "bounded_ratio_limit": ratio_grade,
        "mean_difference": mean_probe.get("grade", INCONCLUSIVE),
    }
