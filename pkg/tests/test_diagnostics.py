"""Eigenvalue/spectral ratio probes, quadrature eigendecomposition, tail images."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from misspec_krige.diagnostics import (
    AssumptionBudget,
    assumption_report,
    eigen_ratio_limit,
    fibonacci_sphere_grid,
    nystrom_eigen,
    spectral_equivalence_bounds,
    spectral_ratio_limit,
    t_a_tail_spectrum,
    torus_grid,
    uniform_grid,
)
from misspec_krige.errors import DomainError
from misspec_krige.kernels import (
    EigenSequence,
    MaternKernel,
    MaternParams,
    MaternSpectralDensity,
    PeriodicKernel,
    PeriodicSpectrum,
    eigen_sequence_of,
)
from misspec_krige.kriging import GaussianModel, constant_mean, zero_mean
from misspec_krige.verdicts import LimitKind


def seq(values, label=""):
    return EigenSequence(np.asarray(values, dtype=float), label)


class TestEigenRatioLimit:
    def test_constructed_limit_three(self):
        j = np.arange(1, 10001, dtype=float)
        g = seq(j ** -2.0)
        g_t = seq(3.0 * j ** -2.0 * (1.0 + 1.0 / j))
        verdict = eigen_ratio_limit(g, g_t, window=0.2, tol=1e-2)
        assert verdict.kind is LimitKind.CONVERGES
        assert verdict.a_estimate == pytest.approx(3.0, abs=1e-2)

    def test_identical_sequences(self):
        j = np.arange(1, 200, dtype=float)
        verdict = eigen_ratio_limit(seq(j ** -1.5), seq(j ** -1.5))
        assert verdict.kind is LimitKind.CONVERGES
        assert verdict.a_estimate == 1.0

    def test_diverges_to_zero(self):
        j = np.arange(1, 5001, dtype=float)
        verdict = eigen_ratio_limit(seq(j ** -2.0), seq(j ** -3.0))
        assert verdict.kind is LimitKind.DIVERGES_TO_ZERO

    def test_diverges_to_infinity(self):
        j = np.arange(1, 5001, dtype=float)
        verdict = eigen_ratio_limit(seq(j ** -3.0), seq(j ** -2.0))
        assert verdict.kind is LimitKind.DIVERGES_TO_INFINITY

    def test_oscillating_is_inconclusive(self):
        j = np.arange(1, 2001, dtype=float)
        wobble = 1.0 + 0.5 * np.sin(j)
        verdict = eigen_ratio_limit(seq(j ** -2.0), seq(j ** -2.0 * wobble))
        assert verdict.kind is LimitKind.INCONCLUSIVE

    @given(st.floats(0.1, 100.0))
    @settings(max_examples=30, deadline=None)
    def test_scale_equivariance(self, c):
        j = np.arange(1, 501, dtype=float)
        g = seq(j ** -2.0)
        g_t = seq(2.0 * j ** -2.0 * (1.0 + 1.0 / j ** 2))
        base = eigen_ratio_limit(g, g_t)
        scaled = eigen_ratio_limit(g, seq(c * g_t.values))
        assert scaled.kind is base.kind
        assert scaled.a_estimate == pytest.approx(c * base.a_estimate, rel=1e-12)

    def test_validation(self):
        j = np.arange(1, 30, dtype=float)
        with pytest.raises(DomainError):
            eigen_ratio_limit(seq(j), seq(np.arange(1, 29, dtype=float)))
        with pytest.raises(DomainError):
            eigen_ratio_limit(seq(j[:10]), seq(j[:10]))


class TestSpectralRatioLimit:
    RADII = np.logspace(0, 3, 25)

    def test_matern_same_nu(self):
        f = MaternSpectralDensity(MaternParams(1.0, 0.5, 1.0, dim=1))
        f_t = MaternSpectralDensity(MaternParams(2.0, 0.5, 0.5, dim=1))
        verdict = spectral_ratio_limit(f, f_t, self.RADII)
        assert verdict.kind is LimitKind.CONVERGES
        assert verdict.a_estimate == pytest.approx(2.0, rel=1e-2)

    def test_identical(self):
        f = MaternSpectralDensity(MaternParams(1.0, 1.0, 1.0, dim=2))
        verdict = spectral_ratio_limit(f, f, self.RADII)
        assert verdict.kind is LimitKind.CONVERGES
        assert verdict.a_estimate == pytest.approx(1.0, rel=1e-12)

    def test_nu_mismatch_diverges(self):
        rough = MaternSpectralDensity(MaternParams(1.0, 0.5, 1.0, dim=1))
        smooth = MaternSpectralDensity(MaternParams(1.0, 1.5, 1.0, dim=1))
        assert spectral_ratio_limit(rough, smooth, self.RADII).kind \
            is LimitKind.DIVERGES_TO_ZERO
        assert spectral_ratio_limit(smooth, rough, self.RADII).kind \
            is LimitKind.DIVERGES_TO_INFINITY

    def test_relabel_symmetry(self):
        """Swapping the densities maps a -> 1/a and zero <-> infinity."""
        pairs = [
            (MaternParams(1.0, 0.5, 1.0, dim=1), MaternParams(2.0, 0.5, 0.5, dim=1)),
            (MaternParams(1.0, 0.5, 1.0, dim=1), MaternParams(1.0, 1.5, 1.0, dim=1)),
        ]
        flip = {LimitKind.DIVERGES_TO_ZERO: LimitKind.DIVERGES_TO_INFINITY,
                LimitKind.DIVERGES_TO_INFINITY: LimitKind.DIVERGES_TO_ZERO,
                LimitKind.CONVERGES: LimitKind.CONVERGES,
                LimitKind.INCONCLUSIVE: LimitKind.INCONCLUSIVE}
        for p, pt in pairs:
            fwd = spectral_ratio_limit(MaternSpectralDensity(p),
                                       MaternSpectralDensity(pt), self.RADII)
            bwd = spectral_ratio_limit(MaternSpectralDensity(pt),
                                       MaternSpectralDensity(p), self.RADII)
            assert bwd.kind is flip[fwd.kind]
            if fwd.kind is LimitKind.CONVERGES:
                assert bwd.a_estimate == pytest.approx(1.0 / fwd.a_estimate,
                                                       rel=1e-12)

    def test_needs_two_decades(self):
        f = MaternSpectralDensity(MaternParams(1.0, 0.5, 1.0, dim=1))
        with pytest.raises(DomainError):
            spectral_ratio_limit(f, f, [1.0, 2.0, 4.0])

    def test_direction_dependent_limit_is_inconclusive(self):
        from misspec_krige.kernels import SpectralDensity

        class Anisotropic(SpectralDensity):
            """Ratio over the base tends to 3 along the first axis, 1 along
            the second; no direction-free limit exists."""
            dim = 2

            def __init__(self, base):
                self.base = base

            def __call__(self, omega):
                omega = np.asarray(omega, dtype=float)
                n2 = float(omega @ omega)
                weight = 1.0 + 2.0 * omega[0] ** 2 / (1.0 + n2)
                return self.base(omega) * weight

        base = MaternSpectralDensity(MaternParams(1.0, 1.0, 1.0, dim=2))
        verdict = spectral_ratio_limit(base, Anisotropic(base), self.RADII)
        assert verdict.kind is LimitKind.INCONCLUSIVE
        assert verdict.evidence is not None
        assert verdict.evidence.max_deviation > 0.0


class TestEquivalenceBounds:
    def test_exact_scaling(self):
        f = MaternSpectralDensity(MaternParams(1.0, 0.5, 1.0, dim=1))
        f2 = MaternSpectralDensity(MaternParams(math.sqrt(2.0), 0.5, 1.0, dim=1))
        grid = [np.array([w]) for w in np.linspace(0.0, 50.0, 101)]
        k_hat, K_hat = spectral_equivalence_bounds(f, f2, grid)
        assert k_hat == pytest.approx(2.0, rel=1e-12)
        assert K_hat == pytest.approx(2.0, rel=1e-12)

    def test_same_nu_bounded_spread(self):
        f = MaternSpectralDensity(MaternParams(1.0, 0.5, 1.0, dim=1))
        f_t = MaternSpectralDensity(MaternParams(2.0, 0.5, 0.5, dim=1))
        grid = [np.array([w]) for w in np.linspace(0.0, 100.0, 401)]
        k_hat, K_hat = spectral_equivalence_bounds(f, f_t, grid)
        assert 2.0 <= k_hat <= K_hat <= 8.0
        assert K_hat / k_hat <= 4.1

    def test_mismatch_spread_grows_with_grid(self):
        f = MaternSpectralDensity(MaternParams(1.0, 0.5, 1.0, dim=1))
        f_t = MaternSpectralDensity(MaternParams(1.0, 1.5, 1.0, dim=1))
        short = [np.array([w]) for w in np.linspace(0.0, 10.0, 101)]
        long = [np.array([w]) for w in np.linspace(0.0, 1000.0, 101)]
        k1, K1 = spectral_equivalence_bounds(f, f_t, short)
        k2, K2 = spectral_equivalence_bounds(f, f_t, long)
        assert K2 / k2 > 10.0 * K1 / k1


def small_periodic_kernel():
    return PeriodicKernel(PeriodicSpectrum.from_coeffs({0: 1.0, 1: 0.5}, dim=1))


class TestNystromEigen:
    def test_rank_one_constant_kernel(self):
        from misspec_krige.kernels import Box, CovarianceKernel

        class ConstantKernel(CovarianceKernel):
            domain = Box()

            def gram(self, x, y=None):
                n = np.atleast_2d(x).shape[0]
                m = n if y is None else np.atleast_2d(y).shape[0]
                return np.full((n, m), 0.7)

        nodes, weights = uniform_grid(40)
        eig = nystrom_eigen(ConstantKernel(), nodes, weights, rank_cutoff=1e-10)
        assert eig.rank == 1
        assert eig.eigenvalues[0] == pytest.approx(0.7, rel=1e-12)

    def test_periodic_small_spectrum(self):
        nodes, weights = torus_grid(64)
        eig = nystrom_eigen(small_periodic_kernel(), nodes, weights,
                            rank_cutoff=1e-9)
        assert eig.rank == 3
        np.testing.assert_allclose(eig.eigenvalues, [1.0, 0.5, 0.5], atol=1e-6)

    def test_mercer_reconstruction_on_nodes(self):
        nodes, weights = torus_grid(64)
        kern = small_periodic_kernel()
        eig = nystrom_eigen(kern, nodes, weights, rank_cutoff=1e-9)
        recon = eig.mercer_reconstruction()
        np.testing.assert_allclose(recon, kern.gram(nodes), atol=1e-6)

    def test_trace_consistency(self):
        nodes, weights = uniform_grid(80)
        kern = MaternKernel(MaternParams(1.0, 1.5, 3.0))
        eig = nystrom_eigen(kern, nodes, weights, rank_cutoff=0.0)
        diag_integral = float(weights @ np.diag(kern.gram(nodes)))
        assert float(eig.eigenvalues.sum()) == pytest.approx(
            diag_integral, rel=1e-8)

    def test_matern_descending_positive(self):
        nodes, weights = uniform_grid(128)
        eig = nystrom_eigen(MaternKernel(MaternParams(1.0, 0.5, 1.0)),
                            nodes, weights)
        assert np.all(eig.eigenvalues > 0)
        assert np.all(np.diff(eig.eigenvalues) <= 0)

    def test_bad_weights(self):
        nodes, weights = uniform_grid(16)
        with pytest.raises(DomainError):
            nystrom_eigen(small_periodic_kernel(), nodes, -weights)


class TestTaTail:
    def test_scaled_kernel_gives_zero(self):
        nodes, weights = torus_grid(64)
        spec = PeriodicSpectrum.from_callable(
            lambda k: (1.0 + float(k[0]) ** 2) ** -2.0, dim=1, k_max=16)
        scaled = PeriodicSpectrum.from_callable(
            lambda k: 3.0 * (1.0 + float(k[0]) ** 2) ** -2.0, dim=1, k_max=16)
        report = t_a_tail_spectrum(PeriodicKernel(spec), PeriodicKernel(scaled),
                                   nodes, weights, a=3.0, basis_size=16)
        assert report.max_abs <= 1e-8

    def test_diagonal_limit_three_tail_decay(self):
        nodes, weights = torus_grid(128)
        base = lambda k: (1.0 + float(k[0]) ** 2) ** -2.0
        spec = PeriodicSpectrum.from_callable(base, dim=1, k_max=32)
        wobble = PeriodicSpectrum.from_callable(
            lambda k: 3.0 * base(k) * (1.0 + 1.0 / (1.0 + abs(float(k[0])))),
            dim=1, k_max=32)
        report = t_a_tail_spectrum(PeriodicKernel(spec), PeriodicKernel(wobble),
                                   nodes, weights, a=3.0, basis_size=32)
        assert report.last_quartile_max() < 0.1 * report.max_abs

    def test_wrong_a_leaves_tail_offset(self):
        nodes, weights = torus_grid(128)
        base = lambda k: (1.0 + float(k[0]) ** 2) ** -2.0
        spec = PeriodicSpectrum.from_callable(base, dim=1, k_max=32)
        wobble = PeriodicSpectrum.from_callable(
            lambda k: 3.0 * base(k) * (1.0 + 1.0 / (1.0 + abs(float(k[0])))),
            dim=1, k_max=32)
        off = 1.0  # true limit is 3
        report = t_a_tail_spectrum(PeriodicKernel(spec), PeriodicKernel(wobble),
                                   nodes, weights, a=off, basis_size=32)
        assert report.last_quartile_max() > 0.5 * abs(3.0 - off)

    def test_a_zero_image_is_positive(self):
        nodes, weights = torus_grid(64)
        spec = PeriodicSpectrum.from_callable(
            lambda k: (1.0 + float(k[0]) ** 2) ** -2.0, dim=1, k_max=16)
        kern = PeriodicKernel(spec)
        report = t_a_tail_spectrum(kern, kern, nodes, weights, a=0.0,
                                   basis_size=16)
        assert np.all(report.galerkin_eigs >= -1e-8)
        with pytest.raises(DomainError):
            t_a_tail_spectrum(kern, kern, nodes, weights, a=-1.0, basis_size=8)

    def test_basis_larger_than_resolved_rank(self):
        nodes, weights = torus_grid(32)
        with pytest.raises(DomainError):
            t_a_tail_spectrum(small_periodic_kernel(), small_periodic_kernel(),
                              nodes, weights, a=1.0, basis_size=10)


class TestQuadratures:
    def test_uniform_grid_weights_sum(self):
        _, weights = uniform_grid(33, 0.0, 2.0)
        assert weights.sum() == pytest.approx(2.0)

    def test_torus_grid_exactness(self):
        nodes, weights = torus_grid(16)
        assert weights.sum() == pytest.approx(1.0)
        # exact for low harmonics
        assert float(weights @ np.cos(2 * np.pi * nodes[:, 0])) == pytest.approx(
            0.0, abs=1e-14)

    def test_fibonacci_sphere(self):
        nodes, weights = fibonacci_sphere_grid(200)
        np.testing.assert_allclose(np.linalg.norm(nodes, axis=1), 1.0, rtol=1e-12)
        assert weights.sum() == pytest.approx(4 * math.pi)
        # centroid near the origin for a balanced point set
        assert np.linalg.norm(nodes.mean(axis=0)) < 0.02


class TestAssumptionReport:
    def test_identical_matern_pair_both_routes(self):
        model = GaussianModel(zero_mean, MaternKernel(MaternParams(1, 0.5, 1)), "m")
        report = assumption_report(model, model)
        assert report["primary_route"] == "spectral"
        assert report["ratio_verdict"]["kind"] == "converges"
        assert report["ratio_verdict"]["a_estimate"] == pytest.approx(1.0, rel=1e-10)
        galerkin = report["routes"]["eigen_galerkin"]
        assert galerkin["kind"] == "converges"
        assert galerkin["a_estimate"] == pytest.approx(1.0, rel=1e-6)
        assert report["assessment"]["variance_norm_equivalence"] == "consistent"

    def test_nu_mismatch_flags_inconsistent(self):
        rough = GaussianModel(zero_mean, MaternKernel(MaternParams(1, 0.5, 1)), "r")
        smooth = GaussianModel(zero_mean, MaternKernel(MaternParams(1, 1.5, 1)), "s")
        report = assumption_report(rough, smooth)
        assert report["ratio_verdict"]["kind"] == "diverges_to_zero"
        assert report["assessment"]["variance_norm_equivalence"] == "inconsistent"

    def test_never_certifies(self):
        model = GaussianModel(zero_mean, MaternKernel(MaternParams(1, 0.5, 1)), "m")
        report = assumption_report(model, model)
        assert "certified" not in str(report["assessment"]).lower()
        assert "no infinite-dimensional property is certified" in report["disclaimer"]

    def test_mean_difference_route(self):
        kern = MaternKernel(MaternParams(1, 0.5, 1))
        base = GaussianModel(zero_mean, kern, "m0")
        shifted = GaussianModel(constant_mean(1.0), kern, "m1")
        report = assumption_report(base, shifted,
                                   budget=AssumptionBudget(mean_design_sizes=(8, 24)))
        assert report["mean_check"]["grade"] == "consistent"
        assert report["mean_check"]["values"][-1] < report["mean_check"]["values"][0]

    def test_sphere_pair_eigen_route(self):
        from misspec_krige.kernels import (SphereLegendreKernel, SphereLegendreParams,
                                           SphereSpdeKernel, SphereSpdeParams)
        m1 = GaussianModel(zero_mean, SphereLegendreKernel(
            SphereLegendreParams(1.0, 1.0, 1.0)), "leg")
        m2 = GaussianModel(zero_mean, SphereSpdeKernel(
            SphereSpdeParams(1.0, 1.0, 1.0)), "spde")
        report = assumption_report(m1, m2)
        assert report["primary_route"] == "eigen_analytic"
        assert report["ratio_verdict"]["kind"] == "converges"
        assert report["ratio_verdict"]["a_estimate"] == pytest.approx(
            1.0 / (2 * math.pi), rel=0.05)
