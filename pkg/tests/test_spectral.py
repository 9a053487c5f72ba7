"""Eigenbasis, transforms and pseudospectral projection."""

import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.integrate import trapezoid

from kirchhoff.errors import ConfigError
from kirchhoff.model import CubicMinusLinearSource, OddPowerSource, ZeroSource
from kirchhoff.spectral import (AliasingWarning, Basis, Domain, Transform, analyze, dealiased_size, eigenvalues,
                                project_f, sherman_morrison, sobolev_norm_sq, synthesize)

coeff_vectors = arrays(np.float64, 6, elements=st.floats(-2.0, 2.0))


class TestEigenvalues:
    def test_unit_interval(self):
        np.testing.assert_allclose(eigenvalues(Domain.interval(math.pi, 3)), [1.0, 4.0, 9.0], rtol=1e-14)

    def test_square(self):
        np.testing.assert_allclose(eigenvalues(Domain.rectangle(math.pi, math.pi, 2)), [2, 5, 5, 8], rtol=1e-14)

    def test_long_interval(self):
        np.testing.assert_allclose(eigenvalues(Domain.interval(2 * math.pi, 2)), [0.25, 1.0], rtol=1e-14)

    def test_tie_order_is_lexicographic(self):
        d = Domain.rectangle(math.pi, math.pi, 2)
        assert d.mode_index == ((1, 1), (1, 2), (2, 1), (2, 2))

    @pytest.mark.parametrize("dom", [Domain.interval(1.3, 20), Domain.rectangle(1.0, 2.5, 7)])
    def test_sorted_positive(self, dom):
        lam = eigenvalues(dom)
        assert lam[0] > 0 and np.all(np.diff(lam) >= 0)
        assert dom.lambda1 == lam.min()

    def test_eigenvalues_read_only(self):
        with pytest.raises(ValueError):
            Domain.interval(math.pi, 3).eigenvalues[0] = 2.0

    @pytest.mark.parametrize("kind,lengths,n", [("disk", (1.0,), 3), ("interval", (1.0, 2.0), 3),
                                                ("interval", (-1.0,), 3), ("interval", (1.0,), 0)])
    def test_bad_domains(self, kind, lengths, n):
        with pytest.raises(ConfigError):
            Domain(kind, lengths, n)


class TestNorms:
    def test_examples(self):
        d = Domain.interval(math.pi, 3)
        assert sobolev_norm_sq(d, [1, 0, 0], 1) == 1.0
        assert sobolev_norm_sq(d, [1, 2, 0], 1) == 17.0
        assert sobolev_norm_sq(d, [1, 0, 0], -1) == 1.0

    @given(coeff_vectors)
    def test_parseval(self, v):
        d = Domain.interval(2.0, 6)
        tr = Transform(d, 12)
        quad = tr.integrate(tr.synthesize(v) ** 2)
        assert quad == pytest.approx(sobolev_norm_sq(d, v, 0), rel=1e-10, abs=1e-12)

    @given(coeff_vectors)
    def test_gradient_norm_by_quadrature(self, v):
        """|grad u|^2 from the modal weights equals the quadrature of u_x^2 (derivative series is cosine)."""
        d = Domain.interval(math.pi, 6)
        x = np.linspace(0, math.pi, 4001)
        k = np.arange(1, 7)
        ux = math.sqrt(2 / math.pi) * (np.cos(np.outer(x, k)) * k) @ v
        quad = trapezoid(ux**2, x)
        assert quad == pytest.approx(sobolev_norm_sq(d, v, 1), rel=1e-5, abs=1e-9)


class TestTransforms:
    def test_round_trip_single_mode(self):
        d = Domain.interval(math.pi, 1)
        np.testing.assert_allclose(analyze(d, synthesize(d, [1.0], 8)), [1.0], atol=1e-12)

    def test_zero(self):
        d = Domain.interval(math.pi, 4)
        assert np.all(synthesize(d, np.zeros(4), 8) == 0)
        assert np.all(analyze(d, np.zeros(8)) == 0)

    def test_round_trip_random(self):
        d = Domain.interval(math.pi, 5)
        v = np.random.default_rng(1).normal(size=5)
        assert np.max(np.abs(analyze(d, synthesize(d, v, 16)) - v)) <= 1e-12

    @given(arrays(np.float64, 9, elements=st.floats(-3.0, 3.0)))
    def test_round_trip_2d(self, v):
        d = Domain.rectangle(1.0, 2.0, 3)
        assert np.max(np.abs(analyze(d, synthesize(d, v, 7)) - v)) <= 1e-12

    @pytest.mark.parametrize("dom,m", [(Domain.interval(math.pi, 6), 7), (Domain.rectangle(math.pi, 2.0, 3), 5)])
    def test_orthogonality(self, dom, m):
        tr = Transform(dom, m)
        gram = tr.cell * tr.matrix.T @ tr.matrix
        np.testing.assert_allclose(gram, np.eye(dom.n_modes), atol=1e-12)

    def test_adjoint(self):
        tr = Transform(Domain.interval(math.pi, 4), 9)
        rng = np.random.default_rng(3)
        v, g = rng.normal(size=4), rng.normal(size=9)
        assert tr.integrate(tr.synthesize(v) * g) == pytest.approx(np.dot(v, tr.analyze(g)), rel=1e-13)

    def test_grid_too_small(self):
        with pytest.raises(ConfigError):
            Transform(Domain.interval(math.pi, 8), 8)

    def test_dealiased_size(self):
        assert dealiased_size(8, 2.0) == 18
        with pytest.raises(ConfigError):
            dealiased_size(8, 0.5)


class TestProjection:
    def test_sine_cubed(self):
        d = Domain.interval(math.pi, 5)
        u = np.zeros(5)
        u[0] = math.sqrt(math.pi / 2)  # u = sin x
        sine_coeffs = project_f(d, u, OddPowerSource(1.0, 3.0, 0.0)) * math.sqrt(2 / math.pi)
        np.testing.assert_allclose(sine_coeffs, [0.75, 0, -0.25, 0, 0], atol=1e-14)

    def test_zero_source(self):
        d = Domain.interval(math.pi, 4)
        assert np.all(project_f(d, np.ones(4), ZeroSource()) == 0)

    def test_matches_fine_quadrature(self):
        d = Domain.interval(math.pi, 9)
        u = np.zeros(9)
        u[:3] = np.random.default_rng(7).normal(size=3)
        f = OddPowerSource(1.0, 3.0, 0.0)
        coarse = project_f(d, u, f, 2.0)
        fine = Transform(d, 10 * 20)
        ref = fine.analyze(f.value(fine.synthesize(u)))
        np.testing.assert_allclose(coarse, ref, atol=1e-10)

    @given(arrays(np.float64, 6, elements=st.floats(-2.0, 2.0)))
    def test_odd_equivariance(self, u):
        d = Domain.interval(math.pi, 6)
        f = CubicMinusLinearSource(1.0, 1.0)
        assert np.array_equal(project_f(d, -u, f), -project_f(d, u, f))

    def test_non_polynomial_warns_when_underresolved(self):
        d = Domain.interval(math.pi, 4)
        with pytest.warns(AliasingWarning):
            project_f(d, np.ones(4), OddPowerSource(1.0, 2.5, 0.0), dealias=1.5)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            project_f(d, np.ones(4), OddPowerSource(1.0, 3.0, 0.0), dealias=1.5)


class TestLinearAlgebra:
    def test_sherman_morrison(self):
        rng = np.random.default_rng(0)
        base = np.diag(rng.uniform(1, 2, 5))
        a, b, r = rng.normal(size=(3, 5))
        x = sherman_morrison(lambda y: np.linalg.solve(base, y), r, a, b)
        np.testing.assert_allclose((base + np.outer(a, b)) @ x, r, atol=1e-12)

    def test_solve_matches_dense(self):
        basis = Basis(Domain.interval(math.pi, 6))
        f = CubicMinusLinearSource(1.0, 1.0)
        rng = np.random.default_rng(2)
        u, rhs, a, b = rng.normal(size=(4, 6)) * 0.3
        x = basis.solve(1.0, 0.1, 0.05, f, u, rhs, a, b)
        np.testing.assert_allclose(basis.dense_matrix(1.0, 0.1, 0.05, f, u, a, b) @ x, rhs, atol=1e-12)
