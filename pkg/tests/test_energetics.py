"""Energy functionals and the energy ledger."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy.optimize import minimize_scalar

from helpers import double_well, linear_oscillator, state
from kirchhoff.dynamics import StepperConfig, simulate
from kirchhoff.energetics import (EnergyLedger, a_eta, dissipation_rate, energy, energy_plus, fit_order,
                                  ledger_update, static_energy, w_functional)
from kirchhoff.errors import DomainError, SequencingError
from kirchhoff.model import (CoefficientSet, CompactBumpPhi, ConstantPhi, ConstantSigma, CubicMinusLinearSource,
                             OddPowerSource, PowerAffinePhi, PowerAffineSigma, ZeroSource)
from kirchhoff.spectral import Basis, Domain, Transform

UNIT = Basis(Domain.interval(math.pi, 6))


def e1(n=6):
    u = np.zeros(n)
    u[0] = 1.0
    return u


class TestEnergy:
    def test_zero_state(self):
        c = CoefficientSet(ConstantSigma(1.0), PowerAffinePhi(1.0, 1.0, 1.0), CubicMinusLinearSource(1.0, 1.0))
        assert energy(UNIT, np.zeros(6), np.zeros(6), c) == 0.0

    def test_constant_phi(self):
        c = CoefficientSet(ConstantSigma(1.0), ConstantPhi(2.0))
        assert energy(UNIT, e1(), np.zeros(6), c) == pytest.approx(1.0, abs=1e-15)

    def test_quartic_potential_against_refined_quadrature(self):
        c = CoefficientSet(ConstantSigma(1.0), ConstantPhi(0.0), OddPowerSource(1.0, 3.0, 0.0))
        amp = 1.7
        fine = Transform(Domain.interval(math.pi, 6), 10 * 14)
        ref = fine.integrate(0.25 * fine.synthesize(amp * e1()) ** 4)
        # closed form: int_0^pi (2/pi)^2 sin^4 x dx / 4 = 3 / (8 pi) per unit amplitude^4
        assert ref == pytest.approx(3 * amp**4 / (8 * math.pi), rel=1e-12)
        assert energy(UNIT, amp * e1(), np.zeros(6), c) == pytest.approx(ref, rel=1e-12)

    def test_static_energy(self):
        b, c = double_well()
        u = np.linspace(0.3, -0.1, 8)
        assert static_energy(b, u, c) == energy(b, u, np.zeros(8), c)

    @given(arrays(np.float64, 6, elements=st.floats(-1.0, 1.0)), arrays(np.float64, 6, elements=st.floats(-1, 1)))
    def test_even_under_negation(self, u, v):
        c = CoefficientSet(ConstantSigma(1.0), PowerAffinePhi(0.5, 1.0, 1.0), CubicMinusLinearSource(1.0, 1.0))
        assert energy(UNIT, -u, -v, c) == energy(UNIT, u, v, c)


class TestEnergyPlus:
    def test_zero(self):
        c = CoefficientSet(ConstantSigma(1.0), PowerAffinePhi(1.0, 1.0, 1.0))
        assert energy_plus(UNIT, np.zeros(6), np.zeros(6), c, 0.0) == 0.0

    def test_negative_phi_example(self):
        c = CoefficientSet(ConstantSigma(1.0), ConstantPhi(-1.0))
        assert energy_plus(UNIT, e1(), np.zeros(6), c, 2.0) == pytest.approx(2.0, abs=1e-15)

    def test_below_threshold(self):
        c = CoefficientSet(ConstantSigma(1.0), ConstantPhi(-1.0))
        with pytest.raises(DomainError):
            energy_plus(UNIT, e1(), np.zeros(6), c, 1.0)

    @pytest.mark.parametrize("sigma,phi,eta", [
        (ConstantSigma(1.0), ConstantPhi(-1.0), 3.0),
        (ConstantSigma(1.0), PowerAffinePhi(-2.0, 1.0, 1.0), 0.0),
        (PowerAffineSigma(1.0, 1.0, 2.0), PowerAffinePhi(-3.0, 0.5, 1.0), 0.5),
        (ConstantSigma(2.0), CompactBumpPhi(1.0, 2.0), 1.0),
    ])
    def test_a_eta_matches_numerical_minimum(self, sigma, phi, eta):
        c = CoefficientSet(sigma, phi)
        g = lambda s: float(phi.integral(s) + eta * sigma.integral(s))
        num = min(0.0, minimize_scalar(g, bounds=(0, 100), method="bounded", options={"xatol": 1e-12}).fun)
        assert a_eta(c, eta) == pytest.approx(num, abs=1e-9)

    @settings(max_examples=100)
    @given(arrays(np.float64, 6, elements=st.floats(-3, 3)), arrays(np.float64, 6, elements=st.floats(-3, 3)),
           st.floats(0.0, 5.0))
    def test_nonnegative(self, u, v, extra):
        c = CoefficientSet(PowerAffineSigma(1.0, 1.0, 1.0), PowerAffinePhi(-2.0, 1.0, 1.0), CubicMinusLinearSource(1, 1))
        assert energy_plus(UNIT, u, v, c, extra) >= -1e-12


class TestWFunctional:
    def test_reduces_to_energy(self):
        b, c = double_well()
        u, v = np.linspace(0.2, 0.0, 8), np.linspace(0.0, 0.1, 8)
        assert w_functional(b, u, v, c, 0.0, 0.0) == energy(b, u, v, c)

    def test_example(self):
        c = CoefficientSet(ConstantSigma(1.0), ConstantPhi(0.0), ZeroSource())
        assert w_functional(UNIT, e1(), e1(), c, 1.0, 0.0) == pytest.approx(2.0, abs=1e-15)

    def test_two_sided_bound(self):
        """Fitted constants a0, a1, a2 and M(s) = m (1 + s)^2 bracket W by E+ over random states."""
        c = CoefficientSet(PowerAffineSigma(1.0, 1.0, 1.0), PowerAffinePhi(0.5, 1.0, 1.0), CubicMinusLinearSource(1, 1))
        eta, nu = 0.5, 1.0
        rng = np.random.default_rng(11)
        w, ep, s = [], [], []
        for scale in np.geomspace(0.01, 10, 200):
            u, v = scale * rng.normal(size=(2, 6)) / np.arange(1, 7)
            w.append(w_functional(UNIT, u, v, c, eta, nu))
            ep.append(energy_plus(UNIT, u, v, c, eta))
            s.append(UNIT.grad_sq(u))
        w, ep, s = map(np.array, (w, ep, s))
        a0 = 0.5 * np.min(w[ep > 1] / ep[ep > 1])
        a1 = max(0.0, np.max(a0 * ep - w))
        a2 = 2.0 * np.max(w / np.maximum(ep, 1e-300))
        assert a0 > 0 and np.isfinite(a1) and np.isfinite(a2)
        assert np.all(a0 * ep - a1 <= w + 1e-12)
        assert np.all(w <= a2 * ep + 1e-12)


class TestLedger:
    def test_equilibrium_stays_flat(self):
        b, c = double_well()
        led = EnergyLedger(b, c)
        for t in range(5):
            ledger_update(led, float(t), np.zeros(8), np.zeros(8))
        assert led.D == [0.0] * 5 and led.residual == [0.0] * 5

    def test_first_residual_exactly_zero(self):
        b, c = double_well()
        led = EnergyLedger(b, c).append(0.0, np.ones(8), np.ones(8))
        assert led.residual[0] == 0.0

    def test_time_must_increase(self):
        b, c = double_well()
        led = EnergyLedger(b, c).append(1.0, np.zeros(8), np.zeros(8))
        with pytest.raises(SequencingError):
            led.append(1.0, np.zeros(8), np.zeros(8))

    def test_dissipation_nondecreasing(self):
        b, c = double_well()
        tr = simulate(b, state(8, {1: 1.0, 3: 0.3}, {2: 0.5}), 3.0, c, StepperConfig(dt=0.01))
        assert np.all(np.diff(tr.ledger.arrays()["D"]) >= 0)

    def test_dissipation_rate(self):
        c = CoefficientSet(PowerAffineSigma(1.0, 1.0, 1.0), ConstantPhi(1.0))
        assert dissipation_rate(UNIT, e1(), 2 * e1(), c) == pytest.approx(2.0 * 4.0)

    def test_linear_residual_second_order(self):
        b, c = linear_oscillator()
        dts = [1e-2, 5e-3, 2.5e-3]
        res = [abs(simulate(b, state(1, {1: 1.0}), 1.0, c, StepperConfig(dt=dt), 100).ledger.residual[-1])
               for dt in dts]
        assert fit_order(dts, res) >= 1.9

    def test_fit_order(self):
        assert fit_order([1, 0.5, 0.25], [1, 0.25, 0.0625]) == pytest.approx(2.0)
