"""Canned problem instances shared by the test modules."""

import math

import numpy as np

from kirchhoff.dynamics import ModalState
from kirchhoff.model import (CoefficientSet, CompactBumpPhi, ConstantPhi, ConstantSigma, CubicMinusLinearSource,
                             OddPowerSource, PowerAffinePhi, PowerAffineSigma, ZeroSource)
from kirchhoff.spectral import Basis, Domain


def state(n, u=None, v=None, t=0.0):
    """Modal state from sparse ``{mode_number: value}`` dictionaries."""
    uu, vv = np.zeros(n), np.zeros(n)
    for k, c in (u or {}).items():
        uu[k - 1] = c
    for k, c in (v or {}).items():
        vv[k - 1] = c
    return ModalState(t, uu, vv)


def double_well(n=8):
    """sigma = 1 + s, phi = 1/2 + s, f = u^3 - u on (0, pi): three equilibria 0, +-u*."""
    basis = Basis(Domain.interval(math.pi, n))
    coeffs = CoefficientSet(PowerAffineSigma(1.0, 1.0, 1.0), PowerAffinePhi(0.5, 1.0, 1.0),
                            CubicMinusLinearSource(1.0, 1.0))
    return basis, coeffs


def linear_oscillator():
    """One mode with lambda = 1, sigma = phi = 1, f = 0: u'' + u' + u = 0."""
    basis = Basis(Domain.interval(math.pi, 1))
    coeffs = CoefficientSet(ConstantSigma(1.0), ConstantPhi(1.0), ZeroSource())
    return basis, coeffs


def oscillator_exact(t):
    w = math.sqrt(3.0) / 2.0
    return math.exp(-t / 2) * (math.cos(w * t) + math.sin(w * t) / (2 * w))


def energy_scenarios():
    """(name, basis, coeffs, initial state) for the energy-identity study."""
    out = []
    b, c = linear_oscillator()
    out.append(("linear single-mode", b, c, state(1, {1: 1.0})))
    b, c = double_well()
    out.append(("cubic double-well", b, c, state(8, {1: 1.0, 3: 0.3}, {2: 0.5})))
    b = Basis(Domain.interval(math.pi, 8))
    c = CoefficientSet(ConstantSigma(1.0), CompactBumpPhi(1.0, 2.0), OddPowerSource(1.0, 3.0, 0.0))
    out.append(("compact-bump phi", b, c, state(8, {1: 1.0, 2: 0.4}, {1: 0.5})))
    c = CoefficientSet(PowerAffineSigma(1.0, 2.0, 1.0), ConstantPhi(-1.0), OddPowerSource(1.0, 3.0, 0.0))
    out.append(("negative phi, strong sigma", b, c, state(8, {1: 1.0, 2: 0.4}, {1: 0.5})))
    b = Basis(Domain.rectangle(math.pi, math.pi, 4))
    c = CoefficientSet(ConstantSigma(1.0), PowerAffinePhi(1.0, 1.0, 1.0), CubicMinusLinearSource(1.0, 1.0))
    out.append(("2D rectangle cubic", b, c, state(b.n, {1: 1.0, 2: 0.3, 4: 0.2}, {3: 0.5})))
    return out
