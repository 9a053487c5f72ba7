"""Energy-type functionals and the running energy balance of a trajectory.

All functionals take a discretisation (``basis``) first: either a
:class:`kirchhoff.spectral.Basis` or a :class:`kirchhoff.oracle.FDGrid`.
Both expose the same small set of methods (``l2_sq``, ``grad_sq``,
``inner``, ``integral_F``, ``h_vector``...), so the same code evaluates the
energy of modal and grid states.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, SequencingError
from .model import coercivity_eta0, criticality_class


def energy(basis, u, v, coeffs) -> float:
    """E = 1/2 [|v|^2 + Phi(|grad u|^2)] + int F(u) - (h, u)."""
    s = basis.grad_sq(u)
    return float(
        0.5 * (basis.l2_sq(v) + coeffs.phi.integral(s))
        + basis.integral_F(coeffs.f, u)
        - basis.inner(basis.h_vector(coeffs), u)
    )


def static_energy(basis, u, coeffs) -> float:
    """Potential part of :func:`energy`; its gradient is the stationary residual."""
    return energy(basis, u, np.zeros_like(u), coeffs)


def a_eta(coeffs, eta: float) -> float:
    """inf over s >= 0 of Phi(s) + eta*Sigma(s).

    For every supported family the derivative ``phi + eta*sigma`` is either
    nonnegative on the whole half-line or increasing from a negative value at
    zero, so the infimum sits at ``s = 0`` or at the unique root of the
    derivative.
    """
    eta0 = coercivity_eta0(coeffs.sigma, coeffs.phi)
    if eta0 is None or eta < eta0:
        raise DomainError(f"eta={eta:g} is below the coercivity threshold eta0={eta0}")
    g = lambda s: float(coeffs.phi.integral(s) + eta * coeffs.sigma.integral(s))
    dg = lambda s: float(coeffs.phi.value(s) + eta * coeffs.sigma.value(s))
    if dg(0.0) >= 0:
        return 0.0
    hi = 1.0
    while dg(hi) < 0:
        hi *= 2.0
        if hi > 1e300:
            raise DomainError(f"Phi + {eta:g} Sigma has no minimiser on [0, inf)")
    root = brentq(dg, 0.0, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    return min(0.0, g(root))


def energy_plus(basis, u, v, coeffs, eta: float) -> float:
    """Coercive reference functional

        |v|^2 + [Phi + eta Sigma](|grad u|^2) - a(eta) + alpha |u|_{p+1}^{p+1} + |u|^2

    with ``alpha = 1`` only for a supercritical source.
    """
    s = basis.grad_sq(u)
    a = a_eta(coeffs, eta)
    val = basis.l2_sq(v) + coeffs.phi.integral(s) + eta * coeffs.sigma.integral(s) - a + basis.l2_sq(u)
    if criticality_class(float(coeffs.f.growth), basis.dim) == "supercritical":
        p = float(coeffs.f.growth)
        val += basis.lp_norm(u, p + 1) ** (p + 1)
    return float(val)


def w_functional(basis, u, v, coeffs, eta: float, nu: float) -> float:
    """W = E + eta [(u, v) + Sigma(|grad u|^2)/2] + nu |u|^2."""
    s = basis.grad_sq(u)
    return float(
        energy(basis, u, v, coeffs)
        + eta * (basis.inner(u, v) + 0.5 * coeffs.sigma.integral(s))
        + nu * basis.l2_sq(u)
    )


def dissipation_rate(basis, u, v, coeffs) -> float:
    """sigma(|grad u|^2) |grad v|^2, the integrand of the dissipation integral."""
    return float(coeffs.sigma.value(basis.grad_sq(u)) * basis.grad_sq(v))


@dataclass
class EnergyLedger:
    """Running record of E(t), the dissipation integral D(t) and the balance residual.

    ``residual[i] = E[i] + D[i] - E[0]`` vanishes for exact solutions.  D is
    accumulated with the trapezoidal rule over consecutive records.
    """

    basis: object
    coeffs: object
    t: list = field(default_factory=list)
    E: list = field(default_factory=list)
    gradnorm2: list = field(default_factory=list)
    kinetic2: list = field(default_factory=list)
    D: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    _rate: float = 0.0

    def __len__(self):
        return len(self.t)

    def append(self, t: float, u, v) -> "EnergyLedger":
        t = float(t)
        rate = dissipation_rate(self.basis, u, v, self.coeffs)
        e = energy(self.basis, u, v, self.coeffs)
        if self.t:
            if not t > self.t[-1]:
                raise SequencingError(f"ledger time {t!r} does not exceed the last time {self.t[-1]!r}")
            d = self.D[-1] + 0.5 * (t - self.t[-1]) * (self._rate + rate)
            res = e + d - self.E[0]
        else:
            d, res = 0.0, 0.0
        self.t.append(t)
        self.E.append(e)
        self.gradnorm2.append(self.basis.grad_sq(u))
        self.kinetic2.append(self.basis.l2_sq(v))
        self.D.append(d)
        self.residual.append(res)
        self._rate = rate
        return self

    def arrays(self) -> dict:
        return {
            "t": np.array(self.t),
            "E": np.array(self.E),
            "gradnorm2": np.array(self.gradnorm2),
            "kinetic2": np.array(self.kinetic2),
            "D": np.array(self.D),
            "residual": np.array(self.residual),
        }

    @property
    def max_abs_residual(self) -> float:
        return max((abs(r) for r in self.residual), default=0.0)

    def lyapunov_violations(self, factor: float = 10.0) -> np.ndarray:
        """Indices i where E increases by more than ``factor`` times the residual seen so far."""
        e = np.array(self.E)
        res = np.maximum.accumulate(np.abs(np.array(self.residual)))
        scale = 64 * np.finfo(float).eps * (1 + np.abs(e))
        bad = np.diff(e) > factor * res[1:] + scale[1:]
        return np.nonzero(bad)[0] + 1


def ledger_update(ledger: EnergyLedger, t: float, u, v) -> EnergyLedger:
    """Append the sample ``(t, u, v)`` to ``ledger`` and return it."""
    return ledger.append(t, u, v)


def fit_order(steps, errors) -> float:
    """Least-squares slope of log|error| against log(step)."""
    x = np.log(np.asarray(steps, dtype=float))
    y = np.log(np.abs(np.asarray(errors, dtype=float)))
    return float(np.polyfit(x, y, 1)[0])

