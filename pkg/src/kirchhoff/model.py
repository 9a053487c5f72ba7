"""Coefficient families for the damped Kirchhoff equation and hypothesis checks.

The equation is

    u_tt - sigma(|grad u|^2) Lap u_t - phi(|grad u|^2) Lap u + f(u) = h

with Dirichlet boundary conditions.  The damping ``sigma``, the stiffness
``phi`` and the source ``f`` are drawn from closed-form families so that
their antiderivatives ``Sigma``, ``Phi`` and ``F`` are exact.

Families are small frozen dataclasses with vectorised ``value``/``deriv``/
``integral`` methods.  :class:`CoefficientSet` bundles one of each plus the
forcing ``h`` given by its nonzero modal entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import ConfigError, DomainError

_POSITIVITY_GRID = 512
_TINY = 1e-300


def _leading(terms):
    """Return (power, coef) of the highest-power nonzero term, or None."""
    merged: dict[float, float] = {}
    for power, coef in terms:
        merged[power] = merged.get(power, 0.0) + coef
    live = [(p, c) for p, c in merged.items() if abs(c) > 1e-14 * (1 + abs(c))]
    if not live:
        return None
    return max(live)


def _tends_to_infinity(terms) -> bool:
    lead = _leading(terms)
    return lead is not None and lead[0] > 0 and lead[1] > 0


def _bounded_below(terms) -> bool:
    lead = _leading(terms)
    return lead is None or lead[0] == 0 or lead[1] > 0


# ---------------------------------------------------------------------------
# damping and stiffness families (functions of s = |grad u|^2 >= 0)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConstantSigma:
    sigma0: float
    tag = "constant"

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ConfigError(f"constant damping requires sigma0 > 0, got {self.sigma0}")

    def value(self, s):
        return self.sigma0 + 0.0 * np.asarray(s, dtype=float)

    def deriv(self, s):
        return 0.0 * np.asarray(s, dtype=float)

    def integral(self, s):
        return self.sigma0 * np.asarray(s, dtype=float)

    def integral_tail(self):
        return [(1.0, self.sigma0)]

    def params(self):
        return {"sigma0": self.sigma0}


@dataclass(frozen=True)
class PowerAffineSigma:
    """sigma(s) = sigma0 + sigma1 * s**beta."""

    sigma0: float
    sigma1: float = 0.0
    beta: float = 1.0
    tag = "power_affine"

    def __post_init__(self):
        if not self.sigma0 > 0:
            raise ConfigError(f"power_affine damping requires sigma0 > 0, got {self.sigma0}")
        if self.sigma1 < 0:
            raise ConfigError(f"power_affine damping requires sigma1 >= 0, got {self.sigma1}")
        if self.beta < 1:
            raise ConfigError(f"power_affine damping requires beta >= 1, got {self.beta}")

    def value(self, s):
        s = np.asarray(s, dtype=float)
        return self.sigma0 + self.sigma1 * s**self.beta

    def deriv(self, s):
        s = np.asarray(s, dtype=float)
        return self.sigma1 * self.beta * s ** (self.beta - 1)

    def integral(self, s):
        s = np.asarray(s, dtype=float)
        return self.sigma0 * s + self.sigma1 * s ** (self.beta + 1) / (self.beta + 1)

    def integral_tail(self):
        return [(1.0, self.sigma0), (self.beta + 1, self.sigma1 / (self.beta + 1))]

    def params(self):
        return {"sigma0": self.sigma0, "sigma1": self.sigma1, "beta": self.beta}


@dataclass(frozen=True)
class ConstantPhi:
    phi0: float
    tag = "constant"

    def value(self, s):
        return self.phi0 + 0.0 * np.asarray(s, dtype=float)

    def deriv(self, s):
        return 0.0 * np.asarray(s, dtype=float)

    def integral(self, s):
        return self.phi0 * np.asarray(s, dtype=float)

    def integral_tail(self):
        return [(1.0, self.phi0)]

    def s_phi_tail(self):
        return [(1.0, self.phi0)]

    @property
    def liminf(self):
        return self.phi0

    def positive_everywhere(self):
        return self.phi0 > 0, None if self.phi0 > 0 else 0.0

    def nondecreasing(self):
        return True, None

    def smooth_c2(self):
        return True, None

    def params(self):
        return {"phi0": self.phi0}


@dataclass(frozen=True)
class PowerAffinePhi:
    """phi(s) = phi0 + phi1 * s**alpha with phi1 > 0 and alpha >= 1."""

    phi0: float
    phi1: float
    alpha: float = 1.0
    tag = "power_affine"

    def __post_init__(self):
        if not self.phi1 > 0:
            raise ConfigError(f"power_affine stiffness requires phi1 > 0, got {self.phi1}")
        if self.alpha < 1:
            raise ConfigError(f"power_affine stiffness requires alpha >= 1, got {self.alpha}")

    def value(self, s):
        s = np.asarray(s, dtype=float)
        return self.phi0 + self.phi1 * s**self.alpha

    def deriv(self, s):
        s = np.asarray(s, dtype=float)
        return self.phi1 * self.alpha * s ** (self.alpha - 1)

    def integral(self, s):
        s = np.asarray(s, dtype=float)
        return self.phi0 * s + self.phi1 * s ** (self.alpha + 1) / (self.alpha + 1)

    def integral_tail(self):
        return [(1.0, self.phi0), (self.alpha + 1, self.phi1 / (self.alpha + 1))]

    def s_phi_tail(self):
        return [(1.0, self.phi0), (self.alpha + 1, self.phi1)]

    @property
    def liminf(self):
        return math.inf

    def positive_everywhere(self):
        return self.phi0 > 0, None if self.phi0 > 0 else 0.0

    def nondecreasing(self):
        return True, None

    def smooth_c2(self):
        # s**alpha is C^2 on [0, inf) for alpha == 1 or alpha >= 2
        ok = self.alpha == 1 or self.alpha >= 2
        return ok, None if ok else 0.0

    def params(self):
        return {"phi0": self.phi0, "phi1": self.phi1, "alpha": self.alpha}


@dataclass(frozen=True)
class CompactBumpPhi:
    """phi(s) = phi0 * max(0, 1 - s/s0): stiffness vanishing for s >= s0."""

    phi0: float
    s0: float
    tag = "compact_bump"

    def __post_init__(self):
        if not self.s0 > 0:
            raise ConfigError(f"compact_bump stiffness requires s0 > 0, got {self.s0}")

    def value(self, s):
        s = np.asarray(s, dtype=float)
        return self.phi0 * np.maximum(0.0, 1.0 - s / self.s0)

    def deriv(self, s):
        s = np.asarray(s, dtype=float)
        return np.where(s < self.s0, -self.phi0 / self.s0, 0.0)

    def integral(self, s):
        s = np.asarray(s, dtype=float)
        c = np.minimum(s, self.s0)
        return self.phi0 * (c - c * c / (2 * self.s0))

    def integral_tail(self):
        return [(0.0, self.phi0 * self.s0 / 2)]

    def s_phi_tail(self):
        return []

    @property
    def liminf(self):
        return 0.0

    def positive_everywhere(self):
        return False, 2.0 * self.s0

    def nondecreasing(self):
        ok = self.phi0 <= 0
        return ok, None if ok else 0.5 * self.s0

    def smooth_c2(self):
        ok = self.phi0 == 0
        return ok, None if ok else self.s0

    def params(self):
        return {"phi0": self.phi0, "s0": self.s0}


# ---------------------------------------------------------------------------
# source families (functions of u in R, all with f(0) = 0)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroSource:
    tag = "zero"

    def value(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    def deriv(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    def deriv2(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    def integral(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    growth = 1.0
    degree = 0
    is_odd = True
    mu_f = 0.0
    inf_deriv = 0.0
    deriv2_growth = 0.0
    lower_growth = None

    def is_c2(self):
        return True

    def params(self):
        return {}


@dataclass(frozen=True)
class LinearSource:
    mu: float
    tag = "linear"

    def value(self, u):
        return self.mu * np.asarray(u, dtype=float)

    def deriv(self, u):
        return self.mu + 0.0 * np.asarray(u, dtype=float)

    def deriv2(self, u):
        return np.zeros_like(np.asarray(u, dtype=float))

    def integral(self, u):
        u = np.asarray(u, dtype=float)
        return 0.5 * self.mu * u * u

    growth = 1.0
    degree = 1
    is_odd = True
    deriv2_growth = 0.0
    lower_growth = None

    @property
    def mu_f(self):
        return self.mu

    @property
    def inf_deriv(self):
        return self.mu

    def is_c2(self):
        return True

    def params(self):
        return {"mu": self.mu}


@dataclass(frozen=True)
class OddPowerSource:
    """f(u) = a |u|^(p-1) u + b u."""

    a: float
    p: float
    b: float = 0.0
    tag = "odd_power"

    def __post_init__(self):
        if self.a < 0:
            raise ConfigError(f"odd_power source requires a >= 0, got {self.a}")
        if self.p < 1:
            raise ConfigError(f"odd_power source requires p >= 1, got {self.p}")

    def value(self, u):
        u = np.asarray(u, dtype=float)
        return self.a * np.abs(u) ** (self.p - 1) * u + self.b * u

    def deriv(self, u):
        u = np.asarray(u, dtype=float)
        return self.a * self.p * np.abs(u) ** (self.p - 1) + self.b

    def deriv2(self, u):
        u = np.asarray(u, dtype=float)
        if self.p == 1:
            return np.zeros_like(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.a * self.p * (self.p - 1) * np.abs(u) ** (self.p - 3) * u
        return np.where(u == 0, 0.0, out)

    def integral(self, u):
        u = np.asarray(u, dtype=float)
        return self.a * np.abs(u) ** (self.p + 1) / (self.p + 1) + 0.5 * self.b * u * u

    is_odd = True

    @property
    def growth(self):
        return self.p if self.a > 0 else 1.0

    @property
    def degree(self):
        if self.a == 0 or self.p == 1:
            return 1
        if float(self.p).is_integer() and int(self.p) % 2 == 1:
            return int(self.p)
        return None

    @property
    def mu_f(self):
        if self.a > 0 and self.p > 1:
            return math.inf
        if self.p == 1:
            return self.a + self.b
        return self.b

    @property
    def inf_deriv(self):
        return self.b if self.p > 1 else self.a + self.b

    @property
    def deriv2_growth(self):
        return max(self.p - 2, 0.0) if self.a > 0 else 0.0

    @property
    def lower_growth(self):
        return self.p if self.a > 0 else None

    def is_c2(self):
        return self.a == 0 or self.p == 1 or self.p > 2 or self.degree is not None

    def params(self):
        return {"a": self.a, "p": self.p, "b": self.b}


@dataclass(frozen=True)
class CubicMinusLinearSource:
    """f(u) = a u^3 - b u, the double-well source when a, b > 0."""

    a: float
    b: float
    tag = "cubic_minus_linear"

    def __post_init__(self):
        if self.a < 0:
            raise ConfigError(f"cubic_minus_linear source requires a >= 0, got {self.a}")

    def value(self, u):
        u = np.asarray(u, dtype=float)
        return self.a * (u * u * u) - self.b * u

    def deriv(self, u):
        u = np.asarray(u, dtype=float)
        return 3 * self.a * u * u - self.b

    def deriv2(self, u):
        return 6 * self.a * np.asarray(u, dtype=float)

    def integral(self, u):
        u = np.asarray(u, dtype=float)
        return 0.25 * self.a * u**4 - 0.5 * self.b * u * u

    is_odd = True

    @property
    def growth(self):
        return 3.0 if self.a > 0 else 1.0

    @property
    def degree(self):
        return 3 if self.a > 0 else 1

    @property
    def mu_f(self):
        return math.inf if self.a > 0 else -self.b

    @property
    def inf_deriv(self):
        return -self.b

    @property
    def deriv2_growth(self):
        return 1.0 if self.a > 0 else 0.0

    @property
    def lower_growth(self):
        return 3.0 if self.a > 0 else None

    def is_c2(self):
        return True

    def params(self):
        return {"a": self.a, "b": self.b}


SIGMA_FAMILIES = {"constant": ConstantSigma, "power_affine": PowerAffineSigma}
PHI_FAMILIES = {"constant": ConstantPhi, "power_affine": PowerAffinePhi, "compact_bump": CompactBumpPhi}
SOURCE_FAMILIES = {
    "zero": ZeroSource,
    "linear": LinearSource,
    "odd_power": OddPowerSource,
    "cubic_minus_linear": CubicMinusLinearSource,
}


def _build(families, kind, block):
    if not isinstance(block, dict):
        raise ConfigError(f"{kind}: expected a mapping with a 'family' key")
    block = dict(block)
    tag = block.pop("family", None)
    if tag not in families:
        raise ConfigError(f"{kind}: unknown family {tag!r}; expected one of {sorted(families)}")
    try:
        return families[tag](**{k: float(v) for k, v in block.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{kind}: bad parameters for family {tag!r}: {exc}") from None


@dataclass(frozen=True)
class CoefficientSet:
    """Damping, stiffness, source and forcing for one problem instance.

    ``h`` holds the nonzero modal entries of the forcing as pairs
    ``(mode_number, value)`` with 1-based mode numbers in the eigenvalue
    ordering of the domain.
    """

    sigma: Any
    phi: Any
    f: Any = field(default_factory=ZeroSource)
    h: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "h", tuple((int(k), float(c)) for k, c in self.h))
        for k, _ in self.h:
            if k < 1:
                raise ConfigError(f"forcing mode numbers are 1-based, got {k}")
        grid = np.concatenate([[0.0], np.logspace(-8, 8, _POSITIVITY_GRID)])
        vals = self.sigma.value(grid)
        if not np.all(vals > 0):
            bad = grid[np.argmin(vals)]
            raise ConfigError(f"damping must be positive; sigma({bad:g}) <= 0")

    def h_vector(self, n_modes: int) -> np.ndarray:
        out = np.zeros(n_modes)
        for k, c in self.h:
            if k > n_modes:
                raise ConfigError(f"forcing mode {k} exceeds the {n_modes} available modes")
            out[k - 1] += c
        return out

    def to_dict(self) -> dict:
        return {
            "sigma": {"family": self.sigma.tag, **self.sigma.params()},
            "phi": {"family": self.phi.tag, **self.phi.params()},
            "f": {"family": self.f.tag, **self.f.params()},
            "h": {str(k): c for k, c in self.h},
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CoefficientSet":
        unknown = set(data) - {"sigma", "phi", "f", "h"}
        if unknown:
            raise ConfigError(f"coefficients: unknown keys {sorted(unknown)}")
        for key in ("sigma", "phi"):
            if key not in data:
                raise ConfigError(f"coefficients: missing block {key!r}")
        h = data.get("h") or {}
        return cls(
            sigma=_build(SIGMA_FAMILIES, "sigma", data["sigma"]),
            phi=_build(PHI_FAMILIES, "phi", data["phi"]),
            f=_build(SOURCE_FAMILIES, "f", data.get("f", {"family": "zero"})),
            h=tuple(sorted((int(k), float(v)) for k, v in h.items())),
        )


# ---------------------------------------------------------------------------
# evaluation helpers with domain checking
# ---------------------------------------------------------------------------


def _nonneg(s):
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0):
        raise DomainError(f"argument must be nonnegative, got min {arr.min():g}")
    return arr


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def eval_sigma(coeffs: CoefficientSet, s):
    return _scalar(coeffs.sigma.value(_nonneg(s)))


def eval_Sigma(coeffs: CoefficientSet, s):
    return _scalar(coeffs.sigma.integral(_nonneg(s)))


def eval_phi(coeffs: CoefficientSet, s):
    return _scalar(coeffs.phi.value(_nonneg(s)))


def eval_Phi(coeffs: CoefficientSet, s):
    return _scalar(coeffs.phi.integral(_nonneg(s)))


def eval_f(coeffs: CoefficientSet, u):
    return _scalar(coeffs.f.value(u))


def eval_fprime(coeffs: CoefficientSet, u):
    return _scalar(coeffs.f.deriv(u))


def eval_F(coeffs: CoefficientSet, u):
    return _scalar(coeffs.f.integral(u))


# ---------------------------------------------------------------------------
# hypothesis checks
# ---------------------------------------------------------------------------

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


@dataclass(frozen=True)
class Verdict:
    status: str
    witness: Any = None
    note: str = ""

    def to_dict(self):
        return {"status": self.status, "witness": self.witness, "note": self.note}


@dataclass(frozen=True)
class AssumptionReport:
    """Outcome of :func:`check_assumptions`.

    ``verdicts`` maps a check name (``"A1(i)"``, ``"A1(ii)"``, ``"A:dis"``,
    ``"A-super(i)"``, ``"A-super(ii)"``, ``"A3-crit(a)"``, ``"A3-crit(b)"``,
    ``"A3-crit"``, ``"f-coercive-relaxed"``) to a :class:`Verdict`.
    """

    verdicts: dict
    eta0: float | None
    c1: float | None
    c2: float | None
    mu_f: float
    mu_hat_phi: float
    criticality: str
    d: int
    p: float
    p_star: float
    p_star_star: float
    lambda1: float | None
    warnings: tuple = ()

    def passes(self, *names: str) -> bool:
        return all(self.verdicts[n].status == PASS for n in names)

    def failed(self, *names: str) -> list:
        return [n for n in names if self.verdicts[n].status != PASS]

    def to_dict(self) -> dict:
        def num(x):
            if x is None:
                return None
            if math.isinf(x):
                return "inf" if x > 0 else "-inf"
            return x

        return {
            "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()},
            "eta0": num(self.eta0),
            "c1": num(self.c1),
            "c2": num(self.c2),
            "mu_f": num(self.mu_f),
            "mu_hat_phi": num(self.mu_hat_phi),
            "criticality": self.criticality,
            "d": self.d,
            "p": self.p,
            "p_star": num(self.p_star),
            "p_star_star": num(self.p_star_star),
            "lambda1": self.lambda1,
            "warnings": list(self.warnings),
        }


def critical_exponents(d: int) -> tuple[float, float]:
    """Return (p*, p**) = ((d+2)/(d-2), (d+4)/(d-4)_+), infinite where undefined."""
    p_star = math.inf if d <= 2 else (d + 2) / (d - 2)
    p_star_star = math.inf if d <= 4 else (d + 4) / (d - 4)
    return p_star, p_star_star


def criticality_class(p: float, d: int) -> str:
    p_star, _ = critical_exponents(d)
    if d <= 2 or p < p_star:
        return "subcritical"
    if p == p_star:
        return "critical"
    return "supercritical"


def coercivity_eta0(sigma, phi):
    """Smallest convenient eta0 making Phi + eta0*Sigma tend to +infinity.

    Returns ``None`` when no finite eta works.  When Phi is itself coercive the
    answer is 0.  When both grow at the same leading power the threshold
    ``-c_Phi/c_Sigma`` is doubled so that the combined leading coefficient is
    strictly positive.
    """
    phi_tail = phi.integral_tail()
    if _tends_to_infinity(phi_tail):
        return 0.0
    p_sig, c_sig = _leading(sigma.integral_tail())
    lead_phi = _leading(phi_tail)
    if lead_phi is None or lead_phi[0] < p_sig:
        return 1.0
    if lead_phi[0] == p_sig:
        return 2.0 * (-lead_phi[1] / c_sig)
    return None


def _c1_lower_bound(sigma, phi):
    sphi = phi.s_phi_tail()
    if _bounded_below(sphi):
        return 0.0
    p_sig, c_sig = _leading(sigma.integral_tail())
    lead = _leading(sphi)
    if lead[0] < p_sig:
        return 1.0
    if lead[0] == p_sig:
        c1 = -lead[1] / c_sig
        if _bounded_below(sphi + [(p, c1 * c) for p, c in sigma.integral_tail()]):
            return c1
        return 2.0 * c1
    return None


def _scan_grid(s_max):
    return np.concatenate([[0.0], np.logspace(-8, math.log10(s_max), _POSITIVITY_GRID)])


def check_assumptions(coeffs: CoefficientSet, d: int, s_max: float = 1e4, lambda1: float | None = None) -> AssumptionReport:
    """Evaluate every structural hypothesis for the coefficient triple.

    Parameters
    ----------
    coeffs : CoefficientSet
    d : int
        Spatial dimension.  Criticality thresholds are computed for any d.
    s_max : float
        Upper end of the log-spaced positivity scan.
    lambda1 : float, optional
        First Dirichlet eigenvalue; needed only when a verdict depends on it.

    Returns
    -------
    AssumptionReport
        Verdicts are pass, fail or inconclusive; this function never raises
        on a failed hypothesis.
    """
    if not s_max > 0:
        raise DomainError("s_max must be positive")
    sigma, phi, f = coeffs.sigma, coeffs.phi, coeffs.f
    grid = _scan_grid(s_max)
    verdicts: dict[str, Verdict] = {}
    warnings: list[str] = []

    # A1(i): sigma > 0 plus two coercivity bounds on phi relative to sigma
    sig_vals = sigma.value(grid)
    eta0 = coercivity_eta0(sigma, phi)
    c1 = _c1_lower_bound(sigma, phi)
    c2 = None
    if not np.all(sig_vals > 0):
        verdicts["A1(i)"] = Verdict(FAIL, float(grid[np.argmin(sig_vals)]), "sigma(s) <= 0")
    elif eta0 is None:
        verdicts["A1(i)"] = Verdict(FAIL, "int_0^s [phi + eta sigma] -> -inf for every eta",
                                    "stiffness integral dominates the damping integral")
    elif c1 is None:
        verdicts["A1(i)"] = Verdict(FAIL, "s phi(s) + c1 Sigma(s) -> -inf for every c1",
                                    "s phi(s) unbounded below faster than Sigma")
    else:
        g = grid * phi.value(grid) + c1 * sigma.integral(grid)
        c2 = float(max(0.0, -g.min()))
        verdicts["A1(i)"] = Verdict(PASS, None, f"eta0={eta0:g}, c1={c1:g}, c2={c2:g}")

    # A1(ii): f(0) = 0 and mu_f > -inf; growth class
    mu_f = f.mu_f
    p = float(f.growth)
    p_star, p_star_star = critical_exponents(d)
    crit = criticality_class(p, d)
    if crit == "supercritical":
        if p >= p_star_star:
            warnings.append(f"p={p:g} >= p**={p_star_star:g}: outside the supercritical range")
        if f.lower_growth is None or f.lower_growth < p:
            warnings.append("supercritical growth without the matching lower bound on f'")
    if float(f.value(0.0)) != 0.0:
        verdicts["A1(ii)"] = Verdict(FAIL, 0.0, "f(0) != 0")
    elif mu_f == -math.inf:
        verdicts["A1(ii)"] = Verdict(FAIL, "u -> inf", "liminf f(u)/u = -inf")
    else:
        verdicts["A1(ii)"] = Verdict(PASS, None, f"mu_f={mu_f:g}, class={crit}")
    verdicts["f-coercive-relaxed"] = Verdict(INCONCLUSIVE, None, "not evaluated")

    # A:dis: lambda1 mu_hat_phi + mu_f > 0, or s phi(s) -> inf with mu_f > 0
    mu_hat = phi.liminf
    cond_phi_s = _tends_to_infinity(phi.s_phi_tail())
    if mu_hat == math.inf:
        cond_gap = mu_f > -math.inf
        note_gap = "mu_hat_phi = inf"
    elif mu_hat > 0:
        if mu_f == math.inf:
            cond_gap, note_gap = True, "mu_f = inf"
        elif lambda1 is None:
            cond_gap, note_gap = None, "lambda1 not supplied"
        else:
            cond_gap = mu_hat * lambda1 + mu_f > 0
            note_gap = f"mu_hat*lambda1 + mu_f = {mu_hat * lambda1 + mu_f:g}"
    else:
        cond_gap, note_gap = False, f"mu_hat_phi = {mu_hat:g} <= 0"
    if cond_gap or (cond_phi_s and mu_f > 0):
        verdicts["A:dis"] = Verdict(PASS, None, note_gap if cond_gap else "phi(s) s -> inf and mu_f > 0")
    elif cond_gap is None and not (cond_phi_s and mu_f > 0):
        verdicts["A:dis"] = Verdict(INCONCLUSIVE, None, note_gap)
    else:
        if not cond_phi_s:
            lead = _leading(phi.s_phi_tail())
            witness = "phi(s) s = 0 for large s" if lead is None else \
                f"phi(s) s ~ {lead[1]:g} s^{lead[0]:g} does not tend to +inf"
        else:
            witness = f"mu_f = {mu_f:g} <= 0"
        verdicts["A:dis"] = Verdict(FAIL, witness, note_gap)

    # A-super
    pos_analytic, pos_witness = phi.positive_everywhere()
    phi_vals = phi.value(grid)
    if not pos_analytic:
        verdicts["A-super(i)"] = Verdict(FAIL, pos_witness, "phi(s) <= 0 at the witness")
    elif not np.all(phi_vals > 0):
        verdicts["A-super(i)"] = Verdict(FAIL, float(grid[np.argmin(phi_vals)]), "phi(s) <= 0 on the scan grid")
    else:
        verdicts["A-super(i)"] = Verdict(PASS)
    if crit == "supercritical" or mu_hat == math.inf:
        verdicts["A-super(ii)"] = Verdict(PASS, None, "automatic")
    elif mu_f == math.inf and mu_hat > -math.inf:
        verdicts["A-super(ii)"] = Verdict(PASS, None, "mu_f = inf")
    elif lambda1 is None:
        verdicts["A-super(ii)"] = Verdict(INCONCLUSIVE, None, "lambda1 not supplied")
    else:
        val = lambda1 * mu_hat + mu_f
        verdicts["A-super(ii)"] = Verdict(PASS if val > 0 else FAIL, None if val > 0 else val,
                                          f"lambda1*mu_hat_phi + mu_f = {val:g}")

    # A3-crit
    mono, mono_w = phi.nondecreasing()
    c2_ok, c2_w = phi.smooth_c2()
    fprime_ok = f.inf_deriv > -math.inf
    common = []
    if not mono:
        common.append(("phi decreasing", mono_w))
    if not c2_ok:
        common.append(("phi not C^2", c2_w))
    if not fprime_ok:
        common.append(("inf f' = -inf", None))
    if common:
        for key in ("A3-crit(a)", "A3-crit(b)"):
            verdicts[key] = Verdict(FAIL, common[0][1], common[0][0])
    else:
        if d <= 2 or p < p_star:
            verdicts["A3-crit(a)"] = Verdict(PASS, None, "subcritical")
        else:
            verdicts["A3-crit(a)"] = Verdict(FAIL, p, f"p={p:g} >= p*={p_star:g}")
        if not 3 <= d <= 6:
            verdicts["A3-crit(b)"] = Verdict(FAIL, d, "requires 3 <= d <= 6")
        elif not f.is_c2():
            verdicts["A3-crit(b)"] = Verdict(FAIL, 0.0, "f not C^2")
        elif f.deriv2_growth > p_star - 2:
            verdicts["A3-crit(b)"] = Verdict(FAIL, f.deriv2_growth, f"|f''| grows faster than |u|^{p_star - 2:g}")
        else:
            verdicts["A3-crit(b)"] = Verdict(PASS, None, "critical growth bound on f''")
    either = verdicts["A3-crit(a)"].status == PASS or verdicts["A3-crit(b)"].status == PASS
    verdicts["A3-crit"] = Verdict(PASS if either else FAIL, None if either else verdicts["A3-crit(a)"].witness)

    return AssumptionReport(
        verdicts=verdicts, eta0=eta0, c1=c1, c2=c2, mu_f=mu_f, mu_hat_phi=mu_hat,
        criticality=crit, d=d, p=p, p_star=p_star, p_star_star=p_star_star,
        lambda1=lambda1, warnings=tuple(warnings),
    )
