"""Time integration of the truncated Kirchhoff system.

Each mode obeys

    u_k'' + sigma(S) lam_k u_k' + phi(S) lam_k u_k + f(u)_k = h_k,
    S = sum_j lam_j u_j**2,

so all modes are coupled through the single scalar S and through the
pseudospectral source.  The default scheme is the implicit trapezoidal rule
solved by Newton's method with the exact Jacobian; the nonlocal
coefficients contribute one rank-one term which is handled with a
Sherman-Morrison update.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .energetics import EnergyLedger
from .errors import ConfigError, SequencingError, StepFailure

logger = logging.getLogger(__name__)

SCHEMES = ("trapezoidal", "frozen")


@dataclass(frozen=True)
class ModalState:
    t: float
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if u.shape != v.shape or u.ndim != 1:
            raise ConfigError(f"u and v must be 1-D arrays of equal length, got {u.shape} and {v.shape}")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise ConfigError("state contains non-finite entries")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    def __neg__(self):
        return ModalState(self.t, -self.u, -self.v)


@dataclass(frozen=True)
class StepperConfig:
    """Time step, scheme name and Newton controls.

    ``scheme`` is ``"trapezoidal"`` (fully coupled, second order) or
    ``"frozen"`` (nonlocal coefficients and source taken at the old state,
    first order).
    """

    dt: float = 1e-2
    scheme: str = "trapezoidal"
    newton_tol: float = 1e-11
    newton_max_iters: int = 25
    dealias: float = 2.0
    max_halvings: int = 5

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if not self.newton_tol > 0:
            raise ConfigError("newton_tol must be positive")
        if self.newton_max_iters < 1:
            raise ConfigError("newton_max_iters must be at least 1")

    def to_dict(self):
        return {
            "dt": self.dt, "scheme": self.scheme, "newton_tol": self.newton_tol,
            "newton_max_iters": self.newton_max_iters, "dealias": self.dealias,
            "max_halvings": self.max_halvings,
        }


@dataclass
class NewtonStats:
    steps: int = 0
    iterations: int = 0
    max_iterations: int = 0
    halvings: int = 0

    def to_dict(self):
        return {"steps": self.steps, "iterations": self.iterations,
                "max_iterations": self.max_iterations, "halvings": self.halvings}


def acceleration(basis, u, v, coeffs, h=None) -> np.ndarray:
    """Right-hand side g(u, v) = -sigma(S) K v - phi(S) K u - f(u) + h."""
    if h is None:
        h = basis.h_vector(coeffs)
    s = basis.grad_sq(u)
    return (-float(coeffs.sigma.value(s)) * basis.apply_K(v)
            - float(coeffs.phi.value(s)) * basis.apply_K(u)
            - basis.force(coeffs.f, u) + h)


def _trapezoidal(basis, coeffs, h, u, v, dt, cfg):
    g0 = acceleration(basis, u, v, coeffs, h)
    v1 = v + dt * g0
    half = 0.5 * dt
    vmax = np.max(np.abs(v), initial=0.0)
    res = math.inf
    for it in range(cfg.newton_max_iters + 1):
        u1 = u + half * (v + v1)
        s1 = basis.grad_sq(u1)
        sig, phi = float(coeffs.sigma.value(s1)), float(coeffs.phi.value(s1))
        ku, kv = basis.apply_K(u1), basis.apply_K(v1)
        g1 = -sig * kv - phi * ku - basis.force(coeffs.f, u1) + h
        r = v1 - v - half * (g0 + g1)
        res = np.max(np.abs(r)) / (1.0 + vmax + np.max(np.abs(v1)))
        if res <= cfg.newton_tol:
            return u1, v1, it
        if it == cfg.newton_max_iters or not np.isfinite(res):
            break
        a = half * half * (float(coeffs.sigma.deriv(s1)) * kv + float(coeffs.phi.deriv(s1)) * ku)
        b = 2.0 * basis.weight * ku
        try:
            delta = basis.solve(1.0, half * sig + half * half * phi, half * half, coeffs.f, u1, -r, a, b)
        except np.linalg.LinAlgError as exc:
            raise StepFailure(f"singular Newton matrix: {exc}", res, it) from None
        v1 = v1 + delta
    raise StepFailure(f"Newton did not converge in {cfg.newton_max_iters} iterations (residual {res:.3e})",
                      float(res), cfg.newton_max_iters)


def _frozen(basis, coeffs, h, u, v, dt):
    half = 0.5 * dt
    s0 = basis.grad_sq(u)
    sig, phi = float(coeffs.sigma.value(s0)), float(coeffs.phi.value(s0))
    f0 = basis.force(coeffs.f, u)
    g0 = -sig * basis.apply_K(v) - phi * basis.apply_K(u) - f0 + h
    rhs = v + half * g0 + half * (-phi * basis.apply_K(u + half * v) - f0 + h)
    v1 = basis.solve(1.0, half * sig + half * half * phi, 0.0, coeffs.f, u, rhs)
    return u + half * (v + v1), v1, 1


def _advance(basis, coeffs, h, u, v, dt, cfg, stats, depth=0):
    try:
        if cfg.scheme == "frozen":
            u1, v1, its = _frozen(basis, coeffs, h, u, v, dt)
        else:
            u1, v1, its = _trapezoidal(basis, coeffs, h, u, v, dt, cfg)
    except StepFailure:
        if depth >= cfg.max_halvings:
            raise
        stats.halvings += 1
        logger.debug("step failure at dt=%g, halving (depth %d)", dt, depth + 1)
        um, vm = _advance(basis, coeffs, h, u, v, 0.5 * dt, cfg, stats, depth + 1)
        return _advance(basis, coeffs, h, um, vm, 0.5 * dt, cfg, stats, depth + 1)
    stats.steps += 1
    stats.iterations += its
    stats.max_iterations = max(stats.max_iterations, its)
    return u1, v1


def step(basis, state: ModalState, coeffs, cfg: StepperConfig, stats: NewtonStats | None = None) -> ModalState:
    """Advance ``state`` by one step of size ``cfg.dt``.

    A Newton failure is retried by splitting the step into two halves, up
    to ``cfg.max_halvings`` levels; beyond that :class:`StepFailure`
    propagates.
    """
    stats = NewtonStats() if stats is None else stats
    h = basis.h_vector(coeffs)
    u1, v1 = _advance(basis, coeffs, h, state.u, state.v, cfg.dt, cfg, stats)
    return ModalState(state.t + cfg.dt, u1, v1)


@dataclass
class Trajectory:
    """Sampled states plus the per-step energy ledger."""

    t: np.ndarray
    u: np.ndarray
    v: np.ndarray
    ledger: EnergyLedger
    stats: NewtonStats = field(default_factory=NewtonStats)
    dt: float = float("nan")

    def __len__(self):
        return len(self.t)

    def state(self, i: int) -> ModalState:
        return ModalState(float(self.t[i]), self.u[i], self.v[i])

    @property
    def final(self) -> ModalState:
        return self.state(-1)


def simulate(basis, ic: ModalState, T: float, coeffs, cfg: StepperConfig, stride: int = 1) -> Trajectory:
    """Integrate from ``ic`` over ``[ic.t, ic.t + T]`` on the uniform grid of ``cfg.dt``.

    The ledger is updated every step; states are stored every ``stride``
    steps and at the final time.
    """
    if not T > 0:
        raise ConfigError(f"horizon T must be positive, got {T}")
    n_steps = int(round(T / cfg.dt))
    if n_steps < 1 or abs(n_steps * cfg.dt - T) > 1e-9 * max(T, 1.0):
        raise ConfigError(f"T={T} is not an integer multiple of dt={cfg.dt}")
    if len(ic.u) != basis.n:
        raise ConfigError(f"initial state has {len(ic.u)} entries, discretisation has {basis.n}")
    stride = max(1, int(stride))
    h = basis.h_vector(coeffs)
    stats = NewtonStats()
    ledger = EnergyLedger(basis, coeffs)
    ledger.append(ic.t, ic.u, ic.v)
    ts, us, vs = [ic.t], [ic.u], [ic.v]
    u, v = ic.u, ic.v
    for i in range(1, n_steps + 1):
        u, v = _advance(basis, coeffs, h, u, v, cfg.dt, cfg, stats)
        t = ic.t + i * cfg.dt
        ledger.append(t, u, v)
        if i % stride == 0 or i == n_steps:
            ts.append(t)
            us.append(u)
            vs.append(v)
    return Trajectory(np.array(ts), np.array(us), np.array(vs), ledger, stats, cfg.dt)


@dataclass
class DifferenceSeries:
    """Norms of z = u1 - u2 along two trajectories sampled at the same times."""

    t: np.ndarray
    zt_neg1: np.ndarray
    grad_z: np.ndarray
    zt_l2: np.ndarray
    z_l2: np.ndarray
    int_zt_l2: np.ndarray
    int_source: np.ndarray | None = None

    @property
    def energy_sq(self) -> np.ndarray:
        """|z_t|^2 + |grad z|^2."""
        return self.zt_l2 + self.grad_z

    @property
    def weak_sq(self) -> np.ndarray:
        """|z_t|_{-1}^2 + |grad z|^2."""
        return self.zt_neg1 + self.grad_z

    def as_dict(self):
        keys = ("t", "zt_neg1", "grad_z", "zt_l2", "z_l2", "int_zt_l2", "int_source")
        return {k: getattr(self, k) for k in keys if getattr(self, k) is not None}


def cumulative_trapezoid(y, t) -> np.ndarray:
    y, t = np.asarray(y, dtype=float), np.asarray(t, dtype=float)
    out = np.zeros_like(y)
    if len(y) > 1:
        out[1:] = np.cumsum(0.5 * np.diff(t) * (y[1:] + y[:-1]))
    return out


def _source_gap(basis, u1, u2, p):
    """int |z|^{p+1} + int (|u1|^{p-1} + |u2|^{p-1}) |z|^2 on the collocation grid."""
    tr = basis.transform
    a, b = tr.synthesize(u1), tr.synthesize(u2)
    z = np.abs(a - b)
    return tr.integrate(z ** (p + 1) + (np.abs(a) ** (p - 1) + np.abs(b) ** (p - 1)) * z * z)


def difference_metrics(basis, traj1: Trajectory, traj2: Trajectory, p: float | None = None) -> DifferenceSeries:
    """Norms of the difference of two trajectories.

    With a source exponent ``p`` the running time integral of the
    source-difference term (see :func:`_source_gap`) is recorded as
    ``int_source``; no bound is attached to it.
    """
    if len(traj1.t) != len(traj2.t) or not np.array_equal(traj1.t, traj2.t):
        raise SequencingError("trajectories are not sampled at the same times")
    z = traj1.u - traj2.u
    zt = traj1.v - traj2.v
    lam = getattr(basis, "lam", None)
    if lam is None:
        raise ConfigError("difference_metrics needs a modal basis")
    zt_l2 = np.sum(zt * zt, axis=1)
    source = None
    if p is not None:
        if not p >= 1:
            raise ConfigError(f"source exponent must be at least 1, got {p}")
        gaps = np.array([_source_gap(basis, a, b, p) for a, b in zip(traj1.u, traj2.u)])
        source = cumulative_trapezoid(gaps, traj1.t)
    return DifferenceSeries(
        t=traj1.t.copy(),
        zt_neg1=np.sum(zt * zt / lam, axis=1),
        grad_z=np.sum(lam * z * z, axis=1),
        zt_l2=zt_l2,
        z_l2=np.sum(z * z, axis=1),
        int_zt_l2=cumulative_trapezoid(zt_l2, traj1.t),
        int_source=source,
    )
