"""Stationary states: phi(|grad u|^2) A u + f(u) = h.

The stationary residual is the gradient of the static energy
``Phi(S)/2 + int F(u) - (h, u)``, so equilibria are its critical points.
They are found with a damped Newton iteration whose Jacobian is

    phi(S) Lambda + J_f(u) + 2 phi'(S) (Lambda u)(Lambda u)^T.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError


@dataclass
class EquilibriumResult:
    u: np.ndarray
    residual: float
    iterations: int
    converged: bool
    S: float
    min_eig: float | None = None
    max_eig: float | None = None

    def to_dict(self) -> dict:
        return {
            "u": [float(x) for x in self.u],
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "S": self.S,
            "min_eig": self.min_eig,
            "max_eig": self.max_eig,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EquilibriumResult":
        return cls(np.array(data["u"], dtype=float), float(data["residual"]), int(data["iterations"]),
                   bool(data["converged"]), float(data["S"]), data.get("min_eig"), data.get("max_eig"))


def stationary_residual(basis, u, coeffs) -> np.ndarray:
    """r = phi(S) K u + f(u) - h with S = |grad u|^2."""
    u = np.asarray(u, dtype=float)
    s = basis.grad_sq(u)
    return float(coeffs.phi.value(s)) * basis.apply_K(u) + basis.force(coeffs.f, u) - basis.h_vector(coeffs)


def _jacobian_parts(basis, u, coeffs):
    s = basis.grad_sq(u)
    ku = basis.apply_K(u)
    a = 2.0 * float(coeffs.phi.deriv(s)) * ku
    b = basis.weight * ku
    return float(coeffs.phi.value(s)), a, b


def linearization(basis, u, coeffs) -> np.ndarray:
    """Dense Jacobian of :func:`stationary_residual` at ``u``."""
    phi, a, b = _jacobian_parts(basis, u, coeffs)
    return basis.dense_matrix(0.0, phi, 1.0, coeffs.f, u, a, b)


def default_tolerance(basis, coeffs) -> float:
    return 1e-11 * (1.0 + math.sqrt(basis.l2_sq(basis.h_vector(coeffs))))


def solve_equilibrium(basis, guess, coeffs, tol: float | None = None, max_iters: int = 50,
                      spectrum: bool = True) -> EquilibriumResult:
    """Damped Newton iteration for the stationary equation.

    Each step halves the Newton increment (at most 30 times) until the
    residual norm decreases.  A Jacobian that cannot be factorised raises
    :class:`NumericalError` with its condition number; running out of
    iterations returns ``converged=False`` with the best iterate.
    """
    tol = default_tolerance(basis, coeffs) if tol is None else tol
    if not tol > 0:
        raise ValueError("tol must be positive")
    u = np.array(guess, dtype=float)
    r = stationary_residual(basis, u, coeffs)
    rn = math.sqrt(basis.l2_sq(r))
    best = (rn, u.copy())
    it = 0
    while rn > tol and it < max_iters:
        phi, a, b = _jacobian_parts(basis, u, coeffs)
        try:
            delta = basis.solve(0.0, phi, 1.0, coeffs.f, u, -r, a, b)
            if not np.all(np.isfinite(delta)):
                raise np.linalg.LinAlgError("non-finite Newton increment")
        except np.linalg.LinAlgError:
            cond = np.linalg.cond(linearization(basis, u, coeffs))
            raise NumericalError(f"singular stationary Jacobian at iteration {it} (condition number {cond:.3e})") from None
        it += 1
        lam = 1.0
        for _ in range(31):
            trial = u + lam * delta
            rt = stationary_residual(basis, trial, coeffs)
            rtn = math.sqrt(basis.l2_sq(rt))
            if rtn < rn:
                break
            lam *= 0.5
        else:
            break
        u, r, rn = trial, rt, rtn
        if rn < best[0]:
            best = (rn, u.copy())
    rn, u = best
    result = EquilibriumResult(u, rn, it, rn <= tol, basis.grad_sq(u))
    if spectrum:
        jac = linearization(basis, u, coeffs)
        eig = np.linalg.eigvalsh(0.5 * (jac + jac.T))
        result.min_eig, result.max_eig = float(eig[0]), float(eig[-1])
    return result


class EquilibriumLibrary:
    """Append-only collection of distinct converged equilibria."""

    def __init__(self, basis, coeffs, dedup: float = 1e-8):
        self.basis = basis
        self.coeffs = coeffs
        self.dedup = dedup
        self.members: list[EquilibriumResult] = []

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def add(self, result: EquilibriumResult) -> bool:
        """Insert ``result`` if converged and new; return whether it was inserted."""
        if not result.converged:
            return False
        for m in self.members:
            if math.sqrt(self.basis.l2_sq(m.u - result.u)) < self.dedup:
                return False
        self.members.append(result)
        return True

    def solve_from(self, guess, tol=None, max_iters=50) -> EquilibriumResult:
        res = solve_equilibrium(self.basis, guess, self.coeffs, tol, max_iters)
        self.add(res)
        return res

    def multistart(self, scales=(0.5, 1.0, 2.0), extra=()):
        """Seed from zero, +-scaled first mode and any extra guesses."""
        n = self.basis.n
        e1 = np.zeros(n)
        e1[0] = 1.0
        guesses = [np.zeros(n)] + [s * e1 for s in scales] + [-s * e1 for s in scales] + list(extra)
        for g in guesses:
            try:
                self.solve_from(g)
            except NumericalError:
                continue
        return self

    def close_under_negation(self):
        """For odd f and h = 0, add -u* for every member u*."""
        for m in list(self.members):
            neg = solve_equilibrium(self.basis, -m.u, self.coeffs)
            self.add(neg)
        return self

    def to_json(self) -> str:
        return json.dumps([m.to_dict() for m in self.members], indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str, basis, coeffs) -> "EquilibriumLibrary":
        lib = cls(basis, coeffs)
        lib.members = [EquilibriumResult.from_dict(d) for d in json.loads(text)]
        return lib


@dataclass
class DistanceSeries:
    t: np.ndarray
    distance: np.ndarray
    nearest: np.ndarray
    monotone_tail: bool


def distance_to_equilibria(basis, traj, library) -> DistanceSeries:
    """min over the library of |grad(u(t) - u*)|^2 + |u_t(t)|^2 at each sample."""
    members = list(library)
    if not members:
        raise ValueError("equilibrium library is empty")
    stars = np.array([m.u for m in members])
    lam = basis.lam
    kin = np.sum(traj.v * traj.v, axis=1)
    d = np.stack([np.sum(lam * (traj.u - s) ** 2, axis=1) for s in stars], axis=1) + kin[:, None]
    nearest = np.argmin(d, axis=1)
    dist = d[np.arange(len(d)), nearest]
    tail = dist[len(dist) - max(2, len(dist) // 4):]
    monotone = bool(np.all(np.diff(tail) <= 1e-14 * (1 + tail[:-1])))
    return DistanceSeries(traj.t.copy(), dist, nearest, monotone)
