"""Finite-difference reference solver on a uniform 1-D grid.

Second-order centred differences in space, the same implicit trapezoidal
time stepping as the spectral solver (:func:`kirchhoff.dynamics.simulate`
is reused verbatim).  Grid states are vectors of nodal values at the M
interior points; the discrete Dirichlet form ``dx * u^T K u`` plays the
role of |grad u|^2.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg as sla

from .dynamics import ModalState, StepperConfig, Trajectory, simulate
from .errors import ConfigError
from .spectral import Domain, Transform, sherman_morrison


class FDGrid:
    """Interval (0, L) with M interior nodes and spacing L/(M+1)."""

    def __init__(self, length: float, m: int):
        if m < 16:
            raise ConfigError(f"the finite-difference oracle needs M >= 16, got {m}")
        if not length > 0:
            raise ConfigError("length must be positive")
        self.length = float(length)
        self.m = int(m)
        self.n = self.m
        self.dim = 1
        self.dx = self.length / (self.m + 1)
        self.weight = self.dx
        self.x = np.arange(1, self.m + 1) * self.dx
        self._inv_dx2 = 1.0 / self.dx**2

    def __repr__(self):
        return f"FDGrid(length={self.length}, m={self.m})"

    def apply_K(self, u) -> np.ndarray:
        """(-1, 2, -1)/dx^2 with homogeneous Dirichlet rows."""
        out = 2.0 * u
        out[1:] -= u[:-1]
        out[:-1] -= u[1:]
        return out * self._inv_dx2

    def inner(self, a, b) -> float:
        return float(self.dx * np.dot(a, b))

    def l2_sq(self, v) -> float:
        return float(self.dx * np.dot(v, v))

    def grad_sq(self, u) -> float:
        du = np.diff(np.concatenate([[0.0], u, [0.0]]))
        return float(np.dot(du, du) / self.dx)

    def h_vector(self, coeffs) -> np.ndarray:
        """Forcing sampled at the nodes from its sine-mode entries."""
        out = np.zeros(self.m)
        for k, c in coeffs.h:
            out += c * math.sqrt(2.0 / self.length) * np.sin(k * math.pi * self.x / self.length)
        return out

    def force(self, f, u) -> np.ndarray:
        return f.value(u)

    def force_jacobian(self, f, u) -> np.ndarray:
        return f.deriv(u)

    def integral_F(self, f, u) -> float:
        return float(self.dx * np.sum(f.integral(u)))

    def lp_norm(self, u, p: float) -> float:
        return float((self.dx * np.sum(np.abs(u) ** p)) ** (1.0 / p))

    def solve(self, c_id, c_k, c_f, f, u, rhs, a=None, b=None):
        """Tridiagonal solve of ``(c_id I + c_k K + c_f diag f'(u) + a b^T) x = rhs``."""
        diag = c_id + 2.0 * c_k * self._inv_dx2 + (c_f * f.deriv(u) if c_f != 0 else 0.0)
        off = -c_k * self._inv_dx2
        ab = np.zeros((3, self.m))
        ab[0, 1:] = off
        ab[1, :] = diag
        ab[2, :-1] = off
        solve_base = lambda r: sla.solve_banded((1, 1), ab, r, check_finite=False)
        return sherman_morrison(solve_base, rhs, a, b)

    def dense_matrix(self, c_id, c_k, c_f, f, u, a=None, b=None) -> np.ndarray:
        mat = np.diag(c_id + 2.0 * c_k * self._inv_dx2 + c_f * f.deriv(u))
        idx = np.arange(self.m - 1)
        mat[idx, idx + 1] = mat[idx + 1, idx] = -c_k * self._inv_dx2
        if a is not None:
            mat = mat + np.outer(a, b)
        return mat

    # transfer between nodal and modal representations
    def from_modes(self, coeffs_modal) -> np.ndarray:
        """Nodal values of a sine series given in the orthonormal basis."""
        c = np.asarray(coeffs_modal, dtype=float)
        k = np.arange(1, len(c) + 1)
        return math.sqrt(2.0 / self.length) * np.sin(np.outer(self.x, k) * math.pi / self.length) @ c

    def to_modes(self, nodal, n_modes: int) -> np.ndarray:
        """First ``n_modes`` discrete sine coefficients (exact inverse of :meth:`from_modes`)."""
        return Transform(Domain.interval(self.length, n_modes), self.m).analyze(nodal)

    def eigenvalues(self, n_modes: int) -> np.ndarray:
        """Exact eigenvalues of K: (4/dx^2) sin^2(k pi dx / (2 L))."""
        k = np.arange(1, n_modes + 1)
        return 4.0 * self._inv_dx2 * np.sin(k * math.pi * self.dx / (2 * self.length)) ** 2


def simulate_fd(grid: FDGrid, ic: ModalState, coeffs, cfg: StepperConfig, T: float, stride: int = 1) -> Trajectory:
    """Integrate the nodal system with the shared trapezoidal stepper."""
    if len(ic.u) != grid.m:
        raise ConfigError(f"initial state has {len(ic.u)} nodes, grid has {grid.m}")
    return simulate(grid, ic, T, coeffs, cfg, stride)


def fd_state_from_modes(grid: FDGrid, state: ModalState) -> ModalState:
    return ModalState(state.t, grid.from_modes(state.u), grid.from_modes(state.v))


def _modal_energy_gap(lam, u1, v1, u2, v2) -> float:
    """max over samples of sqrt(|grad(u1 - u2)|^2 + |v1 - v2|^2); shorter vectors are zero-padded."""
    n = max(u1.shape[1], u2.shape[1])
    pad = lambda a: np.pad(a, ((0, 0), (0, n - a.shape[1])))
    du, dv = pad(u1) - pad(u2), pad(v1) - pad(v2)
    return float(np.max(np.sqrt(np.sum(lam[:n] * du * du, axis=1) + np.sum(dv * dv, axis=1))))


def cross_method_gap(length: float, n_modes: int, m: int, ic: ModalState, coeffs, cfg: StepperConfig,
                     T: float, stride: int = 1) -> dict:
    """Compare the spectral solution with N modes against the grid solution with M nodes.

    Both solutions are reduced to their first N sine coefficients (the grid
    one through the exact discrete sine transform) and compared in the
    modal energy norm, maximised over the stored samples.  Each method's
    self-convergence estimate is the same distance between its own run and
    a run at half resolution (N/2 modes, M/2 nodes).
    """
    from .spectral import Basis, Domain

    if n_modes < 2 or m // 2 < 16:
        raise ConfigError("cross-method comparison needs N >= 2 and M >= 32")
    lam = Domain.interval(length, 2 * n_modes).eigenvalues

    def spectral(n):
        basis = Basis(Domain.interval(length, n), cfg.dealias)
        ic_n = ModalState(ic.t, _fit(ic.u, n), _fit(ic.v, n))
        tr = simulate(basis, ic_n, T, coeffs, cfg, stride)
        return tr.u, tr.v

    def grid(mm):
        g = FDGrid(length, mm)
        tr = simulate_fd(g, fd_state_from_modes(g, ic), coeffs, cfg, T, stride)
        return (np.array([g.to_modes(x, n_modes) for x in tr.u]),
                np.array([g.to_modes(x, n_modes) for x in tr.v]))

    su, sv = spectral(n_modes)
    su2, sv2 = spectral(n_modes // 2)
    gu, gv = grid(m)
    gu2, gv2 = grid(m // 2)
    gap = _modal_energy_gap(lam, su, sv, gu, gv)
    est_spectral = _modal_energy_gap(lam, su, sv, su2, sv2)
    est_grid = _modal_energy_gap(lam, gu, gv, gu2, gv2)
    return {
        "gap": gap,
        "spectral_self_convergence": est_spectral,
        "fd_self_convergence": est_grid,
        "tolerance": est_spectral + est_grid,
        "within_tolerance": bool(gap <= est_spectral + est_grid),
        "n_modes": n_modes,
        "fd_nodes": m,
    }


def _fit(x, n):
    x = np.asarray(x, dtype=float)
    return x[:n] if len(x) >= n else np.pad(x, (0, n - len(x)))
