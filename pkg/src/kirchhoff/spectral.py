"""Dirichlet sine eigenbasis of -Laplace on an interval or a rectangle.

Modal vectors are plain 1-D ``numpy`` arrays of coefficients against the
orthonormal eigenfunctions ``e_k``, ordered by ascending eigenvalue (ties in
2-D broken lexicographically by the index pair).  With an orthonormal basis
every Sobolev norm is a weighted sum of squares:

    |v|_r^2 = sum_k lambda_k**r * c_k**2

Physical samples live on the interior nodes ``x_j = j L/(M+1)``,
``j = 1..M``, of the type-I discrete sine transform.  Synthesis and analysis
are dense matrix products; analysis is the transpose of synthesis scaled by
the cell size, which makes ``analyze(synthesize(v)) == v`` exact for any
bandwidth ``N <= M``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla

from .errors import ConfigError


class AliasingWarning(UserWarning):
    """Pseudospectral projection of a non-polynomial source may alias."""


@dataclass(frozen=True)
class Domain:
    """Interval ``(0, L)`` or rectangle ``(0, L1) x (0, L2)``, N modes per axis."""

    kind: str
    lengths: tuple
    n: int

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(float(x) for x in self.lengths))
        if self.kind not in ("interval", "rectangle"):
            raise ConfigError(f"domain kind must be 'interval' or 'rectangle', got {self.kind!r}")
        want = 1 if self.kind == "interval" else 2
        if len(self.lengths) != want:
            raise ConfigError(f"{self.kind} needs {want} length(s), got {len(self.lengths)}")
        if any(not x > 0 for x in self.lengths):
            raise ConfigError("domain lengths must be positive")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"truncation N must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def interval(cls, length: float = math.pi, n: int = 16) -> "Domain":
        return cls("interval", (length,), n)

    @classmethod
    def rectangle(cls, lx: float = math.pi, ly: float = math.pi, n: int = 8) -> "Domain":
        return cls("rectangle", (lx, ly), n)

    @property
    def dim(self) -> int:
        return len(self.lengths)

    @cached_property
    def mode_index(self) -> tuple:
        """Per-mode wavenumber tuples in eigenvalue order."""
        if self.dim == 1:
            return tuple((k,) for k in range(1, self.n + 1))
        lx, ly = self.lengths
        pairs = [(j, k) for j in range(1, self.n + 1) for k in range(1, self.n + 1)]
        key = lambda jk: ((jk[0] * math.pi / lx) ** 2 + (jk[1] * math.pi / ly) ** 2, jk)
        return tuple(sorted(pairs, key=key))

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        lam = np.array([
            sum((k * math.pi / length) ** 2 for k, length in zip(idx, self.lengths))
            for idx in self.mode_index
        ])
        lam.setflags(write=False)
        return lam

    @property
    def n_modes(self) -> int:
        return len(self.mode_index)

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues[0])

    def to_dict(self) -> dict:
        return {"kind": self.kind, "lengths": list(self.lengths), "N": self.n}


def eigenvalues(domain: Domain) -> np.ndarray:
    """Sorted Dirichlet eigenvalues of -Laplace for the truncated domain."""
    return np.array(domain.eigenvalues)


def sobolev_norm_sq(domain: Domain, v, order: float = 0.0) -> float:
    """``sum_k lambda_k**order * v_k**2``; order 1 is |grad v|^2, -1 the H^-1 norm."""
    v = np.asarray(v, dtype=float)
    return float(np.sum(domain.eigenvalues**order * v * v))


def _sine_matrix(length: float, n: int, m: int) -> np.ndarray:
    j = np.arange(1, m + 1)[:, None]
    k = np.arange(1, n + 1)[None, :]
    return math.sqrt(2.0 / length) * np.sin(np.pi * j * k / (m + 1))


class Transform:
    """Synthesis/analysis pair on the M-point interior sine grid (per axis)."""

    def __init__(self, domain: Domain, m: int):
        if m < domain.n + 1:
            raise ConfigError(f"collocation size M={m} must be at least N+1={domain.n + 1}")
        self.domain = domain
        self.m = int(m)
        if domain.dim == 1:
            (length,) = domain.lengths
            self.matrix = _sine_matrix(length, domain.n, m)
            self.cell = length / (m + 1)
            self.shape = (m,)
        else:
            lx, ly = domain.lengths
            bx = _sine_matrix(lx, domain.n, m)
            by = _sine_matrix(ly, domain.n, m)
            cols = [np.outer(bx[:, j - 1], by[:, k - 1]).ravel() for j, k in domain.mode_index]
            self.matrix = np.column_stack(cols)
            self.cell = (lx / (m + 1)) * (ly / (m + 1))
            self.shape = (m, m)
        self.matrix.setflags(write=False)

    @cached_property
    def nodes(self):
        """Interior nodes per axis."""
        return tuple(np.arange(1, self.m + 1) * length / (self.m + 1) for length in self.domain.lengths)

    def synthesize(self, v) -> np.ndarray:
        """Flat physical samples of the modal vector ``v``."""
        return self.matrix @ np.asarray(v, dtype=float)

    def analyze(self, samples) -> np.ndarray:
        return self.cell * (self.matrix.T @ np.asarray(samples, dtype=float).ravel())

    def integrate(self, values) -> float:
        """Trapezoidal integral of grid values (boundary values are zero)."""
        return float(self.cell * np.sum(values))


def synthesize(domain: Domain, v, m: int) -> np.ndarray:
    """Physical samples of ``v`` on the M-point grid; shape ``(M,)`` or ``(M, M)``."""
    tr = Transform(domain, m)
    return tr.synthesize(v).reshape(tr.shape)


def analyze(domain: Domain, samples) -> np.ndarray:
    """Modal coefficients (first N modes) of samples on an interior sine grid."""
    samples = np.asarray(samples, dtype=float)
    return Transform(domain, samples.shape[0]).analyze(samples)


def dealiased_size(n: int, dealias: float) -> int:
    if dealias < 1:
        raise ConfigError(f"dealias factor must be >= 1, got {dealias}")
    return int(math.ceil(dealias * (n + 1)))


def aliasing_free(f, dealias: float) -> bool:
    """True when collocation of ``f(u)`` is exact for the given dealias factor."""
    if f.degree is None:
        return False
    return dealias >= (f.degree + 1) / 2


def project_f(domain: Domain, u, f, dealias: float = 2.0) -> np.ndarray:
    """Modal coefficients of ``f(u(x))`` truncated to the domain's modes.

    A non-polynomial source with ``dealias < 2`` triggers an
    :class:`AliasingWarning`.
    """
    return Basis(domain, dealias).force(f, u)


class Basis:
    """Galerkin discretisation: eigenvalues plus a dealiased collocation grid.

    This is the object the energy functionals and time steppers work with.
    :class:`kirchhoff.oracle.FDGrid` provides the same methods for the
    finite-difference reference discretisation.
    """

    def __init__(self, domain: Domain, dealias: float = 2.0):
        self.domain = domain
        self.dealias = float(dealias)
        self.transform = Transform(domain, dealiased_size(domain.n, dealias))
        self.lam = domain.eigenvalues
        self.n = domain.n_modes
        self.dim = domain.dim
        self.weight = 1.0

    def __repr__(self):
        return f"Basis({self.domain!r}, dealias={self.dealias})"

    # norms and inner products
    def inner(self, a, b) -> float:
        return float(np.dot(a, b))

    def l2_sq(self, v) -> float:
        return float(np.dot(v, v))

    def grad_sq(self, u) -> float:
        return float(np.dot(self.lam * u, u))

    def norm_sq(self, v, order: float) -> float:
        return float(np.sum(self.lam**order * v * v))

    def apply_K(self, u) -> np.ndarray:
        return self.lam * u

    def h_vector(self, coeffs) -> np.ndarray:
        return coeffs.h_vector(self.n)

    # nonlinearity
    def _check_alias(self, f):
        if f.degree is None and self.dealias < 2:
            warnings.warn(
                f"source {f.tag} is not polynomial and dealias={self.dealias} < 2; projection may alias",
                AliasingWarning, stacklevel=3,
            )

    def force(self, f, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if f.degree == 0:
            return np.zeros_like(u)
        if f.degree == 1:
            return float(f.deriv(0.0)) * u
        self._check_alias(f)
        tr = self.transform
        return tr.analyze(f.value(tr.synthesize(u)))

    def force_jacobian(self, f, u):
        """Jacobian of :meth:`force`; a scalar when ``f`` is linear."""
        if f.degree in (0, 1):
            return float(f.deriv(0.0))
        tr = self.transform
        d = f.deriv(tr.synthesize(u))
        return tr.cell * (tr.matrix.T @ (d[:, None] * tr.matrix))

    def integral_F(self, f, u) -> float:
        if f.degree == 0:
            return 0.0
        if f.degree == 1:
            return 0.5 * float(f.deriv(0.0)) * float(np.dot(u, u))
        tr = self.transform
        return tr.integrate(f.integral(tr.synthesize(u)))

    def lp_norm(self, u, p: float) -> float:
        tr = self.transform
        return tr.integrate(np.abs(tr.synthesize(u)) ** p) ** (1.0 / p)

    # linear algebra
    def solve(self, c_id, c_k, c_f, f, u, rhs, a=None, b=None):
        """Solve ``(c_id I + c_k K + c_f J_f(u) + a b^T) x = rhs``."""
        jf = self.force_jacobian(f, u) if c_f != 0 else 0.0
        if np.ndim(jf) == 0:
            diag = c_id + c_k * self.lam + c_f * jf
            if np.any(diag == 0):
                raise np.linalg.LinAlgError("singular diagonal matrix")
            solve_base = lambda r: r / (diag if np.ndim(r) == 1 else diag[:, None])
        else:
            mat = c_f * jf
            mat[np.diag_indices_from(mat)] += c_id + c_k * self.lam
            lu = sla.lu_factor(mat, check_finite=False)
            solve_base = lambda r: sla.lu_solve(lu, r, check_finite=False)
        return sherman_morrison(solve_base, rhs, a, b)

    def dense_matrix(self, c_id, c_k, c_f, f, u, a=None, b=None) -> np.ndarray:
        jf = self.force_jacobian(f, u)
        mat = np.diag(c_id + c_k * self.lam) + c_f * (jf if np.ndim(jf) == 2 else jf * np.eye(self.n))
        if a is not None:
            mat = mat + np.outer(a, b)
        return mat


def sherman_morrison(solve_base, rhs, a=None, b=None):
    """Solve ``(B + a b^T) x = rhs`` given a solver for ``B``."""
    if a is None:
        return solve_base(rhs)
    both = solve_base(np.column_stack([rhs, a]))
    y, z = both[:, 0], both[:, 1]
    denom = 1.0 + float(np.dot(b, z))
    if denom == 0.0 or not np.isfinite(denom):
        raise np.linalg.LinAlgError("rank-one update makes the matrix singular")
    return y - z * (float(np.dot(b, y)) / denom)
