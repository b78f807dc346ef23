"""Spatial discretization: grid, block operator and forcing assembly.

Discretizing u_tt = u_xx - gamma(x) u_t + g(x,t) in space on the interior
nodes of a uniform grid yields the first-order system

    dV/dt = M V + F(t),    M = [[0, I], [A/h^2, -Gamma]],

with V the interior displacements stacked over interior velocities,
A = tridiag(1, -2, 1), Gamma = diag(gamma(x_i)) and
F(t) = [0; G(t) + B(t)/h^2] carrying the interior forcing G and the
Dirichlet boundary contribution B(t) = [u_a(t), 0, ..., 0, u_b(t)].

M is kept in block form (tridiagonal + diagonal); it is only densified by
`BlockOperator.to_dense`, a validation-scale utility.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problems import DampedWaveProblem


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform mesh of [a, b] with N subintervals; interior nodes x_i = a + i h."""

    a: float
    b: float
    N: int
    h: float
    interior_nodes: np.ndarray

    @property
    def n_interior(self) -> int:
        return self.N - 1

    def all_nodes(self) -> np.ndarray:
        """Nodes including both endpoints (length N+1)."""
        return np.concatenate(([self.a], self.interior_nodes, [self.b]))


def build_grid(a: float, b: float, N: int) -> SpatialGrid:
    """Mesh [a, b] into N subintervals, h = (b-a)/N.

    Requires b > a and N >= 2 (at least one interior node).
    """
    if not b > a:
        raise ValueError(f"need b > a, got a={a}, b={b}")
    if N < 2:
        raise ValueError(f"need N >= 2 for interior nodes, got N={N}")
    h = (b - a) / N
    nodes = a + h * np.arange(1, N)
    return SpatialGrid(a=float(a), b=float(b), N=int(N), h=h, interior_nodes=_readonly(nodes))


@dataclass(frozen=True)
class Tridiagonal:
    """Symmetric-profile tridiagonal matrix stored as diagonals."""

    diag: np.ndarray
    lower: np.ndarray  # length n-1
    upper: np.ndarray  # length n-1

    @property
    def n(self) -> int:
        return len(self.diag)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        out = self.diag * v
        if self.n > 1:
            out[:-1] += self.upper * v[1:]
            out[1:] += self.lower * v[:-1]
        return out

    def to_dense(self) -> np.ndarray:
        m = np.diag(self.diag)
        if self.n > 1:
            m += np.diag(self.lower, -1) + np.diag(self.upper, 1)
        return m


def laplacian_stencil(n: int) -> Tridiagonal:
    """The n x n second-difference matrix tridiag(1, -2, 1) (no 1/h^2 factor)."""
    return Tridiagonal(
        diag=_readonly(np.full(n, -2.0)),
        lower=_readonly(np.ones(max(n - 1, 0))),
        upper=_readonly(np.ones(max(n - 1, 0))),
    )


@dataclass(frozen=True)
class BlockOperator:
    """The 2(N-1) x 2(N-1) operator M = [[0, I], [A/h^2, -Gamma]] in block form."""

    n_interior: int
    laplacian: Tridiagonal
    damping: np.ndarray  # gamma(x_i), the diagonal of Gamma
    inv_h2: float

    @property
    def size(self) -> int:
        return 2 * self.n_interior

    def apply(self, v: np.ndarray) -> np.ndarray:
        """Blockwise M @ v: O(N) work, no densification."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.size,):
            raise ValueError(f"expected vector of length {self.size}, got shape {v.shape}")
        n = self.n_interior
        u, w = v[:n], v[n:]
        return np.concatenate([w, self.inv_h2 * self.laplacian.matvec(u) - self.damping * w])

    def to_dense(self) -> np.ndarray:
        """Densified M; validation-scale utility, never used in the solve path."""
        n = self.n_interior
        m = np.zeros((2 * n, 2 * n))
        m[:n, n:] = np.eye(n)
        m[n:, :n] = self.inv_h2 * self.laplacian.to_dense()
        m[n:, n:] = -np.diag(self.damping)
        return m


def assemble_system(grid: SpatialGrid, problem: DampedWaveProblem) -> BlockOperator:
    """Sample gamma at the interior nodes and assemble M.

    Rejects negative damping values (the model assumes gamma >= 0).
    """
    n = grid.n_interior
    gamma = np.array([problem.gamma(x) for x in grid.interior_nodes], dtype=float)
    if np.any(gamma < 0):
        i = int(np.argmin(gamma))
        raise ValueError(
            f"damping must be nonnegative; gamma({grid.interior_nodes[i]}) = {gamma[i]}"
        )
    return BlockOperator(
        n_interior=n,
        laplacian=laplacian_stencil(n),
        damping=_readonly(gamma),
        inv_h2=1.0 / grid.h**2,
    )


@dataclass(frozen=True)
class ForcingVector:
    """F(t) = [0; G(t) + B(t)/h^2] evaluated at one time."""

    t: float
    values: np.ndarray


def boundary_vector(problem: DampedWaveProblem, grid: SpatialGrid, t: float) -> np.ndarray:
    """B(t): zeros except u_a(t) at the first and u_b(t) at the last interior slot."""
    b = np.zeros(grid.n_interior)
    b[0] += problem.u_a(t)
    b[-1] += problem.u_b(t)
    return b


def forcing_vector(problem: DampedWaveProblem, grid: SpatialGrid, t: float) -> ForcingVector:
    """Assemble F(t) for the first-order system at time t."""
    n = grid.n_interior
    g_vals = np.array([problem.g(x, t) for x in grid.interior_nodes], dtype=float)
    values = np.zeros(2 * n)
    values[n:] = g_vals + boundary_vector(problem, grid, t) / grid.h**2
    return ForcingVector(t=float(t), values=_readonly(values))
