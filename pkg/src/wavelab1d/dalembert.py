"""Fixed-point solution of the wave equation's integral form.

The solution operator is

    (T u)(x,t) = (1/2)[u0(x-t) + u0(x+t) + Int_{x-t}^{x+t} u1 dx']
                 + (sign/2) IInt_{triangle(x,t)} |u|^(p-1) u dx' dt',

iterated to a fixed point on a space-time lattice with dt = dx.  The double
integral over the backward light triangle is evaluated by composite midpoint
quadrature: at the half-level t_{l+1/2} the inner interval has half-width
(k - l - 1/2) dx, so its midpoint cells are centred exactly on lattice
nodes.  This keeps the oracle's quadrature second order while staying
completely independent of the leapfrog update it cross-validates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoContraction, NonConvergence, ValidationError
from .grid import FieldState, GridSpec, InitialData, Nonlinearity

DEFAULT_TOL_FIXED_POINT = 1e-12
DEFAULT_MAX_ITERATIONS = 200
# safety factor applied to the contraction bound p T^2 A^(p-1) <= 1/2
_CONTRACTION_BOUND = 0.5


@dataclass
class PicardResult:
    """Converged space-time field of the fixed-point iteration."""

    levels: np.ndarray        # (K+1, n_nodes); row k is the slice at t = k*dx
    linear_part: np.ndarray
    iterations: int
    final_change: float
    amplitude_bound: float    # sup of the data wave over the rectangle
    contraction: float        # p * T^2 * A^(p-1)

    @property
    def n_levels(self) -> int:
        return self.levels.shape[0]


def _lattice_levels(grid: GridSpec, T: float) -> int:
    dx = grid.dx
    K = int(round(T / dx))
    if abs(K * dx - T) > 1e-9 * max(1.0, abs(T)) or K < 1:
        raise ValidationError("T", "horizon must be a positive lattice multiple of dx")
    return K


def _antiderivative_nodes(init: InitialData, grid: GridSpec, u1):
    """F with F' = u1 on the nodes; exact where the data provide it."""
    x = grid.nodes
    exact = init.u1_integral(np.full_like(x, grid.x_min), x)
    if exact is not None:
        return exact
    dx = grid.dx
    F = np.zeros_like(u1)
    np.cumsum(0.5 * dx * (u1[1:] + u1[:-1]), out=F[1:])
    return F


def linear_part(init: InitialData, grid: GridSpec, K: int) -> np.ndarray:
    """Free evolution of the data on the lattice, levels 0..K.

    Data are extended by zero (u0) and constantly (the u1 antiderivative)
    outside the domain, which is exact for compactly supported data.
    """
    u0, u1 = init.sample(grid)
    n = grid.n_nodes
    F = _antiderivative_nodes(init, grid, u1)
    u0pad = np.zeros(n + 2 * K)
    u0pad[K:K + n] = u0
    Fpad = np.empty(n + 2 * K)
    Fpad[K:K + n] = F
    Fpad[:K] = F[0]
    Fpad[K + n:] = F[-1]
    L = np.empty((K + 1, n))
    for k in range(K + 1):
        right = slice(K + k, K + k + n)
        left = slice(K - k, K - k + n)
        L[k] = 0.5 * (u0pad[right] + u0pad[left]) + 0.5 * (Fpad[right] - Fpad[left])
    return L


def _window_sums(C, m, n_nodes):
    """W[j] = sum of gbar over lattice indices [j-m, j+m], gbar zero outside.

    C is the zero-led prefix-sum row (length n_nodes+1).
    """
    last = n_nodes  # C has indices 0..n_nodes
    W = np.empty(n_nodes)
    if 2 * m < n_nodes:
        W[m:n_nodes - m] = C[2 * m + 1:] - C[:n_nodes - 2 * m]
        W[:m] = C[m + 1:2 * m + 1]
        W[n_nodes - m:] = C[last] - C[n_nodes - 2 * m:n_nodes - m]
    else:
        j = np.arange(n_nodes)
        W[:] = C[np.minimum(j + m + 1, last)] - C[np.maximum(j - m, 0)]
    return W


def nonlinear_integral(levels: np.ndarray, nl: Nonlinearity, dx: float) -> np.ndarray:
    """(sign/2) double integral of |u|^(p-1)u over backward light triangles.

    Row k of the result is the triangle integral for every node at time
    k*dx, by midpoint quadrature in both directions.
    """
    K = levels.shape[0] - 1
    n_nodes = levels.shape[1]
    out = np.zeros_like(levels)
    if nl.source_sign == 0.0 or K == 0:
        return out
    g = nl.power_term(levels)
    gbar = 0.5 * (g[:-1] + g[1:])                      # half-level averages
    C = np.zeros((K, n_nodes + 1))
    np.cumsum(gbar, axis=1, out=C[:, 1:])
    scale = 0.5 * nl.source_sign * dx * dx
    for k in range(1, K + 1):
        acc = _window_sums(C[k - 1], 0, n_nodes)
        for l in range(0, k - 1):
            acc += _window_sums(C[l], k - l - 1, n_nodes)
        out[k] = scale * acc
    return out


def _picard_from_linear(L, nl, dx, tol, max_iterations):
    U = np.zeros_like(L)
    iterations = 0
    change = np.inf
    while iterations < max_iterations:
        U_new = L + nonlinear_integral(U, nl, dx)
        iterations += 1
        change = float(np.max(np.abs(U_new - U)))
        U = U_new
        if change < tol:
            return U, iterations, change
    raise NonConvergence(
        f"no fixed point after {max_iterations} iterations (last change {change:.3e})")


def picard_fixed_point(init: InitialData, grid: GridSpec, nl: Nonlinearity, T: float,
                       tol_fixed_point: float = DEFAULT_TOL_FIXED_POINT,
                       max_iterations: int = DEFAULT_MAX_ITERATIONS) -> PicardResult:
    """Iterate the solution operator to a fixed point on [0, T].

    Enforces the contraction precondition p T^2 A^(p-1) <= 1/2 with A the
    sup of the data wave over the space-time rectangle; raises NoContraction
    when it fails and NonConvergence when the iteration cap is exceeded.
    """
    K = _lattice_levels(grid, T)
    L = linear_part(init, grid, K)
    A = float(np.max(np.abs(L)))
    if nl.source_sign != 0.0 and A > 0.0:
        contraction = nl.p * T * T * A ** (nl.p - 1.0)
        if contraction > _CONTRACTION_BOUND:
            raise NoContraction(
                f"p*T^2*A^(p-1) = {contraction:.3g} exceeds {_CONTRACTION_BOUND}"
                f" (A = {A:.3g}); shorten T")
    else:
        contraction = 0.0
    if nl.source_sign == 0.0:
        # the transform is constant in u; one application is exact
        return PicardResult(L.copy(), L, 1, 0.0, A, contraction)
    U, iterations, change = _picard_from_linear(L, nl, grid.dx, tol_fixed_point,
                                                max_iterations)
    return PicardResult(U, L, iterations, change, A, contraction)


def _slice_state(levels, k, dx) -> FieldState:
    if k < 2:
        raise ValidationError("T", "need at least two lattice steps for the velocity")
    u = levels[k]
    v = (3.0 * levels[k] - 4.0 * levels[k - 1] + levels[k - 2]) / (2.0 * dx)
    return FieldState(t=k * dx, u=u.copy(), v=v)


def dalembert_oracle(init: InitialData, grid: GridSpec, nl: Nonlinearity, T: float,
                     tol_fixed_point: float = DEFAULT_TOL_FIXED_POINT,
                     max_iterations: int = DEFAULT_MAX_ITERATIONS) -> FieldState:
    """Solution slice at time T by Picard iteration of the integral equation.

    Independent of the leapfrog scheme; serves as its small-time oracle.
    The returned velocity is a one-sided second-order time difference of the
    converged space-time field.
    """
    result = picard_fixed_point(init, grid, nl, T, tol_fixed_point, max_iterations)
    return _slice_state(result.levels, result.n_levels - 1, grid.dx)


def evolve_by_dalembert(init: InitialData, grid: GridSpec, nl: Nonlinearity, T: float,
                        tol_fixed_point: float = DEFAULT_TOL_FIXED_POINT,
                        max_iterations: int = DEFAULT_MAX_ITERATIONS) -> FieldState:
    """Oracle evolution over horizons beyond a single contraction window.

    Splits [0, T] into lattice-aligned windows, each satisfying the
    contraction bound, restarting the iteration from the converged slice.
    Restart data use the one-sided velocity reconstruction, which keeps the
    composition second-order accurate.
    """
    K_total = _lattice_levels(grid, T)
    if K_total < 2:
        raise ValidationError("T", "horizon must span at least two lattice steps")
    dx = grid.dx
    p = nl.p
    done = 0
    current = init
    while True:
        K_rem = K_total - done
        K_w = K_rem
        while True:
            L = linear_part(current, grid, K_w)
            A = float(np.max(np.abs(L)))
            if nl.source_sign == 0.0 or A == 0.0:
                break
            if p * (K_w * dx) ** 2 * A ** (p - 1.0) <= 0.9 * _CONTRACTION_BOUND:
                break
            if K_w == 2:
                raise NoContraction("contraction fails even on a two-step window")
            K_w = max(2, K_w // 2)
        if nl.source_sign == 0.0:
            U = L
        else:
            U, _, _ = _picard_from_linear(L, nl, dx, tol_fixed_point, max_iterations)
        if done + K_w >= K_total:
            state = _slice_state(U, K_w, dx)
            return FieldState(t=(done + K_w) * dx, u=state.u, v=state.v)
        v = (3.0 * U[K_w] - 4.0 * U[K_w - 1] + U[K_w - 2]) / (2.0 * dx)
        current = InitialData.explicit(U[K_w], v)
        done += K_w
