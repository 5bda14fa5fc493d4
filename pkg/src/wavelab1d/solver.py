"""Leapfrog evolution of the semilinear wave equation.

The update is the explicit three-level scheme

    u[n+1] = 2 u[n] - u[n-1] + cfl^2 (u[n]_{j+1} - 2 u[n]_j + u[n]_{j-1})
             + dt^2 * sign * |u[n]|^(p-1) u[n],

which at cfl = 1 reduces to the exact lattice transport
u[n+1]_j = u[n]_{j+1} + u[n]_{j-1} - u[n-1]_j for the linear part, so flux
diagnostics along characteristics line up with the lattice diagonals.
Velocities are reconstructed as v[n] = (u[n+1] - u[n-1]) / (2 dt).

Evolutions are strictly sequential in time; emitted FieldState snapshots are
immutable and safe to share across threads.  Independent evolutions share no
mutable state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BlowUpDetected, DomainTooSmall, ValidationError
from .grid import FieldState, GridSpec, InitialData, Nonlinearity

DEFAULT_BLOWUP_GUARD = 1e8


@dataclass(frozen=True)
class Observer:
    """Callback invoked with the current FieldState at each requested time.

    Each requested time is mapped to the first grid time at or after it.
    """

    times: Sequence[float]
    fn: Callable[[FieldState], None]


def steps_for(t_end: float, dt: float) -> int:
    """Number of steps to the first grid time >= t_end."""
    return max(0, int(math.ceil(t_end / dt - 1e-9)))


def _power_term(u, p, out=None):
    """|u|^(p-1) u with fast paths for p in {2, 3, 5}."""
    if out is None:
        out = np.empty_like(u)
    if p == 3.0:
        np.multiply(u, u, out=out)
        out *= u
    elif p == 2.0:
        np.abs(u, out=out)
        out *= u
    elif p == 5.0:
        np.multiply(u, u, out=out)
        np.multiply(out, out, out=out)
        out *= u
    else:
        np.abs(u, out=out)
        np.power(out, p - 1.0, out=out)
        out *= u
    return out


def leapfrog_step(u_cur, u_prev, grid: GridSpec, nl: Nonlinearity):
    """One leapfrog update; returns the next level as a fresh array."""
    c2 = grid.cfl * grid.cfl
    dt2 = grid.dt * grid.dt
    u_next = np.zeros_like(u_cur)
    # neighbours are summed first so mirror-symmetric data stay bit-even
    u_next[1:-1] = (c2 * (u_cur[2:] + u_cur[:-2])
                    + (2.0 - 2.0 * c2) * u_cur[1:-1] - u_prev[1:-1])
    if nl.source_sign != 0.0:
        u_next[1:-1] += (dt2 * nl.source_sign) * _power_term(u_cur[1:-1], nl.p)
    return u_next


def _start_level(u0, u1, init: InitialData, grid: GridSpec, nl: Nonlinearity):
    """Second-order starting level u[1].

    u[1] = u[0] + (cfl^2/2) lap(u0) + (1/2) Int_{x-dt}^{x+dt} u1 dx'
         + (dt^2/2) forcing(u0),

    using the exact antiderivative of u1 when the data provide one (this
    keeps the linear cfl=1 evolution an exact lattice shift) and the
    midpoint value dt*u1 otherwise.
    """
    dt = grid.dt
    c2 = grid.cfl * grid.cfl
    x = grid.nodes
    exact = init.u1_integral(x - dt, x + dt)
    vel_part = 0.5 * exact if exact is not None else dt * u1
    u_next = u0 + vel_part + (dt * dt / 2.0) * nl.forcing(u0)
    # neighbours are summed first so mirror-symmetric data stay bit-even
    u_next[1:-1] += (c2 / 2.0) * (u0[2:] + u0[:-2]) - c2 * u0[1:-1]
    u_next[0] = 0.0
    u_next[-1] = 0.0
    return u_next


def first_step(init: InitialData, grid: GridSpec, nl: Nonlinearity) -> FieldState:
    """State after one time step (the leapfrog starting level)."""
    u0, u1 = init.sample(grid)
    u_a = _start_level(u0, u1, init, grid, nl)
    u_b = leapfrog_step(u_a, u0, grid, nl)
    v = (u_b - u0) / (2.0 * grid.dt)
    return FieldState(t=grid.dt, u=u_a, v=v)


def _check_domain(init: InitialData, grid: GridSpec, n_steps: int):
    support = init.support_interval(grid)
    if support is None:
        return
    lo, hi = support
    margin = (n_steps + 2) * grid.dx
    tol = 1e-9 * grid.dx
    if lo - margin < grid.x_min - tol or hi + margin > grid.x_max + tol:
        raise DomainTooSmall(
            f"support [{lo:.4g}, {hi:.4g}] plus cone expansion {margin:.4g} "
            f"exceeds the domain [{grid.x_min:.4g}, {grid.x_max:.4g}]")


def evolve(init: InitialData, grid: GridSpec, nl: Nonlinearity, t_end: float,
           observers: Sequence[Observer] = (), guard: float = DEFAULT_BLOWUP_GUARD,
           _level_sink=None) -> FieldState:
    """Evolve the Cauchy problem to the first grid time >= t_end.

    Observers are invoked at every requested sample time.  Raises
    BlowUpDetected if any sample goes non-finite or |u| exceeds the guard
    (the expected outcome for focusing runs), and DomainTooSmall if the
    support cone would reach the boundary.  Deterministic: identical inputs
    produce bit-identical outputs.
    """
    if t_end < 0.0:
        raise ValidationError("t_end", "must be nonnegative")
    dt = grid.dt
    n_steps = steps_for(t_end, dt)
    _check_domain(init, grid, n_steps)

    u0, u1 = init.sample(grid)

    # schedule[step] -> observer callbacks due at that step
    schedule: dict[int, list] = {}
    for obs in observers:
        for t_req in obs.times:
            step = steps_for(t_req, dt)
            if step > n_steps:
                raise ValidationError("observer", f"sample time {t_req!r} beyond t_end")
            schedule.setdefault(step, []).append(obs.fn)

    def emit(step, u_arr, v_arr):
        state = FieldState(t=step * dt, u=u_arr.copy(), v=v_arr.copy())
        for fn in schedule.get(step, ()):
            fn(state)
        if _level_sink is not None:
            _level_sink(step, state)
        return state

    sup0 = max(float(np.max(np.abs(u0))), float(np.max(np.abs(u1)))) if u0.size else 0.0
    if not (sup0 < guard):
        raise BlowUpDetected(0.0, sup0)

    wants0 = 0 in schedule or _level_sink is not None or n_steps == 0
    state0 = emit(0, u0, u1) if wants0 else None
    if n_steps == 0:
        return state0

    u_prev = u0.copy()
    u_cur = _start_level(u0, u1, init, grid, nl)

    c2 = grid.cfl * grid.cfl
    dt2s = grid.dt * grid.dt * nl.source_sign
    p = nl.p
    n_nodes = grid.n_nodes
    u_next = np.zeros(n_nodes)
    work = np.zeros(n_nodes)
    pw = np.zeros(n_nodes - 2) if dt2s != 0.0 else None
    v_buf = np.empty(n_nodes)
    final_state = None

    _guard_check(u_cur, dt, guard, work)

    for m in range(1, n_steps + 1):
        # u_next holds level m+1, computed from u_cur (m) and u_prev (m-1)
        if c2 == 1.0:
            np.add(u_cur[2:], u_cur[:-2], out=work[1:-1])
        else:
            np.add(u_cur[2:], u_cur[:-2], out=work[1:-1])
            work[1:-1] *= c2
            work[1:-1] += (2.0 - 2.0 * c2) * u_cur[1:-1]
        if dt2s != 0.0:
            _power_term(u_cur[1:-1], p, out=pw)
            pw *= dt2s
            work[1:-1] += pw
        np.subtract(work[1:-1], u_prev[1:-1], out=u_next[1:-1])
        u_next[0] = 0.0
        u_next[-1] = 0.0
        _guard_check(u_next, (m + 1) * dt, guard, work)

        if m in schedule or m == n_steps or _level_sink is not None:
            np.subtract(u_next, u_prev, out=v_buf)
            v_buf /= (2.0 * dt)
            state = emit(m, u_cur, v_buf)
            if m == n_steps:
                final_state = state

        u_prev, u_cur, u_next = u_cur, u_next, u_prev

    return final_state


def _guard_check(u, t, guard, scratch=None):
    if scratch is not None and scratch.shape == u.shape:
        np.abs(u, out=scratch)
        sup = scratch.max()
    else:
        sup = np.max(np.abs(u))
    if not (sup < guard):
        raise BlowUpDetected(t, float(sup))


class Trajectory:
    """Dense storage of an evolution: every time level with velocities.

    Intended for short horizons (flux loops, trapezoid checks, virial and
    Morawetz integrals); long experiments use observers instead.  Storage is
    append-only during evolution and read-only afterwards.
    """

    def __init__(self, grid: GridSpec, nl: Nonlinearity, times, u_levels, v_levels):
        self.grid = grid
        self.nl = nl
        self.times = times
        self.u_levels = u_levels
        self.v_levels = v_levels
        for arr in (times, u_levels, v_levels):
            arr.setflags(write=False)

    @classmethod
    def record(cls, init: InitialData, grid: GridSpec, nl: Nonlinearity,
               t_end: float, guard: float = DEFAULT_BLOWUP_GUARD) -> "Trajectory":
        n_steps = steps_for(t_end, grid.dt)
        n_nodes = grid.n_nodes
        u_levels = np.empty((n_steps + 1, n_nodes))
        v_levels = np.empty((n_steps + 1, n_nodes))

        def sink(step, state):
            u_levels[step] = state.u
            v_levels[step] = state.v

        evolve(init, grid, nl, t_end, guard=guard, _level_sink=sink)
        times = np.arange(n_steps + 1) * grid.dt
        return cls(grid, nl, times, u_levels, v_levels)

    @property
    def n_levels(self) -> int:
        return len(self.times)

    @property
    def t_max(self) -> float:
        return float(self.times[-1])

    def level_of(self, t: float) -> int:
        level = self.grid.step_of(t)
        if level >= self.n_levels:
            raise ValidationError("time", f"t={t!r} beyond the stored trajectory")
        return level

    def state(self, level: int) -> FieldState:
        return FieldState(t=float(self.times[level]), u=self.u_levels[level].copy(),
                          v=self.v_levels[level].copy())

    def pointwise(self, levels, js):
        """(u, u_x, u_t) at lattice points (levels[i], js[i]), vectorized.

        u_x uses the same central stencil as sample_derivatives (one-sided
        at the domain endpoints).
        """
        levels = np.asarray(levels, dtype=int)
        js = np.asarray(js, dtype=int)
        dx = self.grid.dx
        n = self.grid.n_cells
        u = self.u_levels[levels, js]
        ut = self.v_levels[levels, js]
        jm = np.clip(js - 1, 0, n)
        jp = np.clip(js + 1, 0, n)
        ux = (self.u_levels[levels, jp] - self.u_levels[levels, jm]) / (2.0 * dx)
        left = js == 0
        if left.any():
            ux[left] = (-3.0 * self.u_levels[levels[left], 0]
                        + 4.0 * self.u_levels[levels[left], 1]
                        - self.u_levels[levels[left], 2]) / (2.0 * dx)
        right = js == n
        if right.any():
            ux[right] = (3.0 * self.u_levels[levels[right], n]
                         - 4.0 * self.u_levels[levels[right], n - 1]
                         + self.u_levels[levels[right], n - 2]) / (2.0 * dx)
        return u, ux, ut
