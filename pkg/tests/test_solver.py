import numpy as np
import pytest

from wavelab1d import (BlowUpDetected, DomainTooSmall, GridSpec, InitialData,
                       Nonlinearity, Observer, Trajectory, evolve, first_step)

P3 = Nonlinearity(p=3.0)
LINEAR = Nonlinearity(p=3.0, sign="disabled")


def test_zero_data_is_fixed_point():
    g = GridSpec(-5.0, 5.0, 500)
    states = []
    obs = Observer(times=[0.0, 2.5, 5.0, 7.5, 10.0], fn=states.append)
    final = evolve(InitialData.zero(), g, P3, 10.0, observers=[obs])
    assert final.t == pytest.approx(10.0)
    for s in states:
        assert np.all(s.u == 0.0) and np.all(s.v == 0.0)


def test_linear_shift_exact_at_cfl_one():
    # with cfl = 1 the leapfrog update transports a right-mover exactly
    g = GridSpec(-8.0, 8.0, 1600)
    init = InitialData.polynomial_bump(amplitude=1.0, center=-2.0, radius=1.0,
                                       power=3, velocity_fraction=1.0)
    s = evolve(init, g, LINEAR, 3.0)
    expected = init.u0_at(g.nodes - 3.0)
    assert np.abs(s.u - expected).max() <= 1e-12


def test_first_step_trivial_cases():
    g = GridSpec(-2.0, 2.0, 100)
    zero = first_step(InitialData.zero(), g, P3)
    assert np.all(zero.u == 0.0)

    # constant velocity: u1 = dt in the interior (free Taylor step)
    n = g.n_nodes
    init = InitialData.explicit(np.zeros(n), np.ones(n))
    s = first_step(init, g, LINEAR)
    assert np.allclose(s.u[1:-1], g.dt, rtol=0, atol=1e-15)

    # constant displacement: u1 = c - (dt^2/2) c^3 in the interior
    c = 0.7
    init = InitialData.explicit(np.full(n, c), np.zeros(n))
    s = first_step(init, g, P3)
    assert np.allclose(s.u[1:-1], c - 0.5 * g.dt ** 2 * c ** 3, rtol=0, atol=1e-15)


def test_finite_speed_of_propagation_exact_on_lattice():
    g = GridSpec(-10.0, 10.0, 1000)  # dx = 0.02, cfl = 1
    init = InitialData.polynomial_bump(amplitude=1.0, radius=1.0, power=2)
    levels = []
    obs = Observer(times=[2.0, 4.0, 6.0], fn=levels.append)
    evolve(init, g, P3, 6.0, observers=[obs])
    for s in levels:
        outside = np.abs(g.nodes) > 1.0 + s.t + 2 * g.dx + 1e-12
        assert np.all(s.u[outside] == 0.0)


def test_time_reversal_symmetry():
    g = GridSpec(-12.0, 12.0, 1200)  # dx = 0.02
    init = InitialData.gaussian(amplitude=1.0)
    u0, u1 = init.sample(g)
    fwd = evolve(init, g, P3, 2.0)
    back = evolve(InitialData.explicit(fwd.u, -fwd.v), g, P3, 2.0)
    err = np.abs(back.u - u0).max()
    assert err <= 50.0 * g.dx ** 2


def test_determinism_bit_identical():
    g = GridSpec(-8.0, 8.0, 800)
    init = InitialData.gaussian(amplitude=1.0, velocity_fraction=0.3)
    a = evolve(init, g, P3, 2.0)
    b = evolve(init, g, P3, 2.0)
    assert np.all(a.u == b.u) and np.all(a.v == b.v)


def test_domain_too_small():
    g = GridSpec(-5.0, 5.0, 500)
    with pytest.raises(DomainTooSmall):
        evolve(InitialData.gaussian(), g, P3, 10.0)


def test_blowup_detected_for_focusing():
    g = GridSpec(-24.0, 24.0, 4800)
    init = InitialData.polynomial_bump(amplitude=6.0, radius=1.0, power=2)
    with pytest.raises(BlowUpDetected) as info:
        evolve(init, g, Nonlinearity(p=3.0, sign="focusing"), 20.0)
    assert 0.0 < info.value.t < 20.0


def test_observer_beyond_horizon_rejected():
    g = GridSpec(-5.0, 5.0, 500)
    obs = Observer(times=[3.0], fn=lambda s: None)
    with pytest.raises(Exception):
        evolve(InitialData.zero(), g, P3, 1.0, observers=[obs])


def test_trajectory_record_levels():
    g = GridSpec(-4.0, 4.0, 400)
    init = InitialData.polynomial_bump(amplitude=0.5, radius=1.0)
    traj = Trajectory.record(init, g, P3, 1.0)
    assert traj.n_levels == 51
    s = traj.state(traj.level_of(0.5))
    direct = []
    evolve(init, g, P3, 1.0, observers=[Observer([0.5], direct.append)])
    assert np.all(s.u == direct[0].u)
    assert np.all(s.v == direct[0].v)


def test_convergence_order_against_oracle():
    from wavelab1d import dalembert_oracle
    diffs = []
    for dx in (5e-3, 2.5e-3):
        g = GridSpec(-8.0, 8.0, int(round(16 / dx)))
        init = InitialData.gaussian(amplitude=0.5)
        oracle = dalembert_oracle(init, g, P3, 0.25)
        leap = evolve(init, g, P3, 0.25)
        diffs.append(np.abs(oracle.u - leap.u).max())
    ratio = diffs[0] / diffs[1]
    assert 3.0 <= ratio <= 5.0
