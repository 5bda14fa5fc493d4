import numpy as np
import pytest

from wavelab1d import (GridSpec, InitialData, NoContraction, Nonlinearity,
                       dalembert_oracle, evolve, evolve_by_dalembert,
                       picard_fixed_point)
from wavelab1d.dalembert import linear_part, nonlinear_integral

P3 = Nonlinearity(p=3.0)
LINEAR = Nonlinearity(p=3.0, sign="disabled")


def _grid(dx, half=8.0):
    return GridSpec(-half, half, int(round(2 * half / dx)))


def test_zero_data_converges_in_one_iteration():
    g = _grid(0.01)
    res = picard_fixed_point(InitialData.zero(), g, P3, 0.25)
    assert res.iterations == 1
    assert np.all(res.levels == 0.0)


def test_disabled_returns_linear_evaluation():
    g = _grid(0.01)
    init = InitialData.gaussian(amplitude=1.0, velocity_fraction=0.4)
    res = picard_fixed_point(init, g, LINEAR, 0.5)
    assert res.iterations == 1
    assert np.all(res.levels == res.linear_part)
    # and the linear lattice evolution agrees with the leapfrog at cfl = 1
    leap = evolve(init, g, LINEAR, 0.5)
    assert np.abs(res.levels[-1] - leap.u).max() <= 1e-12


def test_fixed_point_property():
    # one more application of the transform moves the solution < of twice
    # the convergence tolerance
    g = _grid(0.005)
    tol = 1e-12
    init = InitialData.gaussian(amplitude=0.5)
    res = picard_fixed_point(init, g, P3, 0.25, tol_fixed_point=tol)
    again = res.linear_part + nonlinear_integral(res.levels, P3, g.dx)
    assert np.abs(again - res.levels).max() < 2 * tol


def test_no_contraction_raised():
    g = _grid(0.005)
    with pytest.raises(NoContraction):
        dalembert_oracle(InitialData.gaussian(amplitude=1.0), g, P3, 0.5)


def test_non_convergence_on_iteration_cap():
    from wavelab1d import NonConvergence
    g = _grid(0.01)
    with pytest.raises(NonConvergence):
        picard_fixed_point(InitialData.gaussian(amplitude=0.1), g, P3, 0.25,
                           max_iterations=1)


def test_oracle_richardson_consistency():
    # oracle vs evolve mismatch is controlled by the two-grid mutual
    # difference: both errors are O(dx^2), with the oracle's quadrature
    # constant measured at about 2.5x the leapfrog's
    init = InitialData.gaussian(amplitude=0.1)
    g1 = _grid(5e-3)
    g2 = _grid(2.5e-3)
    o1 = dalembert_oracle(init, g1, P3, 0.25)
    e1 = evolve(init, g1, P3, 0.25)
    e2 = evolve(init, g2, P3, 0.25)
    mutual = np.abs(e1.u - e2.u[::2]).max()
    assert np.abs(o1.u - e1.u).max() <= 3.0 * mutual


def test_windowed_oracle_matches_leapfrog_beyond_one_window():
    g = _grid(5e-3)
    init = InitialData.gaussian(amplitude=1.0)
    st = evolve_by_dalembert(init, g, P3, 0.5)
    leap = evolve(init, g, P3, 0.5)
    assert st.t == pytest.approx(0.5)
    assert np.abs(st.u - leap.u).max() <= 10.0 * g.dx ** 2


def test_linear_part_matches_dalembert_formula():
    # closed-form check: u0 even bump, u1 = 0 gives the two-shift average
    g = _grid(0.01, half=4.0)
    init = InitialData.polynomial_bump(amplitude=1.0, radius=1.0, power=2)
    K = 30
    L = linear_part(init, g, K)
    x = g.nodes
    t = K * g.dx
    expected = 0.5 * (init.u0_at(x - t) + init.u0_at(x + t))
    assert np.abs(L[K] - expected).max() <= 1e-10
