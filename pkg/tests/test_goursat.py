import numpy as np
import pytest

from conftest import solve
from varwave import (PQBoundViolation, SolverConfig, SpeedFamily, build_boundary,
                     check_pq_closed, integrate, make_data, rhs, riemann_invariants, theta_eps,
                     theta_sharp)
from varwave.goursat import BOUNDARY, INTERIOR, OUTER, conservation_defect, pq_bound


def test_theta_sharp_values():
    assert theta_sharp(0.0, 0.0) == 1.0
    assert theta_sharp(np.pi, 0.0) == 0.0
    assert theta_sharp(0.0, np.pi) == 0.0
    assert theta_sharp(np.pi - 1e-9, np.pi - 1e-9) == 1.0


@pytest.mark.parametrize("eps", [0.2, 0.5])
def test_theta_eps_values(eps):
    assert theta_eps(np.pi, 0.0, eps) == 1.0
    assert theta_eps(np.pi + eps**3, 0.0, eps) == 0.0
    assert theta_eps(0.0, np.pi + eps**3 / 2, eps) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        theta_eps(0.0, 0.0, 0.0)


def test_rhs_closed_form(tanh21):
    w_Y, z_X, p_Y, q_X, u_Y, u_X = rhs((0.0, np.pi / 2, 0.0, 1.0, 1.0), tanh21)
    assert w_Y == pytest.approx(1 / 32, rel=1e-14)
    # independent evaluation: k = c'/(8c^2) = 1/32 at u = 0
    assert z_X == pytest.approx(-1 / 32, rel=1e-14)
    assert p_Y == pytest.approx(-1 / 32, rel=1e-14) and q_X == pytest.approx(1 / 32, rel=1e-14)
    assert u_Y == 0.0 and u_X == pytest.approx(1 / 8)


@pytest.mark.parametrize("mode,eps", [("conservative", 0.0), ("dissipative-sharp", 0.0), ("regularized", 0.3)])
def test_rhs_equal_angles(tanh21, mode, eps):
    for a in (-2.0, 0.3, 1.5):
        w_Y, z_X, p_Y, q_X, *_ = rhs((0.4, a, a, 1.3, 0.7), tanh21, mode, eps)
        drift = eps if mode == "regularized" else 0.0
        assert w_Y == pytest.approx(drift, abs=1e-15) and z_X == pytest.approx(drift, abs=1e-15)
        assert p_Y == pytest.approx(0.0, abs=1e-15) and q_X == pytest.approx(0.0, abs=1e-15)


def test_rhs_regularized_above_band(tanh21):
    eps = 0.3
    w_Y, z_X, p_Y, q_X, *_ = rhs((0.1, np.pi + eps**3, 0.2, 1.1, 0.9), tanh21, "regularized", eps)
    assert (w_Y, z_X, p_Y, q_X) == (eps, eps, 0.0, 0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(M=1.0, h=0.01, mode="weird")
    with pytest.raises(ValueError):
        SolverConfig(M=1.0, h=0.01, mode="regularized", epsilon=0.0)
    with pytest.raises(ValueError):
        SolverConfig(M=1.0, h=0.01, mode="regularized", epsilon=0.2)  # needs h <= 0.002
    SolverConfig(M=1.0, h=0.002, mode="regularized", epsilon=0.2)
    with pytest.raises(ValueError):
        SolverConfig(M=1.0, h=0.01, corrector_iters=0)


@pytest.mark.parametrize("mode,eps,h", [("conservative", 0, 0.02), ("dissipative-sharp", 0, 0.02),
                                        ("regularized", 0.4, 0.016)])
def test_zero_data_fixed_point(tanh21, mode, eps, h):
    data = make_data("zero", (), (-1, 1), 1e-2, tanh21)
    g = solve(tanh21, data, 1.5, h, mode, eps, xt=False)
    a = g.active
    if mode == "regularized":
        # the drift eps moves w and z even without data
        assert np.all(g.p[a] == 1.0) and np.all(g.q[a] == 1.0)
    else:
        for f, v in ((g.u, 0), (g.w, 0), (g.z, 0), (g.p, 1), (g.q, 1)):
            assert np.all(f[a] == v)


def test_constant_speed_transports_traces(unit_speed):
    data = make_data("gaussian", (0.5, 0.3, 0.0, 0.4), (-2, 2), 1e-3, unit_speed)
    g = solve(unit_speed, data, 2.0, 0.02, xt=False)
    a = g.active
    W = np.broadcast_to(g.curve.wbar_of_X(g.X)[None, :], g.w.shape)
    Z = np.broadcast_to(g.curve.zbar_of_Y(g.Y)[:, None], g.z.shape)
    assert np.all(g.w[a] == W[a]) and np.all(g.z[a] == Z[a])
    assert np.all(g.p[a] == 1.0) and np.all(g.q[a] == 1.0)


def test_mask_layout(smooth_run):
    _, g, _ = smooth_run
    m = g.mask
    assert set(np.unique(m)) == {OUTER, BOUNDARY, INTERIOR}
    # every interior node has non-outer lower and left neighbours
    J, I = np.nonzero(m == INTERIOR)
    assert np.all(m[J - 1, I] != OUTER) and np.all(m[J, I - 1] != OUTER)
    assert np.all(g.p[g.active] > 0) and np.all(g.q[g.active] > 0)


def test_pq_closed_trivial_runs(zero_run, unit_speed):
    _, g, _ = zero_run
    assert check_pq_closed(g) == 0.0
    data = make_data("gaussian", (0.5, 0.3), (-2, 2), 1e-3, unit_speed)
    assert check_pq_closed(solve(unit_speed, data, 1.5, 0.02, xt=False)) == 0.0


def test_pq_a_priori_bounds(smooth_run, sharp_run):
    for g in (smooth_run[1], sharp_run[0]):
        C = pq_bound(g.fam, g.config.M, g.E0)
        a = g.in_omega
        for f in (g.p, g.q):
            assert np.all(f[a] >= 1 / C) and np.all(f[a] <= C)


def test_row_column_conservation(smooth_run):
    _, g, _ = smooth_run
    assert conservation_defect(g) <= 5 * g.h


def test_sharp_trapping(sharp_run):
    g, _ = sharp_run
    a = g.active
    hit = a & (g.w >= np.pi)
    assert hit.any()
    # once w >= pi, it stays above pi - 10h up each column
    col_hit = np.maximum.accumulate(hit, axis=0)
    assert np.all(g.w[col_hit & a] >= np.pi - 10 * g.h)
    hitz = a & (g.z >= np.pi)
    row_hit = np.maximum.accumulate(hitz, axis=1)
    assert np.all(g.z[row_hit & a] >= np.pi - 10 * g.h)


def test_sharp_matches_conservative_below_cutoff(tanh21):
    data = make_data("gaussian", (0.2, 0.3), (-1.5, 1.5), 1e-3, tanh21)
    gc = solve(tanh21, data, 1.5, 0.02, xt=False)
    gs = solve(tanh21, data, 1.5, 0.02, "dissipative-sharp", xt=False)
    assert np.max(np.maximum(gc.w, gc.z)[gc.active]) < np.pi - 0.1
    for k in ("u", "w", "z", "p", "q"):
        assert np.array_equal(getattr(gc, k), getattr(gs, k))


def test_regularized_close_to_conservative_below_cutoff(tanh21):
    data = make_data("gaussian", (0.2, 0.3), (-1.5, 1.5), 1e-3, tanh21)
    gc = solve(tanh21, data, 1.0, 0.004, xt=False)
    errs = []
    for eps in (0.4, 0.2):
        gr = solve(tanh21, data, 1.0, 0.004 if eps == 0.4 else 0.002, "regularized", eps, xt=False)
        X0 = np.searchsorted(gr.X, 0.5)
        Y0 = np.searchsorted(gr.Y, 0.5)
        i0, j0 = np.searchsorted(gc.X, 0.5), np.searchsorted(gc.Y, 0.5)
        errs.append(abs(gr.u[Y0, X0] - gc.u[j0, i0]) + abs(gr.p[Y0, X0] - gc.p[j0, i0]))
    # the regularized solution moves toward the conservative one as eps shrinks
    assert errs[1] < errs[0] and errs[0] <= 0.4


def test_determinism(tanh21):
    data = make_data("sine-packet", (0.3, 0.4, 9.0, 0.2), (-2, 2), 1e-3, tanh21)
    g1 = solve(tanh21, data, 1.5, 0.01, "dissipative-sharp", xt=False)
    g2 = solve(tanh21, data, 1.5, 0.01, "dissipative-sharp", xt=False)
    for k in ("u", "w", "z", "p", "q", "theta"):
        assert np.array_equal(getattr(g1, k), getattr(g2, k))


def test_pq_violation_on_coarse_lattice():
    # steep data and a step far too large for it drive p negative
    fam = SpeedFamily("affine-tanh", (2.0, 1.9))
    data = make_data("gaussian", (1.0, 0.05, 0.0, 1.0), (-1, 1), 1e-4, fam)
    curve = build_boundary(riemann_invariants(data, fam), data)
    with pytest.raises(PQBoundViolation, match="outside"):
        integrate(curve, fam, SolverConfig(M=3.0, h=0.5))


def test_pq_bound_saturates(tanh21):
    assert pq_bound(tanh21, 1.0, 0.0) == pytest.approx(np.exp(8 / 24))
    assert pq_bound(SpeedFamily("affine-tanh", (1.0, 0.95)), 4.0, 40.0) == np.inf
