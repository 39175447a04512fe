import numpy as np
import pytest
from scipy.integrate import quad

from varwave import (InitialData, InvariantField, SpeedFamily, energy_density, eval_c, eval_cprime,
                     make_data, riemann_invariants, to_angle, total_energy)
from varwave.wavefield import SENTINEL


def test_affine_tanh_values_at_zero(tanh21):
    assert eval_c(tanh21, 0.0) == 2.0
    assert eval_cprime(tanh21, 0.0) == 1.0


def test_constant_family(unit_speed):
    u = np.linspace(-3, 3, 7)
    assert np.all(eval_c(unit_speed, u) == 1.0)
    assert np.all(eval_cprime(unit_speed, u) == 0.0)
    assert unit_speed.oracle_only and unit_speed.C0 == 0.0


@pytest.mark.parametrize("family", ["affine-tanh", "exp-soft"])
def test_speed_monotone_and_bounded_below(family):
    fam = SpeedFamily(family, (2.0, 1.0))
    u = fam.sample_u()
    c = fam.c(u)
    # tanh saturates in double precision near |u| = 20, so strictness is checked on [-5, 5]
    mid = np.abs(u) <= 5
    assert np.all(np.diff(c[mid]) > 0)
    assert np.all(c >= fam.c0) and fam.c0 == 1.0
    assert np.all(fam.cprime(u) > 0)
    assert fam.C0 >= np.max(fam.source_coeff(u))


def test_affine_tanh_C0_closed_form():
    # c'/(8c^2) = sech^2/(8(2+tanh)^2) peaks at tanh u = -1/2: (3/4)/(8*9/4) = 1/24
    assert SpeedFamily("affine-tanh", (2.0, 1.0)).C0 == pytest.approx(1 / 24, rel=1e-9)


@pytest.mark.parametrize("params", [(1.0, 1.0), (1.0, 2.0), (1.0, -0.5), (1.0,)])
def test_bad_parameters_rejected_at_construction(params):
    with pytest.raises(ValueError):
        SpeedFamily("affine-tanh", params)


def test_initial_data_validation():
    x = np.linspace(-1, 1, 21)
    with pytest.raises(ValueError):
        InitialData(x, np.ones_like(x), np.zeros_like(x))
    with pytest.raises(ValueError):
        InitialData(np.linspace(0.1, 1, 5), np.zeros(5), np.zeros(5))
    with pytest.raises(ValueError):
        InitialData(x**3, np.zeros_like(x), np.zeros_like(x))


def test_zero_data_invariants(tanh21):
    inv = riemann_invariants(make_data("zero", (), (-1, 1), 1e-2, tanh21), tanh21)
    assert np.all(inv.R == 0) and np.all(inv.S == 0)
    assert total_energy(inv) == 0.0


def test_pure_velocity_gives_equal_invariants(tanh21):
    data = make_data("square-pulse", (0.7, -0.2, 0.3), (-1, 1), 1e-3, tanh21)
    inv = riemann_invariants(data, tanh21)
    assert np.array_equal(inv.R, data.u1) and np.array_equal(inv.S, data.u1)


def test_even_bump_symmetry(unit_speed):
    # u0 even and u1 = 0 make R = c u0_x odd, so S = -R is the mirror of R
    data = make_data("gaussian", (0.5, 0.3), (-2, 2), 1e-3, unit_speed)
    inv = riemann_invariants(data, unit_speed)
    assert np.allclose(inv.S, inv.R[::-1], atol=1e-12)
    assert np.allclose(inv.S, -inv.R, atol=1e-15)


def test_to_angle_values():
    assert to_angle(0.0) == 0.0
    assert to_angle(1.0) == pytest.approx(np.pi / 2)
    assert to_angle(SENTINEL) == np.pi
    assert to_angle(-np.inf) == np.pi


def test_to_angle_roundtrip():
    v = np.concatenate([-np.logspace(-6, 5, 50), [0.0], np.logspace(-6, 5, 50)])
    a = to_angle(v)
    assert np.all((a > -np.pi) & (a <= np.pi))
    back = np.tan(a / 2)
    small = np.abs(v) <= 1e3
    assert np.allclose(back[small], v[small], rtol=1e-12, atol=0)
    # beyond that the angle's own rounding (about 4e-16 near pi) dominates
    rel = np.abs(back - v) / np.abs(np.where(v == 0, 1, v))
    assert np.all(rel[~small] <= 4 * np.finfo(float).eps * np.abs(v[~small]))


def test_total_energy_box():
    x = np.linspace(-1, 2, 300001)
    one = ((x >= 0) & (x <= 1)).astype(float)
    assert total_energy(InvariantField(x, one, one)) == pytest.approx(0.5, abs=1e-4)


def test_total_energy_matches_adaptive_quadrature():
    x = np.arange(-4000, 4001) * 1e-3
    R = np.exp(-x**2)
    S = 0.5 * np.exp(-((x - 0.3) / 0.7) ** 2)
    ref = 0.25 * quad(lambda s: np.exp(-2 * s * s) + 0.25 * np.exp(-2 * ((s - 0.3) / 0.7) ** 2), -4, 4,
                      epsabs=1e-14)[0]
    assert abs(total_energy(InvariantField(x, R, S)) - ref) <= 1e-8


def test_total_energy_halves_under_scaling():
    x = np.arange(-3000, 3001) * 1e-3
    inv = InvariantField(x, np.exp(-x**2), np.sin(x) * np.exp(-x**2))
    half = InvariantField(x, inv.R / np.sqrt(2), inv.S / np.sqrt(2))
    assert total_energy(half) == pytest.approx(total_energy(inv) / 2, rel=1e-12)


def test_energy_density_identities(tanh21):
    data = make_data("sine-packet", (0.3, 0.4, 6.0, 0.5), (-2, 2), 1e-3, tanh21)
    inv = riemann_invariants(data, tanh21)
    ed = energy_density(inv, tanh21, data.u0)
    c = tanh21.c(data.u0)
    assert np.allclose(ed.E, 0.5 * (data.u1**2 + (c * data.u0_x()) ** 2), atol=1e-14, rtol=1e-12)
    assert np.allclose(ed.M, (inv.S**2 - inv.R**2) / (4 * c), atol=1e-14)
    assert np.all(ed.E >= 0)


def test_drift_one_is_left_moving(tanh21):
    data = make_data("gaussian", (0.3, 0.2, 0.0, 1.0), (-1, 1), 1e-3, tanh21)
    inv = riemann_invariants(data, tanh21)
    # the end samples carry the edge taper of u1
    assert np.max(np.abs(inv.S[1:-1])) < 1e-12 < np.max(np.abs(inv.R))


def test_make_data_unknown_kind(tanh21):
    with pytest.raises(ValueError):
        make_data("triangle", (), (-1, 1), 1e-2, tanh21)
