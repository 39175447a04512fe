"""Pointwise transformations between (u, u_t, u_x), the Riemann invariants
R, S, the angle variables w, z and the energy densities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

FAMILIES = ("constant", "affine-tanh", "exp-soft")
FAMILY_CODE = {name: k for k, name in enumerate(FAMILIES)}

# +inf stands for an infinite Riemann invariant (angle pi)
SENTINEL = np.inf


@dataclass(frozen=True)
class SpeedFamily:
    """Wave speed c(u) with its derivative and the bounds c0, C0.

    ``c0`` is a uniform lower bound of c and ``C0`` bounds c'/(8 c^2) over
    ``u_range``.  Invalid parameter sets are rejected here, never at
    evaluation time.
    """

    family: str
    params: tuple[float, ...]
    u_range: tuple[float, float] = (-20.0, 20.0)
    c0: float = field(init=False)
    C0: float = field(init=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown speed family {self.family!r}")
        params = tuple(float(v) for v in self.params)
        object.__setattr__(self, "params", params)
        if self.family == "constant":
            if len(params) != 1 or not params[0] > 0:
                raise ValueError("constant family needs one positive parameter c0")
            c0 = params[0]
        else:
            if len(params) != 2:
                raise ValueError(f"{self.family} needs parameters (a, b)")
            a, b = params
            if not (a > b > 0):
                raise ValueError(f"{self.family} requires a > b > 0, got a={a}, b={b}")
            c0 = a - b
        object.__setattr__(self, "c0", c0)
        object.__setattr__(self, "C0", self._sup_source_coeff())

    @property
    def code(self) -> int:
        return FAMILY_CODE[self.family]

    @property
    def a(self) -> float:
        return self.params[0]

    @property
    def b(self) -> float:
        return self.params[1] if len(self.params) > 1 else 0.0

    @property
    def oracle_only(self) -> bool:
        """True for the constant family, which violates c' > 0."""
        return self.family == "constant"

    def c(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == "constant":
            return np.full_like(u, self.a)
        if self.family == "affine-tanh":
            return self.a + self.b * np.tanh(u)
        return self.a + self.b * u / np.sqrt(1.0 + u * u)

    def cprime(self, u):
        u = np.asarray(u, dtype=float)
        if self.family == "constant":
            return np.zeros_like(u)
        if self.family == "affine-tanh":
            return self.b / np.cosh(u) ** 2
        return self.b / (1.0 + u * u) ** 1.5

    def source_coeff(self, u):
        """c'(u) / (8 c(u)^2)."""
        c = self.c(u)
        return self.cprime(u) / (8.0 * c * c)

    def sample_u(self, n: int = 20001) -> np.ndarray:
        return np.linspace(self.u_range[0], self.u_range[1], n)

    def _sup_source_coeff(self) -> float:
        if self.family == "constant":
            return 0.0
        us = self.sample_u()
        vals = self.source_coeff(us)
        k = int(np.argmax(vals))
        lo, hi = us[max(k - 1, 0)], us[min(k + 1, len(us) - 1)]
        res = minimize_scalar(
            lambda s: -float(self.source_coeff(s)), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-12},
        )
        return max(float(vals[k]), -float(res.fun))


def eval_c(fam: SpeedFamily, u):
    return fam.c(u)


def eval_cprime(fam: SpeedFamily, u):
    return fam.cprime(u)


@dataclass(frozen=True)
class InitialData:
    """Samples of (u0, u1) on a uniform x-grid that contains x = 0.

    Both profiles must vanish at the ends of the grid, which is taken to be
    the support interval.
    """

    x: np.ndarray
    u0: np.ndarray
    u1: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        u0 = np.asarray(self.u0, dtype=float)
        u1 = np.asarray(self.u1, dtype=float)
        if x.ndim != 1 or len(x) < 3 or u0.shape != x.shape or u1.shape != x.shape:
            raise ValueError("x, u0, u1 must be 1-d arrays of equal length >= 3")
        dx = np.diff(x)
        if not np.all(dx > 0) or not np.allclose(dx, dx[0], rtol=1e-9, atol=0):
            raise ValueError("x-grid must be uniform and increasing")
        if not (x[0] <= 0.0 <= x[-1]):
            raise ValueError("x-grid must contain the origin")
        if not (np.all(np.isfinite(u0)) and np.all(np.isfinite(u1))):
            raise ValueError("initial data must be finite")
        for name, v in (("u0", u0), ("u1", u1)):
            if abs(v[0]) > 1e-12 or abs(v[-1]) > 1e-12:
                raise ValueError(f"{name} must vanish at the support edges")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "u0", u0)
        object.__setattr__(self, "u1", u1)

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def support(self) -> tuple[float, float]:
        return float(self.x[0]), float(self.x[-1])

    def u0_x(self) -> np.ndarray:
        # second-order centred, one-sided second order at the edges
        return np.gradient(self.u0, self.dx, edge_order=2)

    def h1_norm(self) -> float:
        return float(np.sqrt(np.trapezoid(self.u0**2 + self.u0_x() ** 2, self.x)))

    def l2_norm_u1(self) -> float:
        return float(np.sqrt(np.trapezoid(self.u1**2, self.x)))


@dataclass(frozen=True)
class InvariantField:
    x: np.ndarray
    R: np.ndarray
    S: np.ndarray


@dataclass(frozen=True)
class EnergyDensity:
    E: np.ndarray
    M: np.ndarray


def riemann_invariants(data: InitialData, fam: SpeedFamily) -> InvariantField:
    cu = fam.c(data.u0) * data.u0_x()
    return InvariantField(data.x, data.u1 + cu, data.u1 - cu)


def energy_density(inv: InvariantField, fam: SpeedFamily, u0) -> EnergyDensity:
    R, S = inv.R, inv.S
    return EnergyDensity((R * R + S * S) / 4.0, (S * S - R * R) / (4.0 * fam.c(u0)))


def to_angle(v):
    """2 arctan(v); the sentinel +inf (and -inf, the same point) maps to pi."""
    v = np.asarray(v, dtype=float)
    out = 2.0 * np.arctan(v)
    out = np.where(np.isinf(v), np.pi, out)
    return out if out.ndim else float(out)


def total_energy(inv: InvariantField) -> float:
    return 0.25 * float(np.trapezoid(inv.R**2 + inv.S**2, inv.x))


# -- initial data builders ---------------------------------------------------

DATA_KINDS = ("zero", "gaussian", "sine-packet", "square-pulse")

_DATA_DEFAULTS = {
    "zero": (),
    "gaussian": (0.5, 0.3, 0.0, 0.0),
    "sine-packet": (0.2, 0.4, 8.0, 0.0),
    "square-pulse": (1.0, 0.0, 1.0),
}


def _grid(support, dx):
    lo, hi = support
    if not lo < 0.0 < hi:
        raise ValueError("support must contain 0 in its interior")
    n_lo = int(round(-lo / dx))
    n_hi = int(round(hi / dx))
    return dx * np.arange(-n_lo, n_hi + 1, dtype=float)


def _taper(x, v):
    # force exact zeros at the grid ends (profiles are negligible there)
    v = v.copy()
    v[0] = v[-1] = 0.0
    return v


def make_data(kind: str, params, support, dx: float, fam: SpeedFamily) -> InitialData:
    """Build sampled initial data of a named kind.

    gaussian:     amp, width, center, drift
    sine-packet:  amp, width, wavenumber, drift
    square-pulse: amp, left, right  (u0 = 0, u1 = amp on [left, right])

    ``drift`` sets u1 = drift * c(u0) * u0_x, so drift = +1 gives a purely
    left-moving pulse (S = 0) and drift = -1 a purely right-moving one.
    """
    if kind not in DATA_KINDS:
        raise ValueError(f"unknown data kind {kind!r}")
    defaults = _DATA_DEFAULTS[kind]
    params = tuple(float(p) for p in params)
    if len(params) > len(defaults):
        raise ValueError(f"{kind} takes at most {len(defaults)} parameters")
    params = params + defaults[len(params):]
    x = _grid(support, dx)
    zero = np.zeros_like(x)
    if kind == "zero":
        return InitialData(x, zero, zero.copy())
    if kind == "square-pulse":
        amp, left, right = params
        u1 = np.where((x >= left - 1e-12) & (x <= right + 1e-12), amp, 0.0)
        return InitialData(x, zero, _taper(x, u1))
    if kind == "gaussian":
        amp, width, center, drift = params
        u0 = amp * np.exp(-(((x - center) / width) ** 2))
    else:
        amp, width, k, drift = params
        u0 = amp * np.exp(-((x / width) ** 2)) * np.sin(k * x)
    u0 = _taper(x, u0)
    u0x = np.gradient(u0, dx, edge_order=2)
    u1 = _taper(x, drift * fam.c(u0) * u0x)
    return InitialData(x, u0, u1)
