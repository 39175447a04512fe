"""Lattice integrator for the semilinear system in (w, z, p, q, u) over the
truncated domain Omega_M.

Three modes share one scheme: ``conservative`` (theta = 1),
``dissipative-sharp`` (theta switches off the sources once max{w, z}
reaches pi) and ``regularized`` (a continuous cutoff of width eps^3 plus a
drift eps in w_Y and z_X).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from varwave.charmap import BoundaryCurve, Feet, Lattice, extend_outer
from varwave.wavefield import SpeedFamily

MODES = ("conservative", "dissipative-sharp", "regularized")
MODE_CODE = {name: k for k, name in enumerate(MODES)}

OUTER, BOUNDARY, INTERIOR = 0, 1, 2


class SolverError(RuntimeError):
    pass


class PQBoundViolation(SolverError):
    """p or q left (0, 2C]; usually the lattice spacing is too coarse."""


class NonFiniteField(SolverError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    M: float
    h: float
    mode: str = "conservative"
    epsilon: float = 0.0
    corrector_iters: int = 2

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if not (self.h > 0 and self.M > 0):
            raise ValueError("h and M must be positive")
        if int(self.corrector_iters) < 1:
            raise ValueError("corrector_iters must be >= 1")
        if self.mode == "regularized":
            if not self.epsilon > 0:
                raise ValueError("regularized mode needs epsilon > 0")
            # the cutoff band of width eps^3 has to be resolved by the lattice
            if self.h > self.epsilon**3 / 4 * (1 + 1e-9):
                raise ValueError(
                    f"regularized mode needs h <= eps^3/4 = {self.epsilon**3 / 4:.6g}, got h={self.h}"
                )

    @property
    def mode_code(self) -> int:
        return MODE_CODE[self.mode]


def pq_bound(fam: SpeedFamily, M: float, E0: float) -> float:
    """exp(8 C0 (M + 2 E0)), the a priori bound on p, q and 1/p, 1/q."""
    e = 8.0 * fam.C0 * (M + 2.0 * E0)
    return math.exp(e) if e < 700.0 else math.inf


@dataclass
class CharGrid:
    """Solution on the lattice; arrays are indexed [j, i] = (Y_j, X_i)."""

    lattice: Lattice
    config: SolverConfig
    fam: SpeedFamily
    curve: BoundaryCurve
    feet: Feet
    u: np.ndarray
    w: np.ndarray
    z: np.ndarray
    p: np.ndarray
    q: np.ndarray
    theta: np.ndarray
    mask: np.ndarray

    @property
    def h(self) -> float:
        return self.lattice.h

    @property
    def X(self) -> np.ndarray:
        return self.lattice.X

    @property
    def Y(self) -> np.ndarray:
        return self.lattice.Y

    @property
    def E0(self) -> float:
        return self.curve.E0

    @property
    def active(self) -> np.ndarray:
        return self.mask != OUTER

    @property
    def in_omega(self) -> np.ndarray:
        """Non-outer nodes with X <= M and Y <= M."""
        M = self.config.M + 1e-12
        return self.active & (self.Y[:, None] <= M) & (self.X[None, :] <= M)

    def fields(self) -> dict[str, np.ndarray]:
        return {"u": self.u, "w": self.w, "z": self.z, "p": self.p, "q": self.q}


# -- pointwise pieces ---------------------------------------------------------


def theta_sharp(w, z):
    """1 below the cutoff, 0 once max{w, z} >= pi (tie goes to 0)."""
    m = np.maximum(w, z)
    out = np.where(m < np.pi, 1.0, 0.0)
    return out if out.ndim else float(out)


def theta_eps(w, z, eps: float):
    """1 for max{w, z} <= pi, 0 for max >= pi + eps^3, affine between."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    m = np.maximum(w, z)
    out = np.clip(1.0 - (m - np.pi) / eps**3, 0.0, 1.0)
    return out if np.ndim(out) else float(out)


def singular_angle(mode: str, a):
    """bool mask of angles counted as singular (a >= pi).

    In conservative mode the sources see only cos and sin, so an angle that
    went past pi is read modulo 2 pi and only the instant of crossing counts.
    """
    a = np.asarray(a, dtype=float)
    if mode == "conservative":
        a = np.mod(a + np.pi, 2.0 * np.pi) - np.pi
    return a >= np.pi


def _theta(mode: str, w, z, eps: float):
    if mode == "conservative":
        return np.ones_like(np.asarray(w + z, dtype=float))
    if mode == "dissipative-sharp":
        return theta_sharp(w, z)
    return theta_eps(w, z, eps)


def rhs(state, fam: SpeedFamily, mode: str = "conservative", eps: float = 0.0, theta=None):
    """Right-hand sides (w_Y, z_X, p_Y, q_X, u_Y, u_X) at the state (u, w, z, p, q).

    ``theta`` overrides the mode's cutoff when given.
    """
    u, w, z, p, q = (np.asarray(v, dtype=float) for v in state)
    if theta is None:
        theta = _theta(mode, w, z, eps)
    drift = eps if mode == "regularized" else 0.0
    c = fam.c(u)
    k = theta * fam.cprime(u) / (8.0 * c * c)
    w_Y = k * (np.cos(z) - np.cos(w)) * q + drift
    z_X = k * (np.cos(w) - np.cos(z)) * p + drift
    p_Y = k * (np.sin(z) - np.sin(w)) * p * q
    q_X = -p_Y
    u_Y = np.sin(z) * q / (4.0 * c)
    u_X = np.sin(w) * p / (4.0 * c)
    return w_Y, z_X, p_Y, q_X, u_Y, u_X


# -- compiled sweep -----------------------------------------------------------


@numba.njit(cache=True, inline="always")
def _speed(code, a, b, u):
    if code == 0:
        return a, 0.0
    if code == 1:
        th = math.tanh(u)
        return a + b * th, b * (1.0 - th * th)
    s = math.sqrt(1.0 + u * u)
    return a + b * u / s, b / (s * s * s)


@numba.njit(cache=True, inline="always")
def _theta_nb(mode, w, z, eps):
    m = max(w, z)
    if mode == 0:
        return 1.0
    if mode == 1:
        return 1.0 if m < math.pi else 0.0
    if m <= math.pi:
        return 1.0
    t = 1.0 - (m - math.pi) / (eps * eps * eps)
    return t if t > 0.0 else 0.0


@numba.njit(cache=True, inline="always")
def _vertical_rhs(code, a, b, th, drift, u, w, z, p, q):
    # (w_Y, p_Y, u_Y)
    c, cp = _speed(code, a, b, u)
    k = th * cp / (8.0 * c * c)
    sz = math.sin(z)
    return (
        k * (math.cos(z) - math.cos(w)) * q + drift,
        k * (sz - math.sin(w)) * p * q,
        sz * q / (4.0 * c),
    )


@numba.njit(cache=True, inline="always")
def _horizontal_rhs(code, a, b, th, drift, u, w, z, p, q):
    # (z_X, q_X)
    c, cp = _speed(code, a, b, u)
    k = th * cp / (8.0 * c * c)
    return (
        k * (math.cos(w) - math.cos(z)) * p + drift,
        k * (math.sin(w) - math.sin(z)) * p * q,
    )


@numba.njit(cache=True)
def _node(j, i, w, z, p, q, u, theta, outer, X, Y, h,
          col_phi, col_w, col_z, col_u, row_phiinv, row_w, row_z, row_u,
          code, a, b, mode, eps, iters):
    drift = eps if mode == 2 else 0.0

    # lower neighbour, or the foot of the column on gamma
    if j > 0 and not outer[j - 1, i]:
        bw, bz, bp, bq, bu = w[j - 1, i], z[j - 1, i], p[j - 1, i], q[j - 1, i], u[j - 1, i]
        dy = h
    else:
        bw, bz, bp, bq, bu = col_w[i], col_z[i], 1.0, 1.0, col_u[i]
        dy = max(Y[j] - col_phi[i], 0.0)
    # left neighbour, or the foot of the row on gamma
    if i > 0 and not outer[j, i - 1]:
        aw, az, ap, aq, au = w[j, i - 1], z[j, i - 1], p[j, i - 1], q[j, i - 1], u[j, i - 1]
        dx = h
    else:
        aw, az, ap, aq, au = row_w[j], row_z[j], 1.0, 1.0, row_u[j]
        dx = max(X[i] - row_phiinv[j], 0.0)

    thb = _theta_nb(mode, bw, bz, eps)
    tha = _theta_nb(mode, aw, az, eps)
    fbw, fbp, gbu = _vertical_rhs(code, a, b, thb, drift, bu, bw, bz, bp, bq)
    faz, faq = _horizontal_rhs(code, a, b, tha, drift, au, aw, az, ap, aq)

    # predictor: explicit Euler along each characteristic direction
    nw = bw + dy * fbw
    np_ = bp + dy * fbp
    nu = bu + dy * gbu
    nz = az + dx * faz
    nq = aq + dx * faq

    # sharp mode: the cutoff is frozen at its predictor value
    th = _theta_nb(mode, nw, nz, eps)
    for _ in range(iters):
        if mode != 1:
            th = _theta_nb(mode, nw, nz, eps)
        fw, fp, gu = _vertical_rhs(code, a, b, th, drift, nu, nw, nz, np_, nq)
        fz, fq = _horizontal_rhs(code, a, b, th, drift, nu, nw, nz, np_, nq)
        nw, np_, nu, nz, nq = (
            bw + 0.5 * dy * (fbw + fw),
            bp + 0.5 * dy * (fbp + fp),
            bu + 0.5 * dy * (gbu + gu),
            az + 0.5 * dx * (faz + fz),
            aq + 0.5 * dx * (faq + fq),
        )
    w[j, i] = nw
    z[j, i] = nz
    p[j, i] = np_
    q[j, i] = nq
    u[j, i] = nu
    theta[j, i] = th


@numba.njit(cache=True)
def _sweep(w, z, p, q, u, theta, outer, X, Y, h,
           col_phi, col_w, col_z, col_u, row_phiinv, row_w, row_z, row_u,
           code, a, b, mode, eps, iters, pq_hi):
    """Process anti-diagonals i + j = d in increasing d.

    Nodes on one diagonal depend only on the previous diagonal and write only
    themselves, so their order within a diagonal is immaterial.
    Returns (status, j, i): 0 ok, 1 p/q bound violated, 2 non-finite value.
    """
    n = X.shape[0]
    for d in range(2 * n - 1):
        i0 = max(0, d - n + 1)
        i1 = min(d, n - 1)
        for i in range(i0, i1 + 1):
            j = d - i
            if outer[j, i]:
                continue
            _node(j, i, w, z, p, q, u, theta, outer, X, Y, h,
                  col_phi, col_w, col_z, col_u, row_phiinv, row_w, row_z, row_u,
                  code, a, b, mode, eps, iters)
            pv = p[j, i]
            qv = q[j, i]
            if not (math.isfinite(pv) and math.isfinite(qv) and math.isfinite(w[j, i])
                    and math.isfinite(z[j, i]) and math.isfinite(u[j, i])):
                return 2, j, i
            if pv <= 0.0 or qv <= 0.0 or pv > pq_hi or qv > pq_hi:
                return 1, j, i
    return 0, -1, -1


def integrate(curve: BoundaryCurve, fam: SpeedFamily, cfg: SolverConfig) -> CharGrid:
    """Solve the Goursat problem with data on gamma over the window covering Omega_M.

    Each node is computed from its lower and left neighbours (or from the
    feet of its column and row on gamma) by an Euler predictor followed by
    ``cfg.corrector_iters`` trapezoidal corrections.
    """
    lat = Lattice.covering(curve, cfg.M, cfg.h)
    layer = extend_outer(curve, lat)
    w, z, p, q, u = layer.w, layer.z, layer.p, layer.q, layer.u
    feet = layer.feet
    theta = np.ones_like(w)
    X = lat.X
    C = pq_bound(fam, cfg.M, curve.E0)
    status, j, i = _sweep(
        w, z, p, q, u, theta, layer.outer, X, X, lat.h,
        feet.col_phi, feet.col_w, feet.col_z, feet.col_u,
        feet.row_phiinv, feet.row_w, feet.row_z, feet.row_u,
        fam.code, fam.a, fam.b, cfg.mode_code, float(cfg.epsilon),
        int(cfg.corrector_iters), 2.0 * C,
    )
    if status == 1:
        raise PQBoundViolation(
            f"p={p[j, i]:.6g}, q={q[j, i]:.6g} outside (0, {2 * C:.6g}] at X={X[i]:.6g}, Y={X[j]:.6g}"
        )
    if status == 2:
        raise NonFiniteField(f"non-finite field value at X={X[i]:.6g}, Y={X[j]:.6g}")

    outer = layer.outer
    mask = np.full(outer.shape, INTERIOR, dtype=np.int8)
    edge = np.zeros_like(outer)
    edge[0, :] = True
    edge[:, 0] = True
    edge[1:, :] |= outer[:-1, :]
    edge[:, 1:] |= outer[:, :-1]
    mask[edge] = BOUNDARY
    mask[outer] = OUTER
    return CharGrid(lat, cfg, fam, curve, feet, u, w, z, p, q, theta, mask)


def interior_cells(grid: CharGrid) -> np.ndarray:
    """bool[j, i] for cells [X_i, X_i+1] x [Y_j, Y_j+1] whose corners are all non-outer."""
    a = grid.active
    return a[:-1, :-1] & a[1:, :-1] & a[:-1, 1:] & a[1:, 1:]


def check_pq_closed(grid: CharGrid) -> float:
    """Largest cell loop integral of p dX - q dY divided by the cell area."""
    p, q, h = grid.p, grid.q, grid.h
    cells = interior_cells(grid)
    if not cells.any():
        raise ValueError("grid has no interior cells")
    p_bottom = 0.5 * (p[:-1, :-1] + p[:-1, 1:])
    p_top = 0.5 * (p[1:, :-1] + p[1:, 1:])
    q_left = 0.5 * (q[:-1, :-1] + q[1:, :-1])
    q_right = 0.5 * (q[:-1, 1:] + q[1:, 1:])
    loop = (p_bottom - p_top + q_left - q_right) / h
    return float(np.max(np.abs(loop[cells])))


def conservation_defect(grid: CharGrid, samples: int = 64) -> float:
    """Worst mismatch, over sampled nodes, between the row/column sums of p and q
    and X - phi^-1(Y) + Y - phi(X), divided by the path length."""
    from varwave.charmap import phi, phi_inv

    lay, h = grid.feet, grid.h
    X, Y = grid.X, grid.Y
    act = grid.in_omega
    js, is_ = np.nonzero(act)
    if len(js) == 0:
        return 0.0
    pick = np.linspace(0, len(js) - 1, min(samples, len(js))).astype(int)
    worst = 0.0
    for j, i in zip(js[pick], is_[pick]):
        row = grid.active[j, : i + 1]
        i0 = int(np.argmax(row))
        col = grid.active[: j + 1, i]
        j0 = int(np.argmax(col))
        # trapezoid along the row from the foot on gamma, then along the column
        fx = X[i0] - lay.row_phiinv[j]
        prow = 0.5 * fx * (1.0 + grid.p[j, i0]) + h * (np.sum(grid.p[j, i0:i + 1]) - 0.5 * (grid.p[j, i0] + grid.p[j, i]))
        fy = Y[j0] - lay.col_phi[i]
        qcol = 0.5 * fy * (1.0 + grid.q[j0, i]) + h * (np.sum(grid.q[j0:j + 1, i]) - 0.5 * (grid.q[j0, i] + grid.q[j, i]))
        exact = X[i] - phi_inv(grid.curve, Y[j]) + Y[j] - phi(grid.curve, X[i])
        length = (X[i] - lay.row_phiinv[j]) + (Y[j] - lay.col_phi[i])
        worst = max(worst, abs(prow + qcol - exact) / max(length, h))
    return worst
