"""Back from (X, Y) to physical coordinates: x(X, Y), t(X, Y), level
curves of t, and sampled frames u(tau, .)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from varwave.goursat import CharGrid, interior_cells
from varwave.wavefield import SENTINEL

ANGLE_GUARD = 1e-6


class TimeOutOfRange(ValueError):
    pass


@dataclass(frozen=True)
class XTField:
    x: np.ndarray
    t: np.ndarray
    # half the gap between the column-first and row-first integrations
    skew: np.ndarray


def _derivs(grid: CharGrid):
    c = grid.fam.c(grid.u)
    a = (1.0 + np.cos(grid.w)) * grid.p / 4.0
    b = (1.0 + np.cos(grid.z)) * grid.q / 4.0
    # x_X, x_Y, t_X, t_Y
    return a, -b, a / c, b / c


def _cumulative(f, f_foot, foot_step, anchor, active, h):
    """Trapezoid along axis 0 starting from the foot on gamma below each column."""
    first = active & ~np.vstack([np.zeros((1, active.shape[1]), bool), active[:-1]])
    inc = np.zeros_like(f)
    inc[1:] = 0.5 * h * (f[:-1] + f[1:])
    foot_inc = 0.5 * foot_step[None, :] * (f_foot[None, :] + f)
    inc = np.where(first, foot_inc, inc)
    inc[~active] = 0.0
    return anchor[None, :] + np.cumsum(inc, axis=0)


def integrate_xt(grid: CharGrid) -> XTField:
    """Integrate x and t from their values on gamma (t = 0, x = the curve
    parameter, which is 0 at X = Y = 0), once up the columns and once along
    the rows, and average the two."""
    lay, h, fam, curve = grid.feet, grid.h, grid.fam, grid.curve
    X, Y = grid.X, grid.Y
    act = grid.active
    xX, xY, tX, tY = _derivs(grid)

    # columns: d/dY from (X_i, phi(X_i))
    col_step = np.maximum(Y[np.argmax(act, axis=0)] - lay.col_phi, 0.0)
    cz, cc = np.cos(lay.col_z), fam.c(lay.col_u)
    x_col = _cumulative(xY, -(1.0 + cz) / 4.0, col_step, curve.x_of_X(X), act, h)
    t_col = _cumulative(tY, (1.0 + cz) / (4.0 * cc), col_step, np.zeros_like(X), act, h)

    # rows: d/dX from (phi^-1(Y_j), Y_j); reuse the column routine on transposes
    actT = act.T
    row_step = np.maximum(X[np.argmax(actT, axis=0)] - lay.row_phiinv, 0.0)
    rw, rc = np.cos(lay.row_w), fam.c(lay.row_u)
    x_row = _cumulative(xX.T, (1.0 + rw) / 4.0, row_step, curve.x_of_Y(Y), actT, h).T
    t_row = _cumulative(tX.T, (1.0 + rw) / (4.0 * rc), row_step, np.zeros_like(Y), actT, h).T

    x = 0.5 * (x_col + x_row)
    t = 0.5 * (t_col + t_row)
    skew = 0.5 * np.abs(x_col - x_row)
    x[~act] = np.nan
    t[~act] = np.nan
    skew[~act] = np.nan
    return XTField(x, t, skew)


def commutator_residual(grid: CharGrid) -> float:
    """Largest cell mismatch between Delta_Y(x_X) and Delta_X(x_Y), and the
    same for t, divided by h."""
    cells = interior_cells(grid)
    if not cells.any():
        raise ValueError("grid has no interior cells")
    xX, xY, tX, tY = _derivs(grid)
    h = grid.h
    worst = 0.0
    for fX, fY in ((xX, xY), (tX, tY)):
        dY_fX = 0.5 * (fX[1:, :-1] + fX[1:, 1:] - fX[:-1, :-1] - fX[:-1, 1:])
        dX_fY = 0.5 * (fY[:-1, 1:] + fY[1:, 1:] - fY[:-1, :-1] - fY[1:, :-1])
        worst = max(worst, float(np.max(np.abs(dY_fX - dX_fY)[cells])) / h)
    return worst


@dataclass(frozen=True)
class LevelPath:
    """Staircase of lattice nodes (I[k], J[k]) ordered by increasing x.

    Consecutive nodes differ by (+1, 0) or (0, -1).  ``rows[i]`` is the
    first non-outer row of column i with t >= tau (for i >= ``i_start``).
    """

    tau: float
    I: np.ndarray
    J: np.ndarray
    rows: np.ndarray
    i_start: int


def _first_rows(grid: CharGrid, t: np.ndarray, tau: float):
    tt = np.where(grid.active, t, -np.inf)
    above = tt >= tau
    has = above[-1]
    if not has.any():
        return None, None
    i_start = int(np.argmax(has))
    rows = np.argmax(above, axis=0)
    rows[:i_start] = grid.lattice.n
    # t is nondecreasing in X, so the crossing row cannot rise to the right
    rows[i_start:] = np.minimum.accumulate(rows[i_start:])
    return rows, i_start


def level_curve(grid: CharGrid, xt: XTField, tau: float) -> LevelPath:
    tmax = float(np.nanmax(xt.t))
    if not (0.0 <= tau <= tmax):
        raise TimeOutOfRange(f"tau={tau} outside [0, {tmax:.6g}]")
    rows, i0 = _first_rows(grid, xt.t, tau)
    if rows is None:
        raise TimeOutOfRange(f"level t={tau} does not cross the window")
    I, J = [i0], [rows[i0]]
    for i in range(i0 + 1, grid.lattice.n):
        r_prev, r = rows[i - 1], rows[i]
        I.append(i)
        J.append(r_prev)
        for j in range(r_prev - 1, r - 1, -1):
            I.append(i)
            J.append(j)
    return LevelPath(tau, np.array(I), np.array(J), rows, i0)


@dataclass(frozen=True)
class PhysicalFrame:
    tau: float
    xs: np.ndarray
    us: np.ndarray
    Rs: np.ndarray
    Ss: np.ndarray
    level_curve: LevelPath
    # crossing points of t = tau on lattice edges, sorted by x
    x_nodes: np.ndarray = field(repr=False)
    u_nodes: np.ndarray = field(repr=False)
    # largest |u1 - u2| among crossing points that share the same x
    preimage_spread: float = 0.0


def _crossings(grid: CharGrid, xt: XTField, path: LevelPath):
    """Points where t = tau on the vertical and horizontal lattice edges the
    staircase separates, each linearly interpolated along its edge."""
    lay, curve = grid.feet, grid.curve
    X, Y, n = grid.X, grid.Y, grid.lattice.n
    t, x = xt.t, xt.x
    act = grid.active
    tau = path.tau
    rows, i0 = path.rows, path.i_start
    cols = np.arange(i0, n)

    out = {k: [] for k in ("key", "x", "u", "w", "z")}

    def emit(key, lo, hi):
        t_lo, t_hi = lo[0], hi[0]
        lam = np.where(t_hi > t_lo, (tau - t_lo) / np.where(t_hi > t_lo, t_hi - t_lo, 1.0), 0.0)
        lam = np.clip(lam, 0.0, 1.0)
        out["key"].append(key)
        for name, a, b in zip(("x", "u", "w", "z"), lo[1:], hi[1:]):
            out[name].append(a + lam * (b - a))

    # vertical edges: (i, rows[i]-1) -> (i, rows[i]); the lower end may be gamma
    r = rows[cols]
    below = r - 1
    lower_ok = (below >= 0) & act[np.maximum(below, 0), cols]
    bl = np.maximum(below, 0)
    hi = (t[r, cols], x[r, cols], grid.u[r, cols], grid.w[r, cols], grid.z[r, cols])
    lo = (
        np.where(lower_ok, t[bl, cols], 0.0),
        np.where(lower_ok, x[bl, cols], curve.x_of_X(X[cols])),
        np.where(lower_ok, grid.u[bl, cols], lay.col_u[cols]),
        np.where(lower_ok, grid.w[bl, cols], lay.col_w[cols]),
        np.where(lower_ok, grid.z[bl, cols], lay.col_z[cols]),
    )
    emit(2.0 * cols * n + 2.0 * (n - r), lo, hi)

    # horizontal edges: (i-1, j) -> (i, j) for rows[i] <= j < rows[i-1]
    prev = np.concatenate([[n], rows[i0:-1]])
    counts = np.maximum(prev - r, 0)
    if counts.sum():
        ii = np.repeat(cols, counts)
        starts = np.repeat(r, counts)
        offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
        jj = starts + offs
        left = ii - 1
        left_ok = (left >= 0) & act[jj, np.maximum(left, 0)]
        li = np.maximum(left, 0)
        hi = (t[jj, ii], x[jj, ii], grid.u[jj, ii], grid.w[jj, ii], grid.z[jj, ii])
        lo = (
            np.where(left_ok, t[jj, li], 0.0),
            np.where(left_ok, x[jj, li], curve.x_of_Y(Y[jj])),
            np.where(left_ok, grid.u[jj, li], lay.row_u[jj]),
            np.where(left_ok, grid.w[jj, li], lay.row_w[jj]),
            np.where(left_ok, grid.z[jj, li], lay.row_z[jj]),
        )
        emit(2.0 * ii * n + 2.0 * (n - jj) - 1.0, lo, hi)

    key = np.concatenate(out["key"])
    order = np.argsort(key, kind="stable")
    pts = {k: np.concatenate(v)[order] for k, v in out.items() if k != "key"}
    return pts


def _angle_to_invariant(a, mode):
    r = np.tan(a / 2.0)
    if mode == "conservative":
        # angles past pi stand for finite negative values of R or S
        near = np.abs(np.mod(a + np.pi, 2.0 * np.pi) - np.pi) >= np.pi - ANGLE_GUARD
    else:
        near = np.abs(a) >= np.pi - ANGLE_GUARD
    return np.where(near, SENTINEL, r)


def sample_frame(grid: CharGrid, xt: XTField, tau: float, n_samples: int = 201,
                 x_range: tuple[float, float] | None = None) -> PhysicalFrame:
    """u(tau, .) on ``n_samples`` uniform points spanning the level curve.

    Where several crossing points share one x (degenerate plateaus where
    1 + cos w or 1 + cos z vanishes), the first in X-order is used.
    """
    path = level_curve(grid, xt, tau)
    pts = _crossings(grid, xt, path)
    # walk in path order; x is nondecreasing up to round-off
    xs_raw = np.maximum.accumulate(pts["x"])
    tol = 1e-12 * max(1.0, float(np.max(np.abs(xs_raw))))
    keep = np.concatenate([[True], np.diff(xs_raw) > tol])
    spread = 0.0
    if not keep.all():
        group = np.cumsum(keep) - 1
        umax = np.full(keep.sum(), -np.inf)
        umin = np.full(keep.sum(), np.inf)
        np.maximum.at(umax, group, pts["u"])
        np.minimum.at(umin, group, pts["u"])
        spread = float(np.max(umax - umin))
    xk = xs_raw[keep]
    lo, hi = (xk[0], xk[-1]) if x_range is None else x_range
    xs = np.linspace(lo, hi, n_samples)
    us = np.interp(xs, xk, pts["u"][keep])
    ws = np.interp(xs, xk, pts["w"][keep])
    zs = np.interp(xs, xk, pts["z"][keep])
    return PhysicalFrame(
        tau=float(tau),
        xs=xs,
        us=us,
        Rs=_angle_to_invariant(ws, grid.config.mode),
        Ss=_angle_to_invariant(zs, grid.config.mode),
        level_curve=path,
        x_nodes=xk,
        u_nodes=pts["u"][keep],
        preimage_spread=spread,
    )
