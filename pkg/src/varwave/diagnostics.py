"""Measured counterparts of the analytic identities and inequalities: energy
along level curves, singular-set measures, equation residuals, translation
moduli and weak-form residuals."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from varwave.charmap import phi
from varwave.goursat import CharGrid, _theta, singular_angle
from varwave.inverse_map import XTField, level_curve

FIELDS = ("u", "w", "z", "p", "q")


class EmptySingularSet(LookupError):
    """No node reached max{w, z} >= pi; informational, not a failure."""


@dataclass(frozen=True)
class EnergyReport:
    taus: np.ndarray
    energies: np.ndarray  # absolutely continuous part, nodes with w, z < pi
    totals: np.ndarray  # unrestricted contour integral
    sing_w: np.ndarray
    sing_z: np.ndarray
    mode: str

    def monotone_violations(self, tol: float = 0.0) -> int:
        return int(np.sum(np.diff(self.sing_w) < -tol) + np.sum(np.diff(self.sing_z) < -tol))


def _path_integrals(grid: CharGrid, path):
    I, J, h = path.I, path.J, grid.h
    w, z, p, q = (a[J, I] for a in (grid.w, grid.z, grid.p, grid.q))
    ew = (1.0 - np.cos(w)) * p / 8.0
    ez = (1.0 - np.cos(z)) * q / 8.0
    sw = singular_angle(grid.config.mode, w)
    sz = singular_angle(grid.config.mode, z)
    horiz = np.diff(I) == 1
    vert = ~horiz

    def trap(f, sel):
        return 0.5 * h * float(np.sum((f[:-1] + f[1:])[sel]))

    # moving right dX = +h; moving down dY = -h, so -(...) dY = +h (...)
    total = trap(ew, horiz) + trap(ez, vert)
    ac = trap(np.where(sw, 0.0, ew), horiz) + trap(np.where(sz, 0.0, ez), vert)
    m_w = trap(np.where(sw, p / 4.0, 0.0), horiz)
    m_z = trap(np.where(sz, q / 4.0, 0.0), vert)
    return ac, total, m_w, m_z


def energy_trace(grid: CharGrid, xt: XTField, taus) -> EnergyReport:
    """Integrate (1 - cos w) p/8 dX - (1 - cos z) q/8 dY along the level
    curve of each tau; the absolutely continuous part drops nodes with
    w >= pi from the dX steps and z >= pi from the dY steps."""
    rows = [_path_integrals(grid, level_curve(grid, xt, float(tau))) for tau in taus]
    arr = np.array(rows, dtype=float).reshape(len(rows), 4)
    return EnergyReport(
        taus=np.asarray(taus, dtype=float),
        energies=arr[:, 0],
        totals=arr[:, 1],
        sing_w=arr[:, 2],
        sing_z=arr[:, 3],
        mode=grid.config.mode,
    )


def _stencil_ok(grid: CharGrid, inner: np.ndarray) -> np.ndarray:
    """Nodes whose four neighbours all satisfy ``inner``."""
    ok = np.zeros_like(inner)
    ok[1:-1, 1:-1] = (
        inner[1:-1, 1:-1] & inner[2:, 1:-1] & inner[:-2, 1:-1] & inner[1:-1, 2:] & inner[1:-1, :-2]
    )
    return ok


def lambda_residual(grid: CharGrid) -> tuple[float, float]:
    """Max and mean of the five-term equation defect with centred differences,
    over nodes of Omega_M whose stencil lies in B0 = {max(w, z) < pi}."""
    fam, h = grid.fam, grid.h
    u, w, z, p, q = grid.u, grid.w, grid.z, grid.p, grid.q
    b0 = grid.in_omega & (np.maximum(w, z) < np.pi)
    ok = _stencil_ok(grid, b0)
    if not ok.any():
        return 0.0, 0.0
    s = (slice(1, -1), slice(1, -1))

    def dY(f):
        return (f[2:, 1:-1] - f[:-2, 1:-1]) / (2 * h)

    def dX(f):
        return (f[1:-1, 2:] - f[1:-1, :-2]) / (2 * h)

    uc, wc, zc, pc, qc = (a[s] for a in (u, w, z, p, q))
    c = fam.c(uc)
    k = fam.cprime(uc) / (8.0 * c * c)
    lam = (
        np.abs(dY(w) - k * (np.cos(zc) - np.cos(wc)) * qc)
        + np.abs(dX(z) - k * (np.cos(wc) - np.cos(zc)) * pc)
        + np.abs(dY(p) - k * (np.sin(zc) - np.sin(wc)) * pc * qc)
        + np.abs(dX(q) - k * (np.sin(wc) - np.sin(zc)) * pc * qc)
        + np.abs(dY(u) - np.sin(zc) * qc / (4.0 * c))
    )
    vals = lam[ok[s]]
    return float(vals.max()), float(vals.mean())


def singular_flatness(grid: CharGrid) -> float:
    """Largest of |Delta_Y w|, |Delta_Y p|, |Delta_X z|, |Delta_X q| / h over
    lattice edges with both ends in A0 = {max(w, z) >= pi}.

    In regularized mode A0 is {max >= pi + eps^3} and the drift eps is
    subtracted from the w and z differences.
    """
    cfg = grid.config
    drift, cut = 0.0, np.pi
    if cfg.mode == "regularized":
        drift, cut = cfg.epsilon, np.pi + cfg.epsilon**3
    a0 = grid.in_omega & (np.maximum(grid.w, grid.z) >= cut)
    if not a0.any():
        raise EmptySingularSet("no node with max(w, z) >= pi")
    h = grid.h
    vert = a0[1:] & a0[:-1]
    horiz = a0[:, 1:] & a0[:, :-1]
    worst = 0.0
    if vert.any():
        for f, d in ((grid.w, drift), (grid.p, 0.0)):
            worst = max(worst, float(np.max(np.abs(np.diff(f, axis=0) / h - d)[vert])))
    if horiz.any():
        for f, d in ((grid.z, drift), (grid.q, 0.0)):
            worst = max(worst, float(np.max(np.abs(np.diff(f, axis=1) / h - d)[horiz])))
    return worst


def id2_residual(grid: CharGrid) -> float:
    """Max over interior nodes (where theta is constant on the stencil) of
    |(p sin w / 2)_Y + (q sin z / 2)_X - theta c' p q (cos(w - z) - 1) / (8 c^2)|."""
    fam, h = grid.fam, grid.h
    th = _theta(grid.config.mode, grid.w, grid.z, grid.config.epsilon)
    flat = np.zeros_like(grid.active)
    flat[1:-1, 1:-1] = (
        (th[2:, 1:-1] == th[1:-1, 1:-1]) & (th[:-2, 1:-1] == th[1:-1, 1:-1])
        & (th[1:-1, 2:] == th[1:-1, 1:-1]) & (th[1:-1, :-2] == th[1:-1, 1:-1])
    )
    ok = _stencil_ok(grid, grid.in_omega) & flat
    if not ok.any():
        return 0.0
    a = grid.p * np.sin(grid.w) / 2.0
    b = grid.q * np.sin(grid.z) / 2.0
    s = (slice(1, -1), slice(1, -1))
    lhs = (a[2:, 1:-1] - a[:-2, 1:-1]) / (2 * h) + (b[1:-1, 2:] - b[1:-1, :-2]) / (2 * h)
    u, w, z, p, q = (v[s] for v in (grid.u, grid.w, grid.z, grid.p, grid.q))
    c = fam.c(u)
    r = th[s] * fam.cprime(u) * p * q / (8.0 * c * c) * (np.cos(w - z) - 1.0)
    return float(np.max(np.abs(lhs - r)[ok[s]]))


# -- translation moduli -------------------------------------------------------


@dataclass(frozen=True)
class CompactnessReport:
    shifts: list[tuple[float, float]]
    epsilons: list[float]
    l1: np.ndarray  # [eps index, shift index]
    rect: tuple[float, float, float, float]
    spacing: float


def default_rect(grid: CharGrid, margin: float) -> tuple[float, float, float, float]:
    """Square [s, M - margin]^2 with its lower-left corner above gamma."""
    X = grid.X
    d = phi(grid.curve, X) - X
    # gamma crosses the diagonal where phi(X) = X
    k = int(np.argmax(d <= 0))
    s = float(X[k]) + grid.h
    top = grid.config.M - margin
    if top <= s:
        raise ValueError("Omega_M too small for the requested shifts")
    return s, top, s, top


def _sampler(grid: CharGrid, name: str):
    f = getattr(grid, name)
    return RegularGridInterpolator((grid.Y, grid.X), f, method="linear", bounds_error=True)


def _eval_lattice(rect, spacing):
    a, b, c, d = rect
    nx = int(np.floor((b - a) / spacing + 1e-9)) + 1
    ny = int(np.floor((d - c) / spacing + 1e-9)) + 1
    Xe = a + spacing * np.arange(nx)
    Ye = c + spacing * np.arange(ny)
    YY, XX = np.meshgrid(Ye, Xe, indexing="ij")
    return XX, YY


def sample_fields(grid: CharGrid, XX, YY) -> dict[str, np.ndarray]:
    pts = np.stack([YY.ravel(), XX.ravel()], axis=-1)
    return {name: _sampler(grid, name)(pts).reshape(XX.shape) for name in FIELDS}


def translation_modulus(grids, shifts, epsilons=None, rect=None, spacing=None) -> CompactnessReport:
    """L1 norm over ``rect`` of |U(X + xi, Y + zeta) - U(X, Y)| summed over
    (u, w, z, p, q), for every grid and shift.

    Grids may have different spacings: all are sampled by bilinear
    interpolation on one evaluation lattice of spacing ``spacing`` (default:
    the coarsest h), and shifts should be multiples of it.
    """
    grids = list(grids)
    if spacing is None:
        spacing = max(g.h for g in grids)
    smax = max((abs(a) + abs(b) for a, b in shifts), default=0.0)
    if rect is None:
        rect = default_rect(grids[0], smax + 2 * spacing)
    XX, YY = _eval_lattice(rect, spacing)
    table = np.zeros((len(grids), len(shifts)))
    for gi, g in enumerate(grids):
        base = sample_fields(g, XX, YY)
        for si, (xi, zeta) in enumerate(shifts):
            moved = sample_fields(g, XX + xi, YY + zeta)
            table[gi, si] = sum(float(np.sum(np.abs(moved[k] - base[k]))) for k in FIELDS) * spacing**2
    eps = list(epsilons) if epsilons is not None else [g.config.epsilon for g in grids]
    return CompactnessReport(list(shifts), eps, table, tuple(rect), spacing)


def l1_distance(g1: CharGrid, g2: CharGrid, rect=None, spacing=None) -> float:
    """L1 distance over ``rect`` between two solutions, summed over the five fields."""
    if spacing is None:
        spacing = max(g1.h, g2.h)
    if rect is None:
        rect = default_rect(g1, 2 * spacing)
    XX, YY = _eval_lattice(rect, spacing)
    a, b = sample_fields(g1, XX, YY), sample_fields(g2, XX, YY)
    return sum(float(np.sum(np.abs(a[k] - b[k]))) for k in FIELDS) * spacing**2


# -- weak form ----------------------------------------------------------------


@dataclass(frozen=True)
class Bump:
    """(1 - r^2)^3 in each coordinate, r = (X - Xc)/radius, zero for |r| >= 1."""

    Xc: float
    Yc: float
    radius: float

    def _prof(self, s):
        inside = np.abs(s) < 1.0
        one = 1.0 - s * s
        f = np.where(inside, one**3, 0.0)
        df = np.where(inside, -6.0 * s * one**2 / self.radius, 0.0)
        return f, df

    def __call__(self, X, Y):
        fx, dfx = self._prof((X - self.Xc) / self.radius)
        fy, dfy = self._prof((Y - self.Yc) / self.radius)
        return fx * fy, dfx * fy, fx * dfy


def bump(Xc: float, Yc: float, radius: float) -> Bump:
    return Bump(Xc, Yc, radius)


def default_bumps(grid: CharGrid, count: int = 5) -> list[Bump]:
    """Bumps spaced along the diagonal of the default rectangle."""
    a, b, _, _ = default_rect(grid, 2 * grid.h)
    # small enough that the shifted boxes stay inside the rectangle
    radius = 0.3 * (b - a) / max(count, 1)
    centers = a + (b - a) * (np.arange(count) + 0.5) / count
    # alternate above and below the diagonal to sample different regions
    offsets = radius * 0.5 * (-1.0) ** np.arange(count)
    return [Bump(float(cx), float(cx + off), float(radius)) for cx, off in zip(centers, offsets)]


def weakform_residual(grid: CharGrid, tests=None) -> float:
    """max over test functions of the lattice quadrature of
    p sin w/2 phi_Y + q sin z/2 phi_X + theta c' p q (cos(w - z) - 1) phi / (8 c^2)."""
    fam, h, X, Y = grid.fam, grid.h, grid.X, grid.Y
    if tests is None:
        tests = default_bumps(grid)
    worst = 0.0
    for f in tests:
        # only the bounding box of the bump contributes
        i0, i1 = np.searchsorted(X, [f.Xc - f.radius, f.Xc + f.radius])
        j0, j1 = np.searchsorted(Y, [f.Yc - f.radius, f.Yc + f.radius])
        box = np.s_[j0:j1 + 1, i0:i1 + 1]
        u, w, z, p, q = (a[box] for a in (grid.u, grid.w, grid.z, grid.p, grid.q))
        XX, YY = np.meshgrid(X[i0:i1 + 1], Y[j0:j1 + 1])
        val, fX, fY = f(XX, YY)
        support = val != 0.0
        if np.any(support & ~grid.in_omega[box]):
            raise ValueError(f"test function {f} not supported inside Omega_M")
        th = _theta(grid.config.mode, w, z, grid.config.epsilon)
        c = fam.c(u)
        src = th * fam.cprime(u) * p * q / (8.0 * c * c) * (np.cos(w - z) - 1.0)
        integrand = p * np.sin(w) / 2.0 * fY + q * np.sin(z) / 2.0 * fX + src * val
        worst = max(worst, abs(float(np.sum(integrand[support]))) * h * h)
    return worst
