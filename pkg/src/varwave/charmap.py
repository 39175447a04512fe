"""The curve gamma = image of {t = 0} in the (X, Y) plane, the functions
phi and phi^-1, and the boundary traces carried along gamma."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from varwave.wavefield import InitialData, InvariantField, total_energy


@dataclass(frozen=True)
class BoundaryCurve:
    """gamma parameterized by the physical coordinate x.

    X is strictly increasing and Y strictly decreasing in x; both vanish at
    x = 0.  Traces: wbar = 2 arctan R, zbar = 2 arctan S, ubar = u0, and
    pbar = qbar = 1 identically.
    """

    x: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    E0: float
    wbar: np.ndarray
    zbar: np.ndarray
    ubar: np.ndarray

    @property
    def pbar(self) -> np.ndarray:
        return np.ones_like(self.x)

    @property
    def qbar(self) -> np.ndarray:
        return np.ones_like(self.x)

    # parameter lookups, linearly extended with slope one outside the data
    def x_of_X(self, X):
        X = np.asarray(X, dtype=float)
        out = np.interp(X, self.X, self.x)
        out = np.where(X > self.X[-1], self.x[-1] + (X - self.X[-1]), out)
        return np.where(X < self.X[0], self.x[0] + (X - self.X[0]), out)

    def x_of_Y(self, Y):
        Y = np.asarray(Y, dtype=float)
        Yr, xr = self.Y[::-1], self.x[::-1]
        out = np.interp(Y, Yr, xr)
        out = np.where(Y < self.Y[-1], self.x[-1] - (Y - self.Y[-1]), out)
        return np.where(Y > self.Y[0], self.x[0] - (Y - self.Y[0]), out)

    def wbar_of_X(self, X):
        return np.interp(X, self.X, self.wbar, left=0.0, right=0.0)

    def ubar_of_X(self, X):
        return np.interp(X, self.X, self.ubar)

    def zbar_of_Y(self, Y):
        return np.interp(Y, self.Y[::-1], self.zbar[::-1], left=0.0, right=0.0)

    def ubar_of_Y(self, Y):
        return np.interp(Y, self.Y[::-1], self.ubar[::-1])


def build_boundary(inv: InvariantField, data: InitialData) -> BoundaryCurve:
    if inv.x.shape != data.x.shape or not np.array_equal(inv.x, data.x):
        raise ValueError("invariants and data must share the x-grid")
    x = data.x
    X = cumulative_trapezoid(1.0 + inv.R**2, x, initial=0.0)
    Y = -cumulative_trapezoid(1.0 + inv.S**2, x, initial=0.0)
    X = X - np.interp(0.0, x, X)
    Y = Y - np.interp(0.0, x, Y)
    return BoundaryCurve(
        x=x,
        X=X,
        Y=Y,
        E0=total_energy(inv),
        wbar=2.0 * np.arctan(inv.R),
        zbar=2.0 * np.arctan(inv.S),
        ubar=data.u0.copy(),
    )


def phi(curve: BoundaryCurve, X):
    """Y-coordinate of gamma above X; slope -1 beyond the sampled range."""
    X = np.asarray(X, dtype=float)
    out = np.interp(X, curve.X, curve.Y)
    out = np.where(X > curve.X[-1], curve.Y[-1] - (X - curve.X[-1]), out)
    out = np.where(X < curve.X[0], curve.Y[0] - (X - curve.X[0]), out)
    return out if out.ndim else float(out)


def phi_inv(curve: BoundaryCurve, Y):
    Y = np.asarray(Y, dtype=float)
    out = np.interp(Y, curve.Y[::-1], curve.X[::-1])
    out = np.where(Y < curve.Y[-1], curve.X[-1] - (Y - curve.Y[-1]), out)
    out = np.where(Y > curve.Y[0], curve.X[0] - (Y - curve.Y[0]), out)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Lattice:
    """Square uniform lattice X_i = Y_i = lo + i*h, i = 0..n-1."""

    lo: float
    h: float
    n: int

    @property
    def X(self) -> np.ndarray:
        return self.lo + self.h * np.arange(self.n)

    @property
    def Y(self) -> np.ndarray:
        return self.X

    @classmethod
    def covering(cls, curve: BoundaryCurve, M: float, h: float) -> "Lattice":
        """Window [min footprint of Omega_M - 2h, M + 2h]^2."""
        lo = min(phi_inv(curve, M), phi(curve, M)) - 2.0 * h
        hi = M + 2.0 * h
        n = int(np.ceil((hi - lo) / h - 1e-9)) + 1
        return cls(float(lo), float(h), n)


@dataclass(frozen=True)
class Feet:
    """Where each lattice column and row meets gamma, with the traces there."""

    # column i meets gamma at (X_i, phi(X_i))
    col_phi: np.ndarray
    col_w: np.ndarray
    col_z: np.ndarray
    col_u: np.ndarray
    # row j meets gamma at (phi^-1(Y_j), Y_j)
    row_phiinv: np.ndarray
    row_w: np.ndarray
    row_z: np.ndarray
    row_u: np.ndarray


@dataclass(frozen=True)
class OuterLayer:
    """Lattice fields holding the extended data below gamma."""

    outer: np.ndarray  # bool[j, i], True where Y_j < phi(X_i)
    u: np.ndarray
    w: np.ndarray
    z: np.ndarray
    p: np.ndarray
    q: np.ndarray
    feet: Feet


def extend_outer(curve: BoundaryCurve, lat: Lattice) -> OuterLayer:
    """Extend the boundary data to {Y < phi(X)}: (u, w, p) constant along
    vertical lines, (z, q) constant along horizontal lines.

    Every node gets the extended values; the integrator overwrites the ones
    on or above gamma.
    """
    X, Y = lat.X, lat.Y
    col_phi = phi(curve, X)
    row_phiinv = phi_inv(curve, Y)
    # nodes within round-off of gamma count as on it
    tol = 1e-12 * max(1.0, float(np.max(np.abs(X))))
    outer = Y[:, None] < col_phi[None, :] - tol
    feet = Feet(
        col_phi=col_phi,
        col_w=curve.wbar_of_X(X),
        col_z=curve.zbar_of_Y(col_phi),
        col_u=curve.ubar_of_X(X),
        row_phiinv=row_phiinv,
        row_w=curve.wbar_of_X(row_phiinv),
        row_z=curve.zbar_of_Y(Y),
        row_u=curve.ubar_of_X(row_phiinv),
    )
    shape = (lat.n, lat.n)
    return OuterLayer(
        outer=outer,
        u=np.broadcast_to(feet.col_u[None, :], shape).copy(),
        w=np.broadcast_to(feet.col_w[None, :], shape).copy(),
        z=np.broadcast_to(feet.row_z[:, None], shape).copy(),
        p=np.ones(shape),
        q=np.ones(shape),
        feet=feet,
    )
