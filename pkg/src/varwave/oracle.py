"""Reference solvers in (t, x) used to check the characteristic pipeline.

They share no code path with the lattice integrator: d'Alembert's formula
for constant speed, and first-order upwinding of the R, S system.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from varwave.wavefield import InitialData, SpeedFamily, riemann_invariants


class BlowupDetected(RuntimeError):
    """max(|R|, |S|) passed the ceiling; the comparison window is over."""

    def __init__(self, t: float, peak: float):
        super().__init__(f"max(|R|,|S|) = {peak:.3g} at t = {t:.6g}")
        self.t = t
        self.peak = peak


def dalembert(data: InitialData, c0: float, tau: float, xs) -> np.ndarray:
    """u(tau, x) for u_tt = c0^2 u_xx; data are zero outside their grid."""
    if not c0 > 0:
        raise ValueError("c0 must be positive")
    xs = np.asarray(xs, dtype=float)
    x = data.x
    U1 = cumulative_trapezoid(data.u1, x, initial=0.0)
    left, right = xs - c0 * tau, xs + c0 * tau
    u0l = np.interp(left, x, data.u0, left=0.0, right=0.0)
    u0r = np.interp(right, x, data.u0, left=0.0, right=0.0)
    # np.interp clamps, so U1 is constant outside the support as it should be
    integral = np.interp(right, x, U1) - np.interp(left, x, U1)
    return 0.5 * (u0l + u0r) + integral / (2.0 * c0)


@dataclass
class UpwindResult:
    x: np.ndarray
    t: float
    R: np.ndarray
    S: np.ndarray
    u: np.ndarray
    snapshots: dict[float, tuple[np.ndarray, np.ndarray, np.ndarray]] = field(default_factory=dict)


def _resample(data: InitialData, fam: SpeedFamily, dx: float, pad: float):
    lo, hi = data.support
    n_lo = int(np.ceil((pad - lo) / dx))
    n_hi = int(np.ceil((hi + pad) / dx))
    x = dx * np.arange(-n_lo, n_hi + 1, dtype=float)
    inv = riemann_invariants(data, fam)
    R = np.interp(x, data.x, inv.R, left=0.0, right=0.0)
    S = np.interp(x, data.x, inv.S, left=0.0, right=0.0)
    u = np.interp(x, data.x, data.u0, left=0.0, right=0.0)
    return x, R, S, u


def upwind_rs(data: InitialData, fam: SpeedFamily, t_end: float, cfl: float = 0.5,
              dx: float | None = None, ceiling: float = 1e3, taus=(),
              sources: bool = True) -> UpwindResult:
    """Explicit upwind integration of

        R_t - c R_x = (c'/4c)(R^2 - S^2),   S_t + c S_x = -(c'/4c)(R^2 - S^2),
        u_t = (R + S)/2,

    on a grid wide enough that nothing reaches its ends before ``t_end``.
    ``sources=False`` drops the coupling terms (pure advection).
    """
    if dx is None:
        dx = data.dx
    cmax = fam.a + fam.b
    x, R, S, u = _resample(data, fam, dx, cmax * t_end + 10 * dx)
    stops = sorted({float(s) for s in taus if 0.0 <= s <= t_end} | {float(t_end)})
    snaps: dict[float, tuple] = {}
    zero = np.zeros(1)
    t = 0.0
    for stop in stops:
        # march each segment with its own step so that every stop is hit exactly
        nsteps = int(np.ceil((stop - t) * cmax / (cfl * dx)))
        dt = (stop - t) / nsteps if nsteps else 0.0
        for n in range(nsteps):
            c = fam.c(u)
            k = fam.cprime(u) / (4.0 * c) if sources else np.zeros_like(u)
            src = k * (R * R - S * S)
            # R travels left, S travels right; zero inflow at the ends
            dR = (np.concatenate([R[1:], zero]) - R) / dx
            dS = (S - np.concatenate([zero, S[:-1]])) / dx
            R, S, u = (
                R + dt * (c * dR + src),
                S + dt * (-c * dS - src),
                u + dt * 0.5 * (R + S),
            )
            peak = max(float(np.max(np.abs(R))), float(np.max(np.abs(S))))
            if not np.isfinite(peak) or peak > ceiling:
                raise BlowupDetected(t + (n + 1) * dt, peak)
        t = stop
        snaps[stop] = (R.copy(), S.copy(), u.copy())
    return UpwindResult(x, t_end, R, S, u, snaps)
