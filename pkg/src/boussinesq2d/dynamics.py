"""Boussinesq right-hand side, integrating-factor RK4 stepper and Taylor recursion.

The semi-discrete system evolved here is

    du/dt   = -nu A u - P mask(u.grad u) + P((rho - mean rho) e2)
    drho/dt = -mask(u.grad rho)

with ``mask`` the two-thirds dealiasing filter and an optional Galerkin
cutoff applied to every tendency. The zero wavevector of every tendency is
pinned to zero so the velocity stays mean-free and the mean density is
exactly conserved.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .errors import BlowUpError, DimensionError, UnsupportedOrderError
from .sobolev import sobolev_norm
from .spectral import (
    Grid,
    SpectralScalar,
    SpectralVector,
    advect_arrays,
    forward,
    half_to_full,
    inverse,
    leray_arrays,
)

CFL_LIMIT = 0.5
MAX_TAYLOR_ORDER = 4


@dataclass(frozen=True, eq=False)
class SimState:
    t: float
    u: SpectralVector
    rho: SpectralScalar
    nu: float = 1.0

    def __post_init__(self):
        if self.u.grid != self.rho.grid:
            raise DimensionError("velocity and density live on different grids")
        if not self.nu > 0:
            raise ValueError(f"viscosity must be positive, got {self.nu!r}")

    @property
    def grid(self) -> Grid:
        return self.rho.grid

    def as_array(self) -> np.ndarray:
        return np.stack([self.u.x.coeffs, self.u.y.coeffs, self.rho.coeffs])

    @classmethod
    def from_array(cls, g: Grid, t: float, y: np.ndarray, nu: float) -> "SimState":
        return cls(t, SpectralVector.from_arrays(g, y[0], y[1]), SpectralScalar(g, y[2]), nu)


# ---------------------------------------------------------------------------
# individual terms


def buoyancy_term(rho: SpectralScalar) -> SpectralVector:
    """``P((rho - mean rho) e2)``."""
    g = rho.grid
    cy = rho.coeffs.copy()
    cy[0, 0] = 0.0
    bx, by = leray_arrays(g, np.zeros_like(cy), cy)
    return SpectralVector.from_arrays(g, bx, by)


def advect_scalar(u: SpectralVector, rho: SpectralScalar) -> SpectralScalar:
    """Dealiased ``u . grad rho``."""
    if u.grid != rho.grid:
        raise DimensionError(f"grid mismatch: n={u.grid.n} vs n={rho.grid.n}")
    g = rho.grid
    return SpectralScalar(g, advect_arrays(g, *u.arrays, rho.coeffs))


def self_advection(u: SpectralVector) -> SpectralVector:
    """Dealiased ``u . grad u`` without projection."""
    g = u.grid
    ux, uy = u.arrays
    return SpectralVector.from_arrays(g, advect_arrays(g, ux, uy, ux), advect_arrays(g, ux, uy, uy))


def advect_velocity(u: SpectralVector) -> SpectralVector:
    """``P(u . grad u)``, dealiased."""
    g = u.grid
    a = self_advection(u)
    cx, cy = leray_arrays(g, *a.arrays)
    return SpectralVector.from_arrays(g, cx, cy)


# ---------------------------------------------------------------------------
# batched tendency used by the stepper


def _nonlinear(g: Grid, y: np.ndarray, keep: np.ndarray) -> tuple[np.ndarray, float]:
    """Everything except the viscous term, plus ``max |u|`` on the grid."""
    ux, uy, r = y
    ik1, ik2 = 1j * g.dk1, 1j * g.dk2
    phys = inverse(np.stack([ux, uy, ik1 * ux, ik2 * ux, ik1 * uy, ik2 * uy, ik1 * r, ik2 * r]))
    vx, vy = phys[0], phys[1]
    prods = np.stack([
        vx * phys[2] + vy * phys[3],
        vx * phys[4] + vy * phys[5],
        vx * phys[6] + vy * phys[7],
    ])
    nl = forward(prods)
    nl *= keep
    buoy = r.copy()
    buoy[0, 0] = 0.0
    out = np.empty_like(y)
    px, py = leray_arrays(g, nl[0], nl[1] - buoy * keep)
    out[0] = -px
    out[1] = -py
    out[2] = -nl[2]
    out[:, 0, 0] = 0.0
    umax = float(np.sqrt(np.max(vx * vx + vy * vy)))
    return out, umax


def _cut_mask(g: Grid, mode_cutoff: int | None) -> np.ndarray:
    if mode_cutoff is None:
        return np.ones((g.n, g.n))
    return (g.kmax_inf <= mode_cutoff).astype(float)


def _keep_mask(g: Grid, mode_cutoff: int | None) -> np.ndarray:
    return g.mask * _cut_mask(g, mode_cutoff)


def rhs(state: SimState, mode_cutoff: int | None = None) -> tuple[SpectralVector, SpectralScalar]:
    """Full tendency ``(du/dt, drho/dt)`` of the semi-discrete system."""
    g = state.grid
    keep = _keep_mask(g, mode_cutoff)
    cut = _cut_mask(g, mode_cutoff)
    y = state.as_array()
    out, _ = _nonlinear(g, y, keep)
    visc = state.nu * g.ksq * cut
    vx, vy = leray_arrays(g, y[0], y[1])
    out[0] -= visc * vx
    out[1] -= visc * vy
    du = SpectralVector.from_arrays(g, out[0], out[1])
    return du, SpectralScalar(g, out[2])


class Stepper:
    """Integrating-factor RK4 with a fixed step ``dt``.

    The viscous factor ``exp(-nu |k|^2 dt)`` is applied exactly and the
    remaining terms by classical RK4 in the integrating-factor variables.
    Internally the state is kept as a ``(3, n, n/2+1)`` half spectrum.
    ``dt`` may be negative (backward integration, used by finite-difference
    checks); the public :func:`step` only accepts positive steps.
    """

    def __init__(self, g: Grid, nu: float, dt: float, mode_cutoff: int | None = None, warn_cfl: bool = True):
        if dt == 0 or not math.isfinite(dt):
            raise ValueError(f"dt must be finite and nonzero, got {dt!r}")
        self.grid = g
        self.nu = nu
        self.dt = dt
        self.mode_cutoff = mode_cutoff
        self.warn_cfl = warn_cfl
        h = g.n // 2 + 1
        self._h = h
        self._ik1 = 1j * g.dk1[:, :h]
        self._ik2 = 1j * g.dk2[:, :h]
        self._k1 = g.k1[:, :h]
        self._k2 = g.k2[:, :h]
        self._inv_ksq = g.inv_ksq[:, :h]
        self._keep = _keep_mask(g, mode_cutoff)[:, :h]
        self._cut = None if mode_cutoff is None else _cut_mask(g, mode_cutoff)[:, :h]
        lin = np.zeros((3, g.n, h))
        lin[0] = lin[1] = -nu * g.ksq[:, :h]
        self.e_half = np.exp(0.5 * dt * lin)
        self.e_full = np.exp(dt * lin)
        self._spec = np.empty((5, g.n, h), dtype=complex)
        self.last_cfl = 0.0

    def nonlinear(self, y: np.ndarray) -> tuple[np.ndarray, float]:
        """Non-viscous tendency of a half-spectrum state, and ``max |u|``.

        Self-advection is evaluated as ``omega u_perp``: it differs from
        ``u.grad u`` by ``grad |u|^2/2``, which the projection removes exactly
        even after dealiasing.
        """
        n = self.grid.n
        ux, uy, r = y
        sp = self._spec
        sp[0] = ux
        sp[1] = uy
        np.subtract(self._ik1 * uy, self._ik2 * ux, out=sp[2])
        np.multiply(self._ik1, r, out=sp[3])
        np.multiply(self._ik2, r, out=sp[4])
        phys = sfft.irfft2(sp, s=(n, n), norm="forward")
        vx, vy, w = phys[0], phys[1], phys[2]
        prods = np.empty((3, n, n))
        np.multiply(w, vy, out=prods[0])
        np.negative(prods[0], out=prods[0])
        np.multiply(w, vx, out=prods[1])
        prods[2] = vx * phys[3] + vy * phys[4]
        nl = sfft.rfft2(prods, norm="forward")
        nl *= self._keep
        ax = nl[0]
        ay = nl[1] - self._keep * r
        ay[0, 0] += self._keep[0, 0] * r[0, 0]
        div = (self._k1 * ax + self._k2 * ay) * self._inv_ksq
        out = np.empty_like(y)
        np.subtract(self._k1 * div, ax, out=out[0])
        np.subtract(self._k2 * div, ay, out=out[1])
        np.negative(nl[2], out=out[2])
        out[:, 0, 0] = 0.0
        umax = float(np.sqrt(np.max(vx * vx + vy * vy)))
        return out, umax

    def advance_half(self, y: np.ndarray, t: float) -> np.ndarray:
        dt, e1, e2 = self.dt, self.e_half, self.e_full
        k1, umax = self.nonlinear(y)
        self.last_cfl = abs(dt) * umax * self.grid.n / (2 * np.pi)
        if self.warn_cfl and self.last_cfl > CFL_LIMIT:
            warnings.warn(
                f"advective CFL number {self.last_cfl:.3f} exceeds {CFL_LIMIT} at t={t}",
                RuntimeWarning,
                stacklevel=3,
            )
        k2, _ = self.nonlinear(e1 * (y + 0.5 * dt * k1))
        k3, _ = self.nonlinear(e1 * y + 0.5 * dt * k2)
        k4, _ = self.nonlinear(e2 * y + dt * (e1 * k3))
        y_new = e2 * y + (dt / 6.0) * (e2 * k1 + 2.0 * e1 * (k2 + k3) + k4)
        if self._cut is not None:
            y_new *= self._cut
        if not np.all(np.isfinite(y_new)):
            raise BlowUpError(t + dt)
        return y_new

    def to_half(self, state: SimState) -> np.ndarray:
        return state.as_array()[..., : self._h].copy()

    def from_half(self, y: np.ndarray, t: float, nu: float | None = None) -> SimState:
        full = half_to_full(y, symmetrize=False)
        return SimState.from_array(self.grid, t, full, self.nu if nu is None else nu)

    def advance_array(self, y: np.ndarray, t: float) -> np.ndarray:
        """Full-layout convenience wrapper around :meth:`advance_half`."""
        return half_to_full(self.advance_half(y[..., : self._h], t), symmetrize=False)

    def advance(self, state: SimState) -> SimState:
        y = self.advance_half(self.to_half(state), state.t)
        return self.from_half(y, state.t + self.dt, state.nu)


@lru_cache(maxsize=16)
def _cached_stepper(n: int, nu: float, dt: float, mode_cutoff):
    from .spectral import grid

    return Stepper(grid(n), nu, dt, mode_cutoff)


def step(state: SimState, dt: float, mode_cutoff: int | None = None) -> SimState:
    """Advance ``state`` by one integrating-factor RK4 step of size ``dt > 0``."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    return _cached_stepper(state.grid.n, state.nu, dt, mode_cutoff).advance(state)


# ---------------------------------------------------------------------------
# Taylor recursion for time derivatives at t = 0


@dataclass(frozen=True, eq=False)
class TimeDerivatives:
    order: int
    u: list = field(default_factory=list)
    rho: list = field(default_factory=list)

    def report(self) -> list[dict]:
        """Per-order ``||d_t^j u||_{H^1}`` and ``||d_t^j rho||_{L^2}``."""
        return [
            {
                "j": j,
                "u_h1": sobolev_norm(self.u[j], 1.0),
                "rho_l2": sobolev_norm(self.rho[j], 0.0),
                "u_divergence_defect": self.u[j].divergence_defect(),
            }
            for j in range(self.order + 1)
        ]


def taylor_time_derivatives(state: SimState, order: int, mode_cutoff: int | None = None) -> TimeDerivatives:
    """``d_t^j u`` and ``d_t^j rho`` at the state's time for ``j = 0..order``.

    Uses the Leibniz expansion of the bilinear advection terms, e.g.
    ``d_t^{j+1} rho = -sum_i C(j, i) mask(d_t^i u . grad d_t^{j-i} rho)``.
    """
    if order > MAX_TAYLOR_ORDER or order < 0:
        raise UnsupportedOrderError(f"order must be in 0..{MAX_TAYLOR_ORDER}, got {order!r}")
    g = state.grid
    keep = _keep_mask(g, mode_cutoff)
    visc = state.nu * g.ksq * _cut_mask(g, mode_cutoff)
    us = [np.stack(state.u.arrays)]
    rs = [state.rho.coeffs.copy()]
    for j in range(order):
        adv_u = np.zeros_like(us[0])
        adv_r = np.zeros_like(rs[0])
        for i in range(j + 1):
            c = math.comb(j, i)
            a, b = us[i], us[j - i]
            adv_u[0] += c * advect_arrays(g, a[0], a[1], b[0])
            adv_u[1] += c * advect_arrays(g, a[0], a[1], b[1])
            adv_r += c * advect_arrays(g, a[0], a[1], rs[j - i])
        buoy = rs[j].copy()
        buoy[0, 0] = 0.0
        # stokes and projection act on the current order
        vx, vy = leray_arrays(g, us[j][0], us[j][1])
        px, py = leray_arrays(g, adv_u[0] * keep, adv_u[1] * keep - buoy * keep)
        du = np.stack([-visc * vx - px, -visc * vy - py])
        dr = -adv_r * keep
        du[:, 0, 0] = 0.0
        dr[0, 0] = 0.0
        us.append(du)
        rs.append(dr)
    return TimeDerivatives(
        order,
        [SpectralVector.from_arrays(g, c[0], c[1]) for c in us],
        [SpectralScalar(g, c) for c in rs],
    )


def with_time(state: SimState, t: float) -> SimState:
    return replace(state, t=t)
