"""Lagrangian flow maps and transport checks along characteristics."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
import scipy.fft as sfft

from . import kernels
from .dynamics import SimState, Stepper
from .errors import ConsistencyError, MissingVelocityError
from .spectral import SpectralScalar, SpectralVector

TWO_PI = 2.0 * np.pi


def wrap(points: np.ndarray) -> np.ndarray:
    return np.mod(points, TWO_PI)


def periodic_difference(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimal-image difference ``a - b`` on the torus."""
    return np.mod(a - b + np.pi, TWO_PI) - np.pi


def oversampled(f: SpectralScalar, factor: int = 4) -> np.ndarray:
    """Samples of ``f`` on a grid ``factor`` times finer, by zero padding.

    The Nyquist row and column of the source grid are dropped (they are
    zero for dealiased fields).
    """
    n = f.grid.n
    m = factor * n
    c = f.coeffs
    h = n // 2
    big = np.zeros((m, m // 2 + 1), dtype=complex)
    rows = np.r_[0:h, h + 1 : n]
    big_rows = np.r_[0:h, m - h + 1 : m]
    big[np.ix_(big_rows, np.arange(h))] = c[np.ix_(rows, np.arange(h))]
    return sfft.irfft2(big, s=(m, m), norm="forward")


def _eval_scalar(f: SpectralScalar, pts: np.ndarray, method: str, factor: int) -> np.ndarray:
    if method == "direct":
        return kernels.fourier_eval(f.coeffs, f.grid.wavenumbers.astype(float), pts)
    if method != "interp":
        raise ValueError(f"unknown evaluation method {method!r}")
    return kernels.interp_periodic(oversampled(f, factor), pts)


def scalar_at(f: SpectralScalar, points, method: str = "interp", oversample: int = 4) -> np.ndarray:
    """Values of a scalar field at arbitrary points."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    return _eval_scalar(f, pts, method, oversample)


def velocity_at(u: SpectralVector, points, method: str = "interp", oversample: int = 4) -> np.ndarray:
    """Velocity vectors ``(P, 2)`` at arbitrary points.

    ``method="interp"`` (default) interpolates a zero-padded ``oversample``-times
    finer sampling with tensor cubic Lagrange stencils; ``method="direct"``
    sums the Fourier series exactly.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    return np.stack([_eval_scalar(u.x, pts, method, oversample), _eval_scalar(u.y, pts, method, oversample)], axis=1)


class _CachedVelocity:
    """Keeps the oversampled grids of one field for repeated stage evaluations."""

    def __init__(self, u: SpectralVector, method: str, oversample: int):
        self.u = u
        self.method = method
        if method == "interp":
            self.fine = (oversampled(u.x, oversample), oversampled(u.y, oversample))

    def __call__(self, pts):
        if self.method == "interp":
            return np.stack([kernels.interp_periodic(self.fine[0], pts), kernels.interp_periodic(self.fine[1], pts)], axis=1)
        return velocity_at(self.u, pts, method=self.method)


# ---------------------------------------------------------------------------
# velocity providers


class FrozenVelocity:
    """The same field at every time."""

    def __init__(self, u: SpectralVector):
        self.u = u

    def at(self, t: float) -> SpectralVector:
        return self.u


class SampledVelocity:
    """Fields supplied at discrete times; other times raise ``MissingVelocityError``."""

    def __init__(self, fields: Mapping[float, SpectralVector] | None = None, atol: float = 1e-9):
        self._times: list[float] = []
        self._fields: list[SpectralVector] = []
        self.atol = atol
        for t, u in (fields or {}).items():
            self.add(t, u)

    def add(self, t: float, u: SpectralVector) -> None:
        self._times.append(float(t))
        self._fields.append(u)

    def at(self, t: float) -> SpectralVector:
        for ti, u in zip(self._times, self._fields):
            if abs(ti - t) <= self.atol * max(1.0, abs(t)):
                return u
        raise MissingVelocityError(t)


def _provider_fn(provider) -> Callable[[float], SpectralVector]:
    if hasattr(provider, "at"):
        return provider.at
    if callable(provider):
        return provider
    raise TypeError("velocity provider must be callable or expose .at(t)")


# ---------------------------------------------------------------------------
# flow maps


@dataclass(frozen=True, eq=False)
class FlowMap:
    """Seeds and their current images ``eta(x, t)``, wrapped into ``[0, 2pi)^2``.

    When built with :meth:`with_stencil`, every seed carries four satellites
    at ``+-h`` along each axis so the Jacobian of the map can be differenced.
    """

    seeds: np.ndarray
    positions: np.ndarray
    t: float = 0.0
    stencil_h: float | None = None
    n_base: int = field(default=-1)

    def __post_init__(self):
        s = np.asarray(self.seeds, dtype=float).reshape(-1, 2)
        p = wrap(np.asarray(self.positions, dtype=float).reshape(-1, 2))
        if s.shape != p.shape:
            raise ValueError("seeds and positions must have equal length")
        object.__setattr__(self, "seeds", s)
        object.__setattr__(self, "positions", p)
        if self.n_base < 0:
            object.__setattr__(self, "n_base", len(s))

    @classmethod
    def from_seeds(cls, seeds, t: float = 0.0) -> "FlowMap":
        s = wrap(np.asarray(seeds, dtype=float).reshape(-1, 2))
        return cls(s, s.copy(), t)

    @classmethod
    def with_stencil(cls, seeds, h: float = 1e-4, t: float = 0.0) -> "FlowMap":
        base = wrap(np.asarray(seeds, dtype=float).reshape(-1, 2))
        offsets = np.array([[h, 0.0], [-h, 0.0], [0.0, h], [0.0, -h]])
        sats = (base[:, None, :] + offsets[None, :, :]).reshape(-1, 2)
        allp = np.concatenate([base, wrap(sats)])
        return cls(allp, allp.copy(), t, stencil_h=h, n_base=len(base))

    @property
    def base_seeds(self) -> np.ndarray:
        return self.seeds[: self.n_base]

    @property
    def base_positions(self) -> np.ndarray:
        return self.positions[: self.n_base]

    def jacobian_determinants(self) -> np.ndarray:
        """Centered-difference ``det(d eta / d x)`` for each base seed."""
        if self.stencil_h is None:
            raise ValueError("flow map was not built with a differencing stencil")
        h = self.stencil_h
        sat = self.positions[self.n_base :].reshape(self.n_base, 4, 2)
        d1 = periodic_difference(sat[:, 0], sat[:, 1]) / (2 * h)
        d2 = periodic_difference(sat[:, 2], sat[:, 3]) / (2 * h)
        return d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]


def lattice_seeds(count: int) -> np.ndarray:
    """``count`` points from a cell-centred uniform lattice on the torus."""
    m = int(np.ceil(np.sqrt(count)))
    c = (np.arange(m) + 0.5) * TWO_PI / m
    x1, x2 = np.meshgrid(c, c, indexing="ij")
    return np.stack([x1.ravel(), x2.ravel()], axis=1)[:count]


def advance_flowmap(fm: FlowMap, velocity_provider, dt: float, method: str = "interp") -> FlowMap:
    """One classical RK4 step of ``d eta/dt = u(eta, t)`` for every seed."""
    get = _provider_fn(velocity_provider)
    t = fm.t
    u0 = get(t)
    um = get(t + 0.5 * dt)
    u1 = get(t + dt)
    f0 = _CachedVelocity(u0, method, 4)
    fm_ = f0 if um is u0 else _CachedVelocity(um, method, 4)
    f1 = f0 if u1 is u0 else (fm_ if u1 is um else _CachedVelocity(u1, method, 4))
    x = fm.positions
    k1 = f0(x)
    k2 = fm_(x + 0.5 * dt * k1)
    k3 = fm_(x + 0.5 * dt * k2)
    k4 = f1(x + dt * k3)
    x_new = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    return FlowMap(fm.seeds, x_new, t + dt, fm.stencil_h, fm.n_base)


def transport_error(fm: FlowMap, rho_t, rho_0: SpectralScalar, t_rho: float | None = None, method: str = "interp") -> float:
    """``max |rho(eta(x, t), t) - rho_0(x)|`` over the base seeds.

    ``rho_t`` is either a :class:`SimState` (its time is used) or a scalar
    field whose time is given as ``t_rho``.
    """
    if isinstance(rho_t, SimState):
        t_rho, rho_t = rho_t.t, rho_t.rho
    if t_rho is None:
        raise ConsistencyError("the time of rho_t must be given")
    if abs(t_rho - fm.t) > 1e-9 * max(1.0, abs(fm.t)):
        raise ConsistencyError(f"flow map at t={fm.t} but density at t={t_rho}")
    now = scalar_at(rho_t, fm.base_positions, method=method)
    then = scalar_at(rho_0, fm.base_seeds, method=method)
    return float(np.max(np.abs(now - then)))


def track(state: SimState, fm: FlowMap, t_end: float, dt: float, method: str = "interp", mode_cutoff=None):
    """Advance the Boussinesq state and the flow map together up to ``t_end``.

    The solver runs at ``dt/2`` so the flow map's RK4 midpoint stages see
    exact solver output. Returns ``(state, flowmap, grad_u_inf_samples)``.
    """
    from .sobolev import grad_linf

    nsteps = int(np.floor(t_end / dt + 1e-9))
    half = Stepper(state.grid, state.nu, 0.5 * dt, mode_cutoff)
    y = half.to_half(state)
    t = state.t
    cur = state
    samples = [(t, grad_linf(cur.u))]
    for _ in range(nsteps):
        y_mid = half.advance_half(y, t)
        mid = half.from_half(y_mid, t + 0.5 * dt, state.nu)
        y = half.advance_half(y_mid, t + 0.5 * dt)
        nxt = half.from_half(y, t + dt, state.nu)
        provider = SampledVelocity({t: cur.u, t + 0.5 * dt: mid.u, t + dt: nxt.u})
        fm = advance_flowmap(fm, provider, dt, method=method)
        t = t + dt
        cur = nxt
        samples.append((t, grad_linf(cur.u)))
    return cur, fm, samples
