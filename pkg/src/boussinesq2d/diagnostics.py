"""Per-snapshot norm records, conservation and Gronwall checks, steady-state monitors.

Buoyancy quantities use the density fluctuation ``rho - mean rho``: a
constant density only shifts the hydrostatic pressure and never enters the
velocity equation.
"""
from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import SimState, rhs, self_advection
from .errors import EmptyInputError, InsufficientDataError
from .sobolev import NormSpec, grad_linf, norm, q_project, sobolev_norm
from .spectral import SpectralScalar, SpectralVector, inner, leray_arrays

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    kinetic_energy: float
    grad_u_l2: float
    grad_u_inf: float
    au_minus_buoy_l2: float
    au_minus_buoy_h1: float
    buoy_solenoidal: float
    q_residual: float
    rho_l1: float
    rho_l2: float
    rho_l4: float
    rho_linf: float
    rho_h1: float
    rho_h2: float
    u_hs: float
    rho_hs: float
    u_w2p: float
    a_t: float
    b_t: float
    au_l2: float = 0.0
    buoyancy_work: float = 0.0
    rho_mean: float = 0.0

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in dataclasses.fields(cls)]

    def values(self) -> list[float]:
        return [getattr(self, c) for c in self.columns()]

    @property
    def rho_fluct_l2(self) -> float:
        """``||rho - mean rho||_{L^2}`` from the stored spectral L^2 norm."""
        return math.sqrt(max(self.rho_l2**2 - (TWO_PI * self.rho_mean) ** 2, 0.0))


def _fluctuation(rho: SpectralScalar) -> np.ndarray:
    c = rho.coeffs.copy()
    c[0, 0] = 0.0
    return c


def _l2(*arrays) -> float:
    return TWO_PI * math.sqrt(sum(float(np.sum(np.abs(a) ** 2)) for a in arrays))


def _weighted_l2(w: np.ndarray, *arrays) -> float:
    return TWO_PI * math.sqrt(sum(float(np.sum(w * np.abs(a) ** 2)) for a in arrays))


def solenoidal_buoyancy(rho: SpectralScalar) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients of ``P((rho - mean rho) e2)``."""
    c = _fluctuation(rho)
    return leray_arrays(rho.grid, np.zeros_like(c), c)


def snapshot(state: SimState, config=None) -> DiagnosticsRecord:
    """Norm record of one state.

    ``config`` supplies ``s_u``, ``s_rho`` and ``epsilon`` (defaults 2, 2, 1).
    """
    s_u = getattr(config, "s_u", 2.0)
    s_rho = getattr(config, "s_rho", 2.0)
    eps = getattr(config, "epsilon", 1.0)
    g = state.grid
    u, rho, nu = state.u, state.rho, state.nu
    ux, uy = u.arrays
    r = rho.coeffs

    grad_u_l2 = _weighted_l2(g.ksq, ux, uy)
    bx, by = solenoidal_buoyancy(rho)
    ax, ay = leray_arrays(g, g.ksq * ux, g.ksq * uy)
    dx, dy = nu * ax - bx, nu * ay - by
    q = q_project(self_advection(u))
    u_w2p = norm(u, NormSpec.w2p(2.0 + eps))
    rho_h1 = _weighted_l2(g.ksq, r)
    return DiagnosticsRecord(
        t=float(state.t),
        kinetic_energy=0.5 * _l2(ux, uy) ** 2,
        grad_u_l2=grad_u_l2,
        grad_u_inf=grad_linf(u),
        au_minus_buoy_l2=_l2(dx, dy),
        au_minus_buoy_h1=sobolev_norm(SpectralVector.from_arrays(g, dx, dy), 1.0),
        buoy_solenoidal=_l2(bx, by),
        q_residual=_l2(*q.arrays),
        rho_l1=norm(rho, NormSpec.lebesgue(1)),
        rho_l2=_l2(r),
        rho_l4=norm(rho, NormSpec.lebesgue(4)),
        rho_linf=norm(rho, NormSpec.lebesgue(math.inf)),
        rho_h1=rho_h1,
        rho_h2=_weighted_l2(g.ksq**2, r),
        u_hs=sobolev_norm(u, s_u),
        rho_hs=sobolev_norm(rho, s_rho),
        u_w2p=u_w2p,
        a_t=norm(u, NormSpec.w1inf()) + u_w2p,
        b_t=rho_h1 * u_w2p,
        au_l2=_l2(ax, ay),
        buoyancy_work=inner(SpectralScalar(g, _fluctuation(rho)), u.y),
        rho_mean=rho.mean,
    )


# ---------------------------------------------------------------------------
# energy budget


def energy_terms(state: SimState) -> tuple[float, float, float]:
    """``(E, nu ||grad u||^2, <rho - mean rho, u_2>)`` for the energy identity
    ``dE/dt = -nu ||grad u||^2 + <rho', u_2>``."""
    g = state.grid
    ux, uy = state.u.arrays
    e = 0.5 * _l2(ux, uy) ** 2
    diss = state.nu * _weighted_l2(g.ksq, ux, uy) ** 2
    work = inner(SpectralScalar(g, _fluctuation(state.rho)), state.u.y)
    return e, diss, work


def energy_balance_residuals(t, energy, dissipation, work) -> np.ndarray:
    """Per-step residual ``(E_{i+1} - E_i)/dt + avg(dissipation) - avg(work)``.

    Inputs are samples at every step of a uniform-step run. Step averages
    of the source terms use the four-point rule
    ``(-f_{i-1} + 13 f_i + 13 f_{i+1} - f_{i+2}) / 24`` and a one-sided
    three-point rule at the ends (both fourth-order in ``dt`` for the
    residual), so no substeps are needed.
    """
    t = np.asarray(t, dtype=float)
    e = np.asarray(energy, dtype=float)
    src = np.asarray(dissipation, dtype=float) - np.asarray(work, dtype=float)
    m = len(t)
    if m < 2:
        return np.zeros(0)
    dts = np.diff(t)
    avg = np.empty(m - 1)
    if m == 2:
        avg[:] = 0.5 * (src[0] + src[1])
    elif m == 3:
        avg[0] = (5 * src[0] + 8 * src[1] - src[2]) / 12
        avg[1] = (-src[0] + 8 * src[1] + 5 * src[2]) / 12
    else:
        avg[1:-1] = (-src[:-3] + 13 * src[1:-2] + 13 * src[2:-1] - src[3:]) / 24
        avg[0] = (5 * src[0] + 8 * src[1] - src[2]) / 12
        avg[-1] = (-src[-3] + 8 * src[-2] + 5 * src[-1]) / 12
    return np.diff(e) / dts + avg


def _exp_weights(lam: np.ndarray, nodes: tuple) -> list[np.ndarray]:
    """Per-mode weights for ``(1/dt) int_0^dt q`` from the samples ``q(s_j dt)``.

    ``q = exp(-lam s) p`` with ``p`` interpolated by a polynomial through the
    nodes ``s_j``; the exponential is integrated exactly by Gauss-Legendre.
    """
    x, w = np.polynomial.legendre.leggauss(12)
    s = 0.5 * (x + 1.0)
    w = 0.5 * w
    decay = np.exp(-lam[..., None] * s)
    out = []
    for j, sj in enumerate(nodes):
        ell = np.ones_like(s)
        for m, sm in enumerate(nodes):
            if m != j:
                ell = ell * (s - sm) / (sj - sm)
        out.append(np.sum(decay * (w * ell), axis=-1) * np.exp(lam * sj))
    return out


class EnergyBudget:
    """Streaming per-step residual of ``dE/dt = -nu ||grad u||^2 + <rho', u_2>``.

    Fed with the half-spectrum state after every step. The source terms are
    averaged over each step mode by mode with exponentially fitted weights
    (samples ``i-1 .. i+2``, one-sided at the ends), so the stiff viscous
    transient of rough data is integrated exactly and the residual measures
    the time stepper, not the quadrature.
    """

    _STENCILS = {"first": (0, 1, 2), "mid": (-1, 0, 1, 2), "last": (-1, 0, 1), "two": (0, 1)}

    def __init__(self, g, nu: float, dt: float):
        h = g.n // 2 + 1
        w = np.full(h, 2.0)
        w[0] = w[-1] = 1.0
        self.w = w[None, :] * TWO_PI**2
        self.ksq = g.ksq[:, :h]
        self.nu = nu
        self.dt = dt
        self._wd = {k: _exp_weights(2 * nu * self.ksq * dt, v) for k, v in self._STENCILS.items()}
        self._ww = {k: _exp_weights(nu * self.ksq * dt, v) for k, v in self._STENCILS.items()}
        self.t: list[float] = []
        self.energy: list[float] = []
        self._window: list[tuple] = []
        self.residuals: list[float] = []

    def _terms(self, y):
        ux, uy, r = y
        dq = self.nu * self.w * self.ksq * (np.abs(ux) ** 2 + np.abs(uy) ** 2)
        rf = r.copy()
        rf[0, 0] = 0.0
        wq = self.w * (rf * np.conj(uy)).real
        return dq, wq

    def _avg(self, kind: str, samples) -> float:
        wd, ww = self._wd[kind], self._ww[kind]
        d = sum(float(np.sum(c * s[0])) for c, s in zip(wd, samples))
        w = sum(float(np.sum(c * s[1])) for c, s in zip(ww, samples))
        return d - w

    def push(self, t: float, y) -> None:
        ux, uy, _ = y
        self.t.append(float(t))
        self.energy.append(0.5 * float(np.sum(self.w * (np.abs(ux) ** 2 + np.abs(uy) ** 2))))
        self._window.append(self._terms(y))
        m = len(self.t)
        if m == 3:
            self._emit(0, "first", self._window[0:3])
        elif m >= 4:
            self._emit(m - 3, "mid", self._window[-4:])
            self._window.pop(0)

    def _emit(self, i: int, kind: str, samples) -> None:
        de = (self.energy[i + 1] - self.energy[i]) / (self.t[i + 1] - self.t[i])
        self.residuals.append(de + self._avg(kind, samples))

    def finish(self) -> np.ndarray:
        """Close the stream; returns one residual per step."""
        m = len(self.t)
        if m == 2:
            self._emit(0, "two", self._window[-2:])
        elif m >= 3:
            self._emit(m - 2, "last", self._window[-3:])
        self._window = []
        return np.asarray(self.residuals)

    def max_relative(self) -> float:
        res = np.asarray(self.residuals)
        if not len(res):
            return 0.0
        return float(np.max(np.abs(res)) / max(1.0, max(self.energy)))


# ---------------------------------------------------------------------------
# series analyses


@dataclass(frozen=True)
class ConservationReport:
    drift: dict

    def max_drift(self) -> float:
        return max(self.drift.values())


def conservation_report(series) -> ConservationReport:
    """Relative drift ``max_t |‖rho(t)‖_p - ‖rho_0‖_p| / ‖rho_0‖_p`` for p in 1, 2, 4, inf."""
    series = list(series)
    if not series:
        raise EmptyInputError("conservation_report needs at least one record")
    out = {}
    for key, name in (("1", "rho_l1"), ("2", "rho_l2"), ("4", "rho_l4"), ("inf", "rho_linf")):
        vals = np.array([getattr(r, name) for r in series])
        ref = vals[0]
        dev = float(np.max(np.abs(vals - ref)))
        out[key] = dev / ref if ref > 0 else dev
    return ConservationReport(out)


@dataclass(frozen=True)
class GronwallVerdict:
    constant: float
    constant_coarse: float | None
    stable: bool
    envelope_holds: bool
    envelope_margin: float
    passed: bool


def _fit_constant(t, h, a, b) -> float:
    if len(t) < 3:
        return math.nan
    deriv = (h[2:] - h[:-2]) / (t[2:] - t[:-2])
    denom = a[1:-1] * h[1:-1] + b[1:-1]
    c = 0.0
    for d, q in zip(deriv, denom):
        if d <= 0:
            continue
        c = max(c, d / q if q > 0 else math.inf)
    return c


def _cumtrapz(t, v) -> np.ndarray:
    out = np.zeros_like(v)
    out[1:] = np.cumsum(0.5 * (v[1:] + v[:-1]) * np.diff(t))
    return out


ENVELOPE_RTOL = 1e-3


def gronwall_check(series, envelope_rtol: float = ENVELOPE_RTOL) -> GronwallVerdict:
    """Fit ``C`` in ``d/dt ||D^2 rho|| <= C (a ||D^2 rho|| + b)`` and check the envelope.

    ``C`` is the smallest constant satisfying the inequality for centered
    differences at every interior sample. It is also fitted on every other
    sample (doubled snapshot interval, when at least 5 records exist); the
    verdict requires the two to agree within a factor 2 and
    ``h(t) <= (h(0) + C int b) exp(C int a)`` at every sample, up to
    ``envelope_rtol``.
    """
    series = list(series)
    if len(series) < 3:
        raise InsufficientDataError(f"need at least 3 records, got {len(series)}")
    t = np.array([r.t for r in series])
    h = np.array([r.rho_h2 for r in series])
    a = np.array([r.a_t for r in series])
    b = np.array([r.b_t for r in series])
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise InsufficientDataError("a_t and b_t must be finite")
    c = _fit_constant(t, h, a, b)
    c2 = _fit_constant(t[::2], h[::2], a[::2], b[::2]) if len(series) >= 5 else None
    if not math.isfinite(c):
        stable = False
    elif c2 is None:
        stable = True
    elif max(c, c2) == 0:
        stable = True
    else:
        stable = math.isfinite(c2) and min(c, c2) > 0 and max(c, c2) / min(c, c2) <= 2.0
    if math.isfinite(c):
        env = (h[0] + c * _cumtrapz(t, b)) * np.exp(c * _cumtrapz(t, a))
        margin = float(np.max((h - env) / np.maximum(env, np.finfo(float).tiny)))
        holds = bool(np.all(h <= env * (1 + envelope_rtol) + 1e-300))
    else:
        margin, holds = math.inf, False
    return GronwallVerdict(c, c2, stable, holds, margin, bool(stable and holds))


@dataclass(frozen=True)
class SteadyStateVerdict:
    rho_cauchy_l2: float
    buoy_solenoidal_final: float
    norm_preservation_gap: float
    converged: bool
    threshold: float
    cauchy_small: bool
    projection_small: bool
    consistent: bool
    au_trend: list
    pressure_residual_trend: list

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def pressure_residual(state: SimState, rho_limit: SpectralScalar, mode_cutoff=None) -> float:
    """``||Q(grad p - rho_limit' e2)||_{L^2}`` with ``grad p - rho' e2`` taken from the momentum equation."""
    g = state.grid
    du, _ = rhs(state, mode_cutoff)
    u = state.u
    ux, uy = u.arrays
    adv = self_advection(u)
    fl = _fluctuation(state.rho) - _fluctuation(rho_limit)
    vx = -du.x.coeffs - state.nu * g.ksq * ux - adv.x.coeffs
    vy = -du.y.coeffs - state.nu * g.ksq * uy - adv.y.coeffs + fl
    q = q_project(SpectralVector.from_arrays(g, vx, vy))
    return _l2(*q.arrays)


def steady_state_equivalence(series, late_states, threshold: float = 1e-3) -> SteadyStateVerdict:
    """Compare the two characterizations of a stratified limit.

    (i) the late densities form a Cauchy family in ``L^2``; (ii) the
    solenoidal buoyancy vanishes and the gradient part of the buoyancy
    carries the whole (conserved) fluctuation norm. Thresholds are relative
    to ``||rho_0 - mean||_{L^2}`` (absolute when that is zero).
    """
    series = list(series)
    late_states = list(late_states)
    if len(late_states) < 2:
        raise InsufficientDataError(f"need at least 2 late states, got {len(late_states)}")
    if series:
        ref = series[0].rho_fluct_l2
    else:
        ref = _l2(_fluctuation(late_states[0].rho))
    thr = threshold * ref if ref > 0 else threshold

    cauchy = 0.0
    for s1, s2 in itertools.combinations(late_states, 2):
        cauchy = max(cauchy, _l2(s1.rho.coeffs - s2.rho.coeffs))
    last = late_states[-1]
    bx, by = solenoidal_buoyancy(last.rho)
    buoy_final = _l2(bx, by)
    if series and series[-1].t >= last.t:
        buoy_final = max(buoy_final, series[-1].buoy_solenoidal)
    fl = _fluctuation(last.rho)
    gx, gy = bx, -by + fl
    gap = abs(_l2(gx, gy) - ref)

    cauchy_small = cauchy < thr
    proj_small = buoy_final < thr and gap < thr
    converged = cauchy_small and buoy_final < thr
    au_trend, p_trend = [], []
    if converged:
        for st in late_states:
            ax, ay = leray_arrays(st.grid, st.grid.ksq * st.u.x.coeffs, st.grid.ksq * st.u.y.coeffs)
            au_trend.append((float(st.t), _l2(ax, ay)))
            p_trend.append((float(st.t), pressure_residual(st, last.rho)))
    return SteadyStateVerdict(
        rho_cauchy_l2=cauchy,
        buoy_solenoidal_final=buoy_final,
        norm_preservation_gap=gap,
        converged=converged,
        threshold=thr,
        cauchy_small=cauchy_small,
        projection_small=proj_small,
        consistent=cauchy_small == proj_small,
        au_trend=au_trend,
        pressure_residual_trend=p_trend,
    )
