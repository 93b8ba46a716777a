"""Verification studies shared by the command line and the test suite."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import SimState, Stepper, taylor_time_derivatives
from .sobolev import commutator_residual, mixed_time_norm, sobolev_norm
from .spectral import grid
from .synthesis import synthesize_field
from .trajectories import FlowMap, lattice_seeds, track, transport_error

TWO_PI = 2.0 * np.pi


def _l2(a: np.ndarray) -> float:
    return TWO_PI * float(np.sqrt(np.sum(np.abs(a) ** 2)))


def finite_difference_derivatives(state: SimState, h: float = 1e-3, mode_cutoff=None) -> list[np.ndarray]:
    """First and second time derivatives of solver output by 5-point centered stencils.

    Returns ``[d1, d2]`` as ``(3, n, n)`` coefficient stacks ``(u.x, u.y, rho)``.
    """
    g = state.grid
    fwd = Stepper(g, state.nu, h, mode_cutoff, warn_cfl=False)
    bwd = Stepper(g, state.nu, -h, mode_cutoff, warn_cfl=False)
    y0 = fwd.to_half(state)
    yp1 = fwd.advance_half(y0, state.t)
    yp2 = fwd.advance_half(yp1, state.t + h)
    ym1 = bwd.advance_half(y0, state.t)
    ym2 = bwd.advance_half(ym1, state.t - h)
    full = [fwd.from_half(y, 0.0).as_array() for y in (ym2, ym1, y0, yp1, yp2)]
    fm2, fm1, f0, f1, f2 = full
    d1 = (-f2 + 8 * f1 - 8 * fm1 + fm2) / (12 * h)
    d2 = (-f2 + 16 * f1 - 30 * f0 + 16 * fm1 - fm2) / (12 * h * h)
    return [d1, d2]


@dataclass(frozen=True)
class TaylorComparison:
    order: int
    u_rel_error: float
    rho_rel_error: float
    u_norm: float
    rho_norm: float


def taylor_check(state: SimState, order: int = 2, h: float = 1e-3, mode_cutoff=None) -> list[TaylorComparison]:
    """Relative L^2 mismatch between the Taylor recursion and finite differences, per order <= 2."""
    td = taylor_time_derivatives(state, order, mode_cutoff)
    fds = finite_difference_derivatives(state, h, mode_cutoff)
    out = []
    for j in range(1, min(order, 2) + 1):
        ua = np.stack(td.u[j].arrays)
        ra = td.rho[j].coeffs
        fd = fds[j - 1]
        un, rn = _l2(ua), _l2(ra)
        ue = _l2(ua - fd[:2]) / un if un > 0 else _l2(fd[:2])
        re = _l2(ra - fd[2]) / rn if rn > 0 else _l2(fd[2])
        out.append(TaylorComparison(j, ue, re, un, rn))
    return out


def random_state(n: int, seed: int, s_u: float = 2.0, s_rho: float = 2.0, u_h1: float | None = None,
                 rho_h1: float | None = None, nu: float = 1.0) -> SimState:
    """Seeded mean-zero state, optionally rescaled to prescribed H^1 norms."""
    g = grid(n)
    u = synthesize_field(g, s_u, seed, "divfree-vector")
    rho = synthesize_field(g, s_rho, seed ^ 0x5A5A5A5A, "scalar")
    if u_h1 is not None:
        u = u * (u_h1 / sobolev_norm(u, 1.0))
    if rho_h1 is not None:
        rho = rho * (rho_h1 / sobolev_norm(rho, 1.0))
    return SimState(0.0, u, rho, nu)


def commutator_study(n: int, s_values, trials: int, seed: int = 0, s_u: float = 3.0, s_rho: float = 2.0):
    """Residual/bound ratios over seeded pairs at resolutions ``n`` and ``2n``.

    Returns ``{s: {"n": C*(n), "2n": C*(2n), "rows": [...]}}`` where
    ``C*`` is the largest observed ratio.
    """
    out = {}
    for s in s_values:
        rows = []
        for res in (n, 2 * n):
            g = grid(res)
            for tr in range(trials):
                u = synthesize_field(g, s_u, seed + tr, "divfree-vector")
                rho = synthesize_field(g, s_rho, (seed + tr) ^ 0x5A5A5A5A, "scalar")
                rep = commutator_residual(u, rho, s)
                rows.append({"trial": tr, "n": res, "s": s, "residual": rep.residual_norm,
                             "bound": rep.bound_value, "ratio": rep.ratio})
        c_n = max(r["ratio"] for r in rows if r["n"] == n)
        c_2n = max(r["ratio"] for r in rows if r["n"] == 2 * n)
        out[s] = {"n": c_n, "2n": c_2n, "rows": rows}
    return out


@dataclass(frozen=True)
class TrajectoryReport:
    seeds: int
    t: float
    transport_error: float
    jacobian_min: float
    jacobian_max: float
    grad_u_inf_integral: float


def trajectory_study(state: SimState, count: int, t_end: float, dt: float, h: float = 1e-4,
                     method: str = "interp", mode_cutoff=None) -> TrajectoryReport:
    fm = FlowMap.with_stencil(lattice_seeds(count), h=h, t=state.t)
    final, fm, samples = track(state, fm, t_end, dt, method=method, mode_cutoff=mode_cutoff)
    err = transport_error(fm, final, state.rho, method=method)
    jac = fm.jacobian_determinants()
    return TrajectoryReport(count, fm.t, err, float(jac.min()), float(jac.max()), mixed_time_norm(samples, 1.0))
