"""Norms, the Q projection, commutator residuals and time-integrated norms.

Sobolev norms use the multiplier ``(1 + |k|^2)^{s/2}`` with the ``(2pi)^2``
Parseval factor. Lebesgue-type norms are grid quadratures
``((2pi/n)^2 sum |f(x_j)|^p)^{1/p}`` (a maximum for ``p = inf``); vector
fields use the pointwise Euclidean magnitude and derivative tensors the
pointwise Frobenius magnitude.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidNormSpecError, OrderingError, UnsupportedExponentError
from .spectral import (
    SpectralScalar,
    SpectralVector,
    advect_arrays,
    fractional_laplacian,
    gradient_part_arrays,
    inverse,
)

_KINDS = ("sobolev", "lebesgue", "w1inf", "w2p")


@dataclass(frozen=True)
class NormSpec:
    kind: str
    s: float = 0.0
    p: float = 2.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InvalidNormSpecError(f"unknown norm kind {self.kind!r}")
        if not (self.p >= 1):
            raise InvalidNormSpecError(f"p must be >= 1, got {self.p!r}")

    @classmethod
    def sobolev(cls, s: float) -> "NormSpec":
        return cls("sobolev", s=s)

    @classmethod
    def lebesgue(cls, p: float) -> "NormSpec":
        return cls("lebesgue", p=p)

    @classmethod
    def w1inf(cls) -> "NormSpec":
        return cls("w1inf", p=math.inf)

    @classmethod
    def w2p(cls, p: float) -> "NormSpec":
        return cls("w2p", p=p)


def _components(f):
    if isinstance(f, SpectralVector):
        return [f.x.coeffs, f.y.coeffs]
    return [f.coeffs]


def _jet(f, order: int) -> list[np.ndarray]:
    """Pointwise magnitudes of ``D^j f`` for ``j = 0..order``."""
    g = f.grid
    comps = _components(f)
    mults = [[1.0]]
    for _ in range(order):
        mults.append([m * 1j * k for m in mults[-1] for k in (g.dk1, g.dk2)])
    out = []
    for level in mults:
        sq = 0.0
        for c in comps:
            for m in level:
                sq = sq + inverse(m * c) ** 2
        out.append(np.sqrt(sq))
    return out


def _quadrature(values: np.ndarray, p: float, cell_area: float) -> float:
    if math.isinf(p):
        return float(np.max(values))
    return float((cell_area * np.sum(values**p)) ** (1.0 / p))


def sobolev_norm(f, s: float) -> float:
    g = f.grid
    w = (1.0 + g.ksq) ** s
    total = sum(float(np.sum(w * np.abs(c) ** 2)) for c in _components(f))
    return 2 * np.pi * math.sqrt(total)


def norm(f, spec: NormSpec) -> float:
    """Norm of a scalar or vector field according to ``spec``."""
    if spec.kind == "sobolev":
        return sobolev_norm(f, spec.s)
    area = f.grid.cell_area
    if spec.kind == "lebesgue":
        return _quadrature(_jet(f, 0)[0], spec.p, area)
    if spec.kind == "w1inf":
        jet = _jet(f, 1)
        return float(np.max(jet[0]) + np.max(jet[1]))
    jet = _jet(f, 2)
    if math.isinf(spec.p):
        return float(max(np.max(j) for j in jet))
    return float((area * sum(np.sum(j**spec.p) for j in jet)) ** (1.0 / spec.p))


def grad_linf(u) -> float:
    """``max_x |grad u(x)|`` (Frobenius)."""
    return float(np.max(_jet(u, 1)[1]))


def q_project(f: SpectralVector) -> SpectralVector:
    """Gradient part ``grad psi`` of ``f`` with ``Laplacian psi = div f`` and zero-mean ``psi``."""
    g = f.grid
    cx, cy = gradient_part_arrays(g, *f.arrays)
    return SpectralVector.from_arrays(g, cx, cy)


@dataclass(frozen=True)
class CommutatorReport:
    residual_norm: float
    bound_value: float
    ratio: float
    s: float


def commutator_residual(u: SpectralVector, rho: SpectralScalar, s: float) -> CommutatorReport:
    """L^2 size of ``Lambda^s(u.grad rho) - u.grad Lambda^s rho`` against its product bound.

    For ``0 < s < 1`` the bound is
    ``||grad u||_inf ||Lambda^s rho|| + ||u||_{H^2} ||rho||_{H^s}``; for
    ``1 < s < 2`` it is ``||u||_{H^{s+1}} ||rho||_{H^s}``.
    """
    if not (0 < s < 2) or s == 1:
        raise UnsupportedExponentError(f"commutator exponent must lie in (0,2) without 1, got {s!r}")
    u.x._check(rho)
    g = rho.grid
    ux, uy = u.arrays
    lam_rho = fractional_laplacian(rho, s)
    lhs = fractional_laplacian(SpectralScalar(g, advect_arrays(g, ux, uy, rho.coeffs)), s)
    rhs = advect_arrays(g, ux, uy, lam_rho.coeffs)
    residual = sobolev_norm(SpectralScalar(g, lhs.coeffs - rhs), 0.0)
    if s < 1:
        bound = grad_linf(u) * sobolev_norm(lam_rho, 0.0) + sobolev_norm(u, 2.0) * sobolev_norm(rho, s)
    else:
        bound = sobolev_norm(u, s + 1.0) * sobolev_norm(rho, s)
    if bound > 0:
        ratio = residual / bound
    else:
        ratio = 0.0 if residual == 0 else math.inf
    return CommutatorReport(residual, bound, ratio, s)


def mixed_time_norm(samples, q: float) -> float:
    """``(int value(t)^q dt)^{1/q}`` by the trapezoidal rule over ``(t, value)`` samples."""
    if q < 1:
        raise ValueError(f"q must be >= 1, got {q!r}")
    arr = np.asarray(samples, dtype=float).reshape(-1, 2)
    if len(arr) < 2:
        return 0.0
    t, v = arr[:, 0], arr[:, 1]
    if np.any(np.diff(t) < 0):
        raise OrderingError("samples must be ordered by time")
    if np.any(v < 0):
        raise ValueError("sample values must be nonnegative")
    w = v**q
    integral = float(np.sum(0.5 * (w[1:] + w[:-1]) * np.diff(t)))
    return integral ** (1.0 / q)


def mixed_exponents_admissible(delta: float, epsilon: float, s: float) -> bool:
    """The time/space exponent constraint ``delta/(1+delta) - 1/(2+eps) < s/2 - 1/2``."""
    return delta / (1.0 + delta) - 1.0 / (2.0 + epsilon) < 0.5 * s - 0.5
