"""Fourier representation of fields on the 2pi-periodic torus.

Coefficients are normalised so that ``f(x) = sum_k c(k) exp(i k.x)``.
Arrays are ``(n, n)`` complex, row-major over ``(k1, k2)``, each axis in
FFT order (nonnegative frequencies first, then negative). Physical arrays
are indexed ``f[j1, j2] = f(2 pi j1 / n, 2 pi j2 / n)``.

The array-level helpers (``forward``, ``inverse``, ``leray_arrays`` ...)
are what the time stepper uses; the ``SpectralScalar``/``SpectralVector``
wrappers carry the grid along and validate inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.fft as sfft

from .errors import DimensionError, SingularMultiplierError, SymmetryViolationError

HERMITIAN_RTOL = 1e-10


@dataclass(frozen=True)
class Grid:
    """Square periodic grid with ``n`` nodes per axis on ``[0, 2pi)``."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 8, got {self.n!r}")

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, 1.0 / self.n).astype(np.int64)

    @cached_property
    def k1(self) -> np.ndarray:
        return np.broadcast_to(self.wavenumbers[:, None], (self.n, self.n)).astype(float)

    @cached_property
    def k2(self) -> np.ndarray:
        return np.broadcast_to(self.wavenumbers[None, :], (self.n, self.n)).astype(float)

    @cached_property
    def dk1(self) -> np.ndarray:
        # odd-derivative multiplier: the Nyquist row has no conjugate partner
        k = self.k1.copy()
        k[self.n // 2, :] = 0.0
        return k

    @cached_property
    def dk2(self) -> np.ndarray:
        k = self.k2.copy()
        k[:, self.n // 2] = 0.0
        return k

    @cached_property
    def ksq(self) -> np.ndarray:
        return self.k1**2 + self.k2**2

    @cached_property
    def kmag(self) -> np.ndarray:
        return np.sqrt(self.ksq)

    @cached_property
    def inv_ksq(self) -> np.ndarray:
        out = np.zeros_like(self.ksq)
        nz = self.ksq > 0
        out[nz] = 1.0 / self.ksq[nz]
        return out

    @cached_property
    def kmax_inf(self) -> np.ndarray:
        return np.maximum(np.abs(self.k1), np.abs(self.k2))

    @cached_property
    def mask(self) -> np.ndarray:
        """Two-thirds rule: keep modes with ``max(|k1|, |k2|) <= n/3``."""
        return 3 * self.kmax_inf <= self.n

    @cached_property
    def nodes(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n) / self.n

    @cached_property
    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.nodes, self.nodes, indexing="ij")

    @property
    def cell_area(self) -> float:
        return (2 * np.pi / self.n) ** 2

    @cached_property
    def _neg(self) -> np.ndarray:
        return (-np.arange(self.n)) % self.n


@lru_cache(maxsize=None)
def grid(n: int) -> Grid:
    """Shared ``Grid`` instance for resolution ``n``."""
    return Grid(n)


# ---------------------------------------------------------------------------
# array-level kernels


def reflect(c: np.ndarray) -> np.ndarray:
    """Return ``c(-k)`` for an FFT-ordered coefficient array."""
    return np.roll(np.flip(c, (0, 1)), 1, (0, 1))


def hermitian_defect(c: np.ndarray) -> float:
    scale = float(np.max(np.abs(c))) if c.size else 0.0
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(c - np.conj(reflect(c))))) / scale


def check_hermitian(c: np.ndarray) -> None:
    if not np.all(np.isfinite(c)):
        raise SymmetryViolationError("coefficients contain non-finite values")
    d = hermitian_defect(c)
    if d > HERMITIAN_RTOL:
        raise SymmetryViolationError(
            f"coefficients are not Hermitian (relative defect {d:.3e})"
        )


def inverse(c: np.ndarray) -> np.ndarray:
    """Physical samples of Hermitian coefficients (no validation)."""
    n = c.shape[-1]
    return sfft.irfft2(c[..., : n // 2 + 1], s=(n, n), norm="forward")


def half_to_full(r: np.ndarray, symmetrize: bool = True) -> np.ndarray:
    """Expand a ``(..., n, n/2+1)`` half spectrum to the full ``(..., n, n)`` array.

    With ``symmetrize`` the self-conjugate columns ``k2 = 0`` and ``k2 = -n/2``
    are made exactly Hermitian; without it the stored half is reproduced bit
    for bit by ``full[..., :n/2+1]``.
    """
    n = r.shape[-2]
    h = n // 2
    out = np.empty(r.shape[:-1] + (n,), dtype=complex)
    out[..., : h + 1] = r
    neg = (-np.arange(n)) % n
    out[..., h + 1 :] = np.conj(r[..., neg, :][..., n - np.arange(h + 1, n)])
    if symmetrize:
        for col in (0, h):
            v = out[..., col]
            out[..., col] = 0.5 * (v + np.conj(v[..., neg]))
    return out


def forward(f: np.ndarray) -> np.ndarray:
    """Exactly Hermitian coefficients of real samples ``f``."""
    return half_to_full(sfft.rfft2(f, norm="forward"))


def leray_arrays(g: Grid, cx: np.ndarray, cy: np.ndarray):
    """Apply ``I - k k^T/|k|^2`` for ``k != 0``; the mean passes unchanged."""
    div = (g.k1 * cx + g.k2 * cy) * g.inv_ksq
    return cx - g.k1 * div, cy - g.k2 * div


def advect_arrays(g: Grid, ux: np.ndarray, uy: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Dealiased coefficients of ``u . grad f`` for velocity ``(ux, uy)``."""
    prod = inverse(ux) * inverse(1j * g.dk1 * c) + inverse(uy) * inverse(1j * g.dk2 * c)
    return np.where(g.mask, forward(prod), 0.0)


def gradient_part_arrays(g: Grid, cx: np.ndarray, cy: np.ndarray):
    """``grad psi`` with ``psi_hat = -i (k.f_hat)/|k|^2``; zero mean mode."""
    div = (g.k1 * cx + g.k2 * cy) * g.inv_ksq
    return g.k1 * div, g.k2 * div


# ---------------------------------------------------------------------------
# field wrappers


@dataclass(frozen=True, eq=False)
class SpectralScalar:
    """Real scalar field stored as Fourier coefficients."""

    grid: Grid
    coeffs: np.ndarray

    def __post_init__(self):
        n = self.grid.n
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (n, n):
            raise DimensionError(f"coefficient array has shape {c.shape}, expected {(n, n)}")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, g: Grid) -> "SpectralScalar":
        return cls(g, np.zeros((g.n, g.n), dtype=complex))

    @classmethod
    def constant(cls, g: Grid, value: float) -> "SpectralScalar":
        c = np.zeros((g.n, g.n), dtype=complex)
        c[0, 0] = value
        return cls(g, c)

    @classmethod
    def from_physical(cls, g: Grid, values: np.ndarray) -> "SpectralScalar":
        return to_spectral(g, values)

    @classmethod
    def from_function(cls, g: Grid, fn) -> "SpectralScalar":
        x1, x2 = g.mesh
        return to_spectral(g, np.broadcast_to(fn(x1, x2), (g.n, g.n)))

    @property
    def mean(self) -> float:
        return float(self.coeffs[0, 0].real)

    def physical(self) -> np.ndarray:
        return to_physical(self)

    def dealiased(self) -> "SpectralScalar":
        return dealias(self)

    def _check(self, other):
        if other.grid != self.grid:
            raise DimensionError(f"grid mismatch: n={self.grid.n} vs n={other.grid.n}")

    def __add__(self, other):
        self._check(other)
        return SpectralScalar(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check(other)
        return SpectralScalar(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, a: float):
        return SpectralScalar(self.grid, self.coeffs * a)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralScalar(self.grid, -self.coeffs)


@dataclass(frozen=True, eq=False)
class SpectralVector:
    """Pair of scalar components ``(x, y)`` on a common grid."""

    x: SpectralScalar
    y: SpectralScalar

    def __post_init__(self):
        if self.x.grid != self.y.grid:
            raise DimensionError("vector components live on different grids")

    @property
    def grid(self) -> Grid:
        return self.x.grid

    @classmethod
    def zeros(cls, g: Grid) -> "SpectralVector":
        return cls(SpectralScalar.zeros(g), SpectralScalar.zeros(g))

    @classmethod
    def from_arrays(cls, g: Grid, cx: np.ndarray, cy: np.ndarray) -> "SpectralVector":
        return cls(SpectralScalar(g, cx), SpectralScalar(g, cy))

    @classmethod
    def from_function(cls, g: Grid, fx, fy) -> "SpectralVector":
        return cls(SpectralScalar.from_function(g, fx), SpectralScalar.from_function(g, fy))

    @property
    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return self.x.coeffs, self.y.coeffs

    def physical(self) -> tuple[np.ndarray, np.ndarray]:
        return to_physical(self.x), to_physical(self.y)

    def divergence(self) -> SpectralScalar:
        return derivative(self.x, 1) + derivative(self.y, 2)

    def divergence_defect(self) -> float:
        """``max_k |k.u_hat(k)| / ||u_hat||`` (0 for the zero field)."""
        g = self.grid
        cx, cy = self.arrays
        scale = np.sqrt(np.sum(np.abs(cx) ** 2 + np.abs(cy) ** 2))
        if scale == 0:
            return 0.0
        return float(np.max(np.abs(g.k1 * cx + g.k2 * cy)) / scale)

    def __add__(self, other):
        return SpectralVector(self.x + other.x, self.y + other.y)

    def __sub__(self, other):
        return SpectralVector(self.x - other.x, self.y - other.y)

    def __mul__(self, a: float):
        return SpectralVector(self.x * a, self.y * a)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralVector(-self.x, -self.y)


def _grid_of(f) -> Grid:
    return f.grid


def to_physical(f: SpectralScalar) -> np.ndarray:
    """Real samples on the grid; raises on non-Hermitian coefficients."""
    check_hermitian(f.coeffs)
    return inverse(f.coeffs)


def to_spectral(g: Grid, values: np.ndarray) -> SpectralScalar:
    values = np.asarray(values)
    if values.shape != (g.n, g.n):
        raise DimensionError(f"sample array has shape {values.shape}, expected {(g.n, g.n)}")
    if np.iscomplexobj(values):
        if np.max(np.abs(values.imag), initial=0.0) > HERMITIAN_RTOL * max(
            1.0, float(np.max(np.abs(values.real), initial=0.0))
        ):
            raise SymmetryViolationError("physical samples are not real")
        values = values.real
    return SpectralScalar(g, forward(np.asarray(values, dtype=float)))


def derivative(f: SpectralScalar, axis: int) -> SpectralScalar:
    """Partial derivative along axis 1 (x1) or 2 (x2)."""
    g = f.grid
    if axis == 1:
        k = g.dk1
    elif axis == 2:
        k = g.dk2
    else:
        raise ValueError(f"axis must be 1 or 2, got {axis!r}")
    return SpectralScalar(g, 1j * k * f.coeffs)


def gradient(f: SpectralScalar) -> SpectralVector:
    return SpectralVector(derivative(f, 1), derivative(f, 2))


def dealias(f):
    """Zero every mode outside the two-thirds band."""
    if isinstance(f, SpectralVector):
        return SpectralVector(dealias(f.x), dealias(f.y))
    return SpectralScalar(f.grid, np.where(f.grid.mask, f.coeffs, 0.0))


def truncate(f, m: int):
    """Galerkin cutoff: zero modes with ``max(|k1|, |k2|) > m``."""
    if isinstance(f, SpectralVector):
        return SpectralVector(truncate(f.x, m), truncate(f.y, m))
    return SpectralScalar(f.grid, np.where(f.grid.kmax_inf <= m, f.coeffs, 0.0))


def product(f: SpectralScalar, g_: SpectralScalar) -> SpectralScalar:
    """Dealiased pseudo-spectral product."""
    f._check(g_)
    g = f.grid
    c = forward(inverse(f.coeffs) * inverse(g_.coeffs))
    return SpectralScalar(g, np.where(g.mask, c, 0.0))


def leray_project(v: SpectralVector) -> SpectralVector:
    g = v.grid
    cx, cy = leray_arrays(g, *v.arrays)
    return SpectralVector.from_arrays(g, cx, cy)


MEAN_RTOL = 1e-12


def _mean_free_required(coeffs, what):
    # rounding-level means (e.g. from a forward transform) count as zero
    if abs(coeffs[0, 0]) > MEAN_RTOL * float(np.max(np.abs(coeffs))):
        raise SingularMultiplierError(f"{what} requires a mean-zero field (mean={coeffs[0, 0].real!r})")


def fractional_laplacian(f: SpectralScalar, s: float) -> SpectralScalar:
    """Multiplier ``|k|^s``; the mean mode passes through for ``s >= 0``."""
    if s < -1:
        raise ValueError(f"exponent must be >= -1, got {s!r}")
    g = f.grid
    mult = np.ones_like(g.kmag)
    nz = g.kmag > 0
    mult[nz] = g.kmag[nz] ** s
    if s < 0:
        _mean_free_required(f.coeffs, f"Lambda^{s}")
        mult[0, 0] = 0.0
    return SpectralScalar(g, mult * f.coeffs)


def stokes_apply(u: SpectralVector, power: float = 1.0) -> SpectralVector:
    """``A^power u`` with ``A = -P Laplacian`` (eigenvalue ``|k|^2``)."""
    g = u.grid
    cx, cy = leray_arrays(g, *u.arrays)
    mult = np.zeros_like(g.ksq)
    nz = g.ksq > 0
    mult[nz] = g.ksq[nz] ** power
    if power == 0:
        mult[0, 0] = 1.0
    elif power < 0:
        _mean_free_required(cx, f"A^{power}")
        _mean_free_required(cy, f"A^{power}")
    return SpectralVector.from_arrays(g, mult * cx, mult * cy)


def inner(f, g_) -> float:
    """L^2 inner product via Parseval, ``(2pi)^2 sum f_hat conj(g_hat)``."""
    if isinstance(f, SpectralVector):
        return inner(f.x, g_.x) + inner(f.y, g_.y)
    f._check(g_)
    return float((2 * np.pi) ** 2 * np.sum(f.coeffs * np.conj(g_.coeffs)).real)


def taylor_green(g: Grid, amplitude: float = 1.0) -> SpectralVector:
    """``(sin x1 cos x2, -cos x1 sin x2)`` scaled by ``amplitude``."""
    return SpectralVector.from_function(
        g,
        lambda x1, x2: amplitude * np.sin(x1) * np.cos(x2),
        lambda x1, x2: -amplitude * np.cos(x1) * np.sin(x2),
    )
