"""Initial data: seeded fields sitting just inside a prescribed Sobolev class."""
from __future__ import annotations

import numpy as np

from .errors import InvalidExponentError
from .spectral import Grid, SpectralScalar, SpectralVector, leray_project, taylor_green

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    x = (x + np.uint64(0x9E3779B97F4A7C15)) & _MASK64
    x = ((x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & _MASK64
    x = ((x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & _MASK64
    return x ^ (x >> np.uint64(31))


def mode_phases(seed: int, salt: int, k1: np.ndarray, k2: np.ndarray) -> np.ndarray:
    """Uniform phases in ``[0, 2pi)`` keyed on ``(seed, salt, k1, k2)``.

    Keying on the wavevector (not on a stream position) makes the modes a
    field shares with a coarser grid identical across resolutions.
    """
    with np.errstate(over="ignore"):
        h = _splitmix64(np.full(k1.shape, np.uint64(seed)))
        h = _splitmix64(h ^ np.uint64(salt))
        h = _splitmix64(h ^ k1.astype(np.int64).view(np.uint64))
        h = _splitmix64(h ^ k2.astype(np.int64).view(np.uint64))
    return (h >> np.uint64(11)).astype(np.float64) * (2.0 * np.pi / 2.0**53)


def _scalar_spectrum(g: Grid, s: float, seed: int, salt: int) -> np.ndarray:
    k1, k2 = g.k1, g.k2
    canonical = (k1 > 0) | ((k1 == 0) & (k2 > 0))
    amp = np.zeros_like(g.kmag)
    nz = g.kmag > 0
    amp[nz] = g.kmag[nz] ** (-(s + 1.01))
    c = np.where(canonical & g.mask, amp * np.exp(1j * mode_phases(seed, salt, k1, k2)), 0.0)
    return c + np.conj(np.roll(np.flip(c, (0, 1)), 1, (0, 1)))


def synthesize_field(g: Grid, s: float, seed: int, kind: str = "scalar"):
    """Mean-zero dealiased field with coefficient magnitudes ``|k|^-(s+1.01)``.

    ``kind`` is ``"scalar"`` or ``"divfree-vector"`` (two independent scalar
    spectra, Leray-projected). The result has finite ``H^sigma`` norm
    exactly for ``sigma < s + 0.01``.
    """
    if not s > 0:
        raise InvalidExponentError(f"regularity exponent must be positive, got {s!r}")
    if kind == "scalar":
        return SpectralScalar(g, _scalar_spectrum(g, s, seed, 0))
    if kind == "divfree-vector":
        v = SpectralVector.from_arrays(g, _scalar_spectrum(g, s, seed, 1), _scalar_spectrum(g, s, seed, 2))
        return leray_project(v)
    raise ValueError(f"kind must be 'scalar' or 'divfree-vector', got {kind!r}")


def stratified_density(g: Grid, amplitude: float = 1.0, mode: int = 1) -> SpectralScalar:
    """``amplitude * sin(mode * x2)``."""
    return SpectralScalar.from_function(g, lambda x1, x2: amplitude * np.sin(mode * x2))


def initial_state(config):
    """Build the initial :class:`SimState` described by an ``ExperimentConfig``."""
    from .checkpoint import load_checkpoint
    from .dynamics import SimState
    from .sobolev import sobolev_norm
    from .spectral import dealias, grid

    g = grid(config.n)
    kind = config.init_kind
    if kind == "custom-file":
        st = load_checkpoint(config.init_file)
        if st.grid.n != config.n:
            raise ValueError(f"init_file has n={st.grid.n}, config has n={config.n}")
        return st

    def scaled(field, target):
        if target is None:
            return field
        norm = sobolev_norm(field, 1.0)
        return field * (target / norm if norm > 0 else 0.0)

    if kind == "taylor-green":
        u = dealias(taylor_green(g, config.u_amplitude))
        rho = scaled(synthesize_field(g, config.s_rho, config.seed, "scalar"), config.rho_norm_h1) if config.rho_norm_h1 else SpectralScalar.zeros(g)
    elif kind == "stratified":
        u = SpectralVector.zeros(g)
        rho = dealias(stratified_density(g, config.rho_amplitude, config.stratified_mode))
    else:
        u = scaled(synthesize_field(g, config.s_u, config.seed, "divfree-vector"), config.u_norm_h1)
        rho = scaled(synthesize_field(g, config.s_rho, config.seed ^ 0x5A5A5A5A, "scalar"), config.rho_norm_h1)
    if config.mode_cutoff is not None:
        from .spectral import truncate

        u, rho = truncate(u, config.mode_cutoff), truncate(rho, config.mode_cutoff)
    return SimState(0.0, u, rho, config.nu)
