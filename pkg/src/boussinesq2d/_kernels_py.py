"""NumPy implementations of the off-grid evaluation kernels.

Used when the compiled ``_kernels`` extension is unavailable, and as the
reference the extension is benchmarked and tested against.
"""
import numpy as np

TWO_PI = 2.0 * np.pi


def lagrange_weights(f):
    """Cubic Lagrange weights for nodes -1, 0, 1, 2 at fractional offset ``f``."""
    return np.stack([
        -f * (f - 1.0) * (f - 2.0) / 6.0,
        (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0,
        -(f + 1.0) * f * (f - 2.0) / 2.0,
        (f + 1.0) * f * (f - 1.0) / 6.0,
    ])


def interp_periodic(values, points):
    """Tensor-product cubic Lagrange interpolation of periodic samples.

    ``values[i, j]`` sits at ``(2 pi i / m, 2 pi j / m)``; ``points`` is
    ``(P, 2)``. Returns ``(P,)``.
    """
    values = np.asarray(values, dtype=float)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    m = values.shape[0]
    s = np.mod(pts, TWO_PI) * (m / TWO_PI)
    base = np.floor(s).astype(np.int64)
    frac = s - base
    w1 = lagrange_weights(frac[:, 0])
    w2 = lagrange_weights(frac[:, 1])
    out = np.zeros(len(pts))
    for a in range(4):
        ia = (base[:, 0] + a - 1) % m
        row = np.zeros(len(pts))
        for b in range(4):
            ib = (base[:, 1] + b - 1) % m
            row += w2[b] * values[ia, ib]
        out += w1[a] * row
    return out


def fourier_eval(coeffs, wavenumbers, points):
    """Direct summation ``sum_k c(k) exp(i k.x)`` (real part) at ``points``."""
    c = np.asarray(coeffs, dtype=complex)
    k = np.asarray(wavenumbers, dtype=float)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    e1 = np.exp(1j * np.outer(pts[:, 0], k))
    e2 = np.exp(1j * np.outer(pts[:, 1], k))
    return np.real(np.sum((e1 @ c) * e2, axis=1))
