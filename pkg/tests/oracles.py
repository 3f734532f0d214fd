"""Brute-force oracles: truncated lattice sums/products of the classical
definitions.  Deliberately independent of the package's theta-series path;
slow but simple enough to trust."""

from __future__ import annotations

import numpy as np


def lattice_points(omega2: complex, n_re: int, n_im: int,
                   radius: float | None = None) -> np.ndarray:
    m, n = np.mgrid[-n_re:n_re + 1, -n_im:n_im + 1]
    w = (m + n * omega2)[(m != 0) | (n != 0)]
    if radius is not None:
        w = w[np.abs(w) <= radius]
    return w


def zeta_sum(z: complex, omega2: complex, n: int = 200) -> complex:
    """Eq.-style zeta: 1/z + sum' [1/(z-w) + 1/w + z/w^2], square truncation."""
    w = lattice_points(omega2, n, n)
    return 1.0 / z + np.sum(1.0 / (z - w) + 1.0 / w + z / w ** 2)


def wp_sum(z, omega2: complex, n_re: int = 300, n_im: int | None = None) -> complex:
    """P-function: 1/z^2 + sum' [1/(z-w)^2 - 1/w^2]."""
    if n_im is None:
        n_im = n_re
    w = lattice_points(omega2, n_re, n_im)
    z = np.asarray(z, dtype=complex)[..., None]
    return np.squeeze(1.0 / z ** 2 + np.sum(1.0 / (z - w) ** 2 - 1.0 / w ** 2, axis=-1))


def sigma_product(z: complex, omega2: complex, n: int = 60) -> complex:
    """sigma: z prod' (1 - z/w) exp(z/w + z^2/(2 w^2))."""
    w = lattice_points(omega2, n, n)
    return z * np.prod((1.0 - z / w) * np.exp(z / w + z * z / (2.0 * w ** 2)))


def invariant_sums(omega2: complex, radius: float = 1200.0) -> tuple[complex, complex]:
    """g2 = 60 sum' w^-4 and g3 = 140 sum' w^-6 over a circular truncation
    (the disc makes the leading tail cancel by angular symmetry)."""
    n_re = int(np.ceil(radius)) + 1
    n_im = int(np.ceil(radius / abs(omega2))) + 1
    w = lattice_points(omega2, n_re, n_im, radius=radius)
    return 60.0 * np.sum(w ** -4.0), 140.0 * np.sum(w ** -6.0)
