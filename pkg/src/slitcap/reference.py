"""Built-in validation data: reference capacities and moduli.

The slit configurations below have published high-accuracy capacities
(8 decimals, cross-checked between two independent methods); they drive the
`tables` CLI command and the golden regression suite.  The slide series is
the unit-length slit sliding along the real axis against the fixed vertical
slit [-2i, -i], with reference moduli at integer positions.
"""

from __future__ import annotations

from .geometry import SlitConfig

# (A1, A2, A3, A4, reference capacity)
CAPACITY_CASES: list[tuple[complex, complex, complex, complex, float]] = [
    (1j, 2 + 1j, -2 - 1j, -1 - 1j, 1.44058466),
    (1j, 2 + 1j, -2 - 2j, -1 - 2j, 1.30971558),
    (1j, 2 + 1j, 3 - 2j, 4 - 3j, 1.35832035),
    (1j, 2 + 2j, -2 - 1j, -1 - 1j, 1.42710109),
    (1j, 2 + 2j, -2 - 2j, -1 - 2j, 1.29776864),
    (1j, 2 + 2j, 3 - 2j, 4 - 3j, 1.32814214),
    (1j, 3 + 2j, -2 - 1j, -1 - 1j, 1.49363842),
    (1j, 3 + 2j, -2 - 2j, -1 - 2j, 1.36333122),
    (1j, 3 + 2j, 3 - 2j, 4 - 3j, 1.45844055),
    (1j, 3j, 3, 4, 1.29126199),
    (1j, 3j, 0, 2, 2.18251913),
    (1j, 3j, -3, 2, 2.82846257),
    (1j, 3 + 1j, -1j, 3 - 1j, 2.69941565),
    (1j, 3 + 2j, -1j, 3 - 2j, 2.23470313),
    (1j, 3 + 3j, -1j, 3 - 3j, 2.11547784),
]

# slide position a -> (module, capacity) for A1A2 = [a-1/2, a+1/2] on the
# real axis, A3A4 = [-2i, -i]
SLIDE_FIXED_SLIT = (-1j, -2j)
SLIDE_HALF_LENGTH = 0.5
SLIDE_MODULES: dict[int, tuple[float, float]] = {
    0: (0.56247, 1.77787),
    1: (0.62207, 1.60753),
    2: (0.72955, 1.37070),
    3: (0.82469, 1.21258),
    4: (0.90239, 1.10817),
    5: (0.96656, 1.03459),
    6: (1.02073, 0.97968),
    7: (1.06743, 0.93682),
}

# initial data of the slide series at the mirror-symmetric position a = 1.5
SLIDE_SYMMETRIC_MODULE = 0.67578477
SLIDE_SYMMETRIC_ABSCISSA = 0.22367571
SLIDE_SYMMETRIC_LOG_RESIDUE = complex(-1.11526111, 3.14159265)


def capacity_config(row: int) -> SlitConfig:
    """1-based row accessor for the capacity table."""
    a1, a2, a3, a4, _ = CAPACITY_CASES[row - 1]
    return SlitConfig(a1, a2, a3, a4)


def slide_config(a: float) -> SlitConfig:
    a1 = a - SLIDE_HALF_LENGTH
    a2 = a + SLIDE_HALF_LENGTH
    return SlitConfig(complex(a1), complex(a2), *SLIDE_FIXED_SLIT)
