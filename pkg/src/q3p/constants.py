"""Unit helpers and hardware defaults.

Internally every frequency is an angular frequency in rad/s and every time is
in seconds. Distances on the atom register are in micrometers.
"""
import math

TWO_PI = 2.0 * math.pi
MHZ = TWO_PI * 1e6  # rad/s per MHz (angular)
US = 1e-6  # seconds per microsecond

#: Van der Waals coefficient for the |60S> / |70S>-class Rydberg level used by
#: common neutral-atom devices, in rad/s * um^6 (5.42e6 rad/us * um^6).
C6_DEFAULT = 5.42e12

OMEGA_MAX_DEFAULT = 2.0 * MHZ
DELTA_MAX_DEFAULT = 4.0 * MHZ
DURATION_DEFAULT = 4.0 * US

#: Nearest-neighbour trap spacing used when mapping density grids onto registers.
LATTICE_SPACING_DEFAULT = 5.0

MAX_REGISTER_SITES = 25
MAX_EMULATED_QUBITS = 20


def blockade_radius(c6: float = C6_DEFAULT, omega: float = OMEGA_MAX_DEFAULT) -> float:
    """Distance at which C6/r^6 equals the drive strength ``omega``."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    return (c6 / omega) ** (1.0 / 6.0)
