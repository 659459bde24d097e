"""Physical constants and atomic reference data.

Constants are CODATA 2018 values. Atomic energy levels are from the NIST
Atomic Spectra Database (Yb I), in cm^-1 relative to the 6s2 1S0 ground
state.
"""

# CODATA 2018
HBAR = 1.054571817e-34  # J s
ELEMENTARY_CHARGE = 1.602176634e-19  # C
ATOMIC_MASS_UNIT = 1.66053906660e-27  # kg
SPEED_OF_LIGHT = 299792458.0  # m/s

YB171_MASS = 170.936 * ATOMIC_MASS_UNIT  # kg

# NIST ASD, Yb I level energies (cm^-1)
YB_LEVELS_CM = {
    "6s6p 3P0": 17288.439,
    "6s6p 3P1": 17992.007,
    "6s6p 3P2": 19710.388,
    "6s7s 3S1": 32694.692,
}

# Imaging transitions used for erasure detection
YB_1S0_1P1_WAVELENGTH = 399e-9  # m
YB_1S0_1P1_LINEWIDTH = 2 * 3.141592653589793 * 28e6  # rad/s
YBII_6S_6P12_WAVELENGTH = 369e-9  # m
YBII_6S_6P12_LINEWIDTH = 2 * 3.141592653589793 * 19e6  # rad/s


def cm_to_angular_frequency(energy_cm: float) -> float:
    """Convert a level energy in cm^-1 to an angular frequency in rad/s."""
    return 2 * 3.141592653589793 * SPEED_OF_LIGHT * energy_cm * 100.0
