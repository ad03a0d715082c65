"""Physical constants (SI, CODATA defined values)."""

HBAR = 1.054571817e-34  # J s
KB = 1.380649e-23  # J/K

# Default NV gyromagnetic response, rad/(s T).
GAMMA_E_DEFAULT = 2.0 * 3.141592653589793 * 27.0e9
