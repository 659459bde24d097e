"""Circuit-level XZZX surface-code simulations with erasure conversion.

Subpackages cover the stabilizer lattice and measurement schedule
(``xzzx``), Pauli-frame fault sampling (``frames``, ``noise``), decoding
graph construction (``graph``), a weighted union-find decoder with
erasure support (``ufdecode``, ``_kernels``), Monte Carlo experiments
and threshold fits (``sampler``, ``montecarlo``), and the Rydberg-gate
error model with its master-equation oracle (``gatephysics``,
``lindblad``, ``wigner``, ``constants``).
"""

__version__ = "0.1.0"
