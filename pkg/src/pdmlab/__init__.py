"""Position-dependent-mass lab: symbolic and spectral checks of the
effective Hamiltonian of an inhomogeneous tight-binding chain."""

__version__ = "0.1.0"
