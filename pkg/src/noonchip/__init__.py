"""noonchip: simulator of a two-source photonic chip generating a two-photon
path-entangled state and interfering it in a programmable Mach-Zehnder
interferometer, with lossy detection, time-tag Monte Carlo, and an HTTP/CLI
front end."""

__version__ = "0.1.0"

from .fock import (
    DensityMatrix,
    ModeUnitary,
    PureState,
    enumerate_basis,
    enumerate_sectors,
    evolve,
    lift_unitary,
    permanent,
)

__all__ = [
    "__version__",
    "DensityMatrix",
    "ModeUnitary",
    "PureState",
    "enumerate_basis",
    "enumerate_sectors",
    "evolve",
    "lift_unitary",
    "permanent",
]
