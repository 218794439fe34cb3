"""Resource allocation algorithms and Monte-Carlo experiments for
full-duplex wireless networks."""

from fdnet._accel import USE_NUMBA
from fdnet.errors import AlgorithmError, CapacityError, ConfigError, DomainError, FdnetError

__version__ = "0.1.0"

__all__ = [
    "USE_NUMBA",
    "AlgorithmError",
    "CapacityError",
    "ConfigError",
    "DomainError",
    "FdnetError",
]
