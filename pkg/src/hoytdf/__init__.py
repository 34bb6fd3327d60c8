"""Symbol error rate of decode-and-forward relay networks over Hoyt fading."""

from .analytic import (
    NetworkScenario,
    QamScheme,
    RelayState,
    SerBreakdown,
    qam_scheme,
    symbol_conditioned_ser,
    total_ser,
)
from .channel import HoytLink
from .errors import ConfigError, DomainError, HoytDFError, NumericError, ResourceError
from .mcsim import SerEstimate, estimate_ser

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "HoytDFError",
    "HoytLink",
    "NetworkScenario",
    "NumericError",
    "QamScheme",
    "RelayState",
    "ResourceError",
    "SerBreakdown",
    "SerEstimate",
    "estimate_ser",
    "qam_scheme",
    "symbol_conditioned_ser",
    "total_ser",
]
