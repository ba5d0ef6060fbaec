"""Simulation and statistical checks for rate-constrained wireless dipole networks."""

from dipolenet.activation import (
    ActivationResult,
    link_rate,
    max_active_exact,
    max_active_greedy,
    tblas_activate,
    tblas_good_set,
)
from dipolenet.channel import (
    ChannelRealization,
    TailLaw,
    realize_channel,
    sample_direct_gain,
    sample_interference_gain,
    tail_exponent_plateau,
    tail_law,
    tail_probability,
)
from dipolenet.errors import (
    ConfigError,
    ContractError,
    FitError,
    ParameterError,
    SizeError,
)
from dipolenet.field import DipoleField, neighborhood, pair_distance, sample_field
from dipolenet.params import NetworkParams

__version__ = "0.1.0"

__all__ = [
    "ActivationResult",
    "ChannelRealization",
    "ConfigError",
    "ContractError",
    "DipoleField",
    "FitError",
    "NetworkParams",
    "ParameterError",
    "SizeError",
    "TailLaw",
    "link_rate",
    "max_active_exact",
    "max_active_greedy",
    "neighborhood",
    "pair_distance",
    "realize_channel",
    "sample_direct_gain",
    "sample_field",
    "sample_interference_gain",
    "tail_exponent_plateau",
    "tail_law",
    "tail_probability",
    "tblas_activate",
    "tblas_good_set",
]
