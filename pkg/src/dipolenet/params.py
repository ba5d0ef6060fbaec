"""Physical and asymptotic parameters shared by every stage of the pipeline."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

from dipolenet.errors import ParameterError

# Simulation-section defaults: 15 dBm WiFi transmitter, 22 MHz channel.
DEFAULT_POWER_W = 0.032
DEFAULT_BANDWIDTH_HZ = 22e6
DEFAULT_NOISE_VAR = 0.01
DEFAULT_ALPHA = 3.0
DEFAULT_R_MIN = 1e5
DEFAULT_GAMMA = 0.45
DEFAULT_WINDOW_AREA = 4.0
DEFAULT_MARK_RADIUS = 0.01


@dataclass(frozen=True)
class NetworkParams:
    """Parameters of one network model.

    Rates are ``bandwidth * ln(1 + SINR)``, so ``r_min`` carries the same
    units as ``bandwidth`` (nats/s when bandwidth is in Hz).
    """

    n: float = 100.0
    alpha: float = DEFAULT_ALPHA
    power: float = DEFAULT_POWER_W
    noise_var: float = DEFAULT_NOISE_VAR
    bandwidth: float = DEFAULT_BANDWIDTH_HZ
    r_min: float = DEFAULT_R_MIN
    gamma_exp: float = DEFAULT_GAMMA
    window_area: float = DEFAULT_WINDOW_AREA
    mark_radius: float = DEFAULT_MARK_RADIUS
    fixed_count: bool = False

    def __post_init__(self):
        for name in ("n", "alpha", "power", "noise_var", "bandwidth", "r_min",
                     "gamma_exp", "window_area", "mark_radius"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
        if self.n <= 0:
            raise ParameterError(f"intensity n must be positive, got {self.n}")
        if self.alpha < 2:
            raise ParameterError(f"alpha must be >= 2, got {self.alpha}")
        if not 0 < self.gamma_exp < 0.5:
            raise ParameterError(f"gamma_exp must lie in (0, 1/2), got {self.gamma_exp}")
        for name in ("power", "noise_var", "bandwidth", "r_min"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)}")
        if self.window_area < 1:
            raise ParameterError(f"window_area must be >= 1 unit area, got {self.window_area}")
        if self.mark_radius < 0:
            raise ParameterError(f"mark_radius must be >= 0, got {self.mark_radius}")

    @property
    def window_radius(self) -> float:
        return math.sqrt(self.window_area / math.pi)

    @property
    def h0(self) -> float:
        """TBLAS threshold ``gamma * ln n``."""
        if self.n <= 1:
            raise ParameterError(f"threshold needs n > 1 so that ln n > 0, got n={self.n}")
        return self.gamma_exp * math.log(self.n)

    @property
    def sinr_threshold(self) -> float:
        """Smallest SINR whose rate reaches ``r_min``."""
        return math.expm1(self.r_min / self.bandwidth)

    def with_n(self, n: float) -> "NetworkParams":
        return replace(self, n=float(n))

    def to_dict(self) -> dict:
        return asdict(self)
