"""Channel gains: exponential direct gains and heavy-tailed interference gains.

All gains are power gains. The interference gain of transmitter ``j`` at
receiver ``i`` is ``g * D**-alpha`` for ``D = |t_j - r_i| <= 1`` and zero
beyond unit distance, with ``g ~ Exp(1)``. Conditioned on the transmitter
being uniform in the unit-radius disc around the receiver, the survival
function is ``2 * int_0^1 u exp(-z u**alpha) du``, which decays like
``z**(-2/alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.special import gamma as gamma_fn
from scipy.special import gammainc

from dipolenet.errors import ParameterError
from dipolenet.field import DipoleField
from dipolenet.params import NetworkParams

MODES = ("pathloss", "no_pathloss")

# splitmix64 constants
_INC = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _check_alpha(alpha):
    if not alpha >= 2:
        raise ParameterError(f"path-loss exponent alpha must be >= 2, got {alpha}")


def interference_gain(g, distance, alpha):
    """``g * distance**-alpha``, zeroed where ``distance > 1``."""
    g = np.asarray(g, dtype=float)
    distance = np.asarray(distance, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(distance <= 1.0, g * distance ** -float(alpha), 0.0)
    return out[()] if out.ndim == 0 else out


def sample_direct_gain(rng: np.random.Generator, size=None):
    """Exp(1) direct (Rayleigh power) gain."""
    return rng.exponential(1.0, size=size)


def sample_interference_gain(alpha: float, rng: np.random.Generator, size=None):
    """Interference gain of a transmitter uniform in the unit disc around the receiver.

    The distance has density ``2u`` on [0, 1] and is drawn as ``sqrt(U)``.
    """
    _check_alpha(alpha)
    g = rng.exponential(1.0, size=size)
    d = np.sqrt(rng.random(size=size))
    return interference_gain(g, d, alpha)


def tail_probability(z, alpha):
    """P(h > z) for the unit-disc interference gain.

    Evaluates ``2 * int_0^1 u exp(-z u**alpha) du`` through the regularised
    lower incomplete gamma function:
    ``(2/alpha) * Gamma(2/alpha) * P(2/alpha, z) * z**(-2/alpha)``.
    Accepts scalars or arrays.
    """
    _check_alpha(alpha)
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(np.isnan(z)):
        raise ParameterError("tail_probability needs z >= 0")
    a = 2.0 / alpha
    out = np.ones_like(z)
    # z**-a overflows near the subnormal range; there the two-term series is exact to rounding
    small = z < 1e-6
    zs = z[small]
    out[small] = 1.0 - 2.0 * zs / (alpha + 2.0) + zs * zs / (alpha + 4.0)
    big = ~small
    zb = z[big]
    out[big] = a * gamma_fn(a) * gammainc(a, zb) * zb ** -a
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def interference_cdf(z, alpha):
    return 1.0 - tail_probability(np.maximum(z, 0.0), alpha)


def tail_exponent_plateau(alpha: float, z_grid) -> list[float]:
    """``z**(2/alpha) * P(h > z)`` on each grid point.

    Nondecreasing in ``z`` with limit ``(2/alpha) * Gamma(2/alpha)``.
    """
    z = np.asarray(list(z_grid), dtype=float)
    if z.size == 0:
        raise ParameterError("z_grid must not be empty")
    if np.any(z <= 0):
        raise ParameterError("plateau grid points must be positive")
    return list(z ** (2.0 / alpha) * tail_probability(z, alpha))


@dataclass(frozen=True)
class TailLaw:
    """Power-law sandwich ``c2 z**-beta <= P(h > z) <= c1 z**-beta`` for ``z >= b``."""

    alpha: float
    beta: float
    c1: float
    c2: float
    b: float

    def __post_init__(self):
        if not math.isclose(self.beta, 2.0 / self.alpha, rel_tol=0, abs_tol=1e-15):
            raise ParameterError("beta must equal 2/alpha")
        if not self.c1 >= self.c2 > 0:
            raise ParameterError(f"need c1 >= c2 > 0, got c1={self.c1}, c2={self.c2}")
        if self.b <= 0:
            raise ParameterError("lower cutoff b must be positive")

    def bounds(self, z):
        z = np.asarray(z, dtype=float)
        return self.c2 * z ** -self.beta, self.c1 * z ** -self.beta


def tail_law(alpha: float, b: float = 1.0) -> TailLaw:
    """Tightest sandwich constants: the plateau limit above, its value at ``b`` below."""
    _check_alpha(alpha)
    beta = 2.0 / alpha
    c1 = beta * math.gamma(beta)
    c2 = tail_exponent_plateau(alpha, [b])[0]
    return TailLaw(alpha=alpha, beta=beta, c1=c1, c2=c2, b=b)


def _splitmix64(x: np.ndarray) -> np.ndarray:
    z = x + _INC
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def pair_fading(seed: int, receivers, transmitters) -> np.ndarray:
    """Exp(1) fading for each (receiver, transmitter) pair, keyed by the pair.

    Counter-based: the value for a pair depends only on ``seed`` and the two
    indices, so any subset of pairs can be evaluated lazily and consistently.
    Inputs broadcast against each other.
    """
    r = np.asarray(receivers, dtype=np.uint64)
    t = np.asarray(transmitters, dtype=np.uint64)
    with np.errstate(over="ignore"):
        key = _splitmix64(np.asarray([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64))[0]
        h = _splitmix64(_splitmix64(key ^ r) ^ t)
    u = ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0 ** -53
    return -np.log(u)


class ChannelRealization:
    """Direct gains plus interference gains for one field realisation.

    ``cross[(i, j)]`` is the gain of transmitter ``j`` at receiver ``i``.
    Either built from an explicit mapping (small hand-made instances) or
    backed by a field, in which case interference gains are generated on
    demand from the pair-keyed fading stream.
    """

    def __init__(self, direct, alpha: float, cross: Mapping | None = None, *,
                 field: DipoleField | None = None, seed: int = 0, mode: str = "pathloss"):
        _check_alpha(alpha)
        if mode not in MODES:
            raise ParameterError(f"unknown channel mode {mode!r}")
        direct = np.array(direct, dtype=float).reshape(-1)
        if np.any(direct < 0) or not np.all(np.isfinite(direct)):
            raise ParameterError("direct gains must be finite and nonnegative")
        direct.flags.writeable = False
        self.direct = direct
        self.alpha = float(alpha)
        self.mode = mode
        self.seed = int(seed)
        self.field = field
        self._dense = None
        self._explicit = None
        if field is None:
            n = len(direct)
            dense = np.zeros((n, n))
            explicit = {}
            for (i, j), g in (cross or {}).items():
                if i == j or not (0 <= i < n and 0 <= j < n):
                    raise ParameterError(f"invalid cross-gain key {(i, j)}")
                if g < 0:
                    raise ParameterError("cross gains must be nonnegative")
                dense[i, j] = g
                explicit[(int(i), int(j))] = float(g)
            dense.flags.writeable = False
            self._dense = dense
            self._explicit = explicit
        elif len(field) != len(direct):
            raise ParameterError("field size and number of direct gains differ")

    def __len__(self):
        return len(self.direct)

    def gain_block(self, receivers, transmitters) -> np.ndarray:
        """Dense ``(len(receivers), len(transmitters))`` block of interference gains.

        Entries with ``receiver == transmitter`` are zero.
        """
        r = np.asarray(receivers, dtype=np.intp).reshape(-1)
        t = np.asarray(transmitters, dtype=np.intp).reshape(-1)
        if self._dense is not None:
            return self._dense[np.ix_(r, t)]
        g = pair_fading(self.seed, r[:, None], t[None, :])
        if self.mode == "pathloss":
            delta = self.field.tx[t][None, :, :] - self.field.rx[r][:, None, :]
            g = interference_gain(g, np.hypot(delta[..., 0], delta[..., 1]), self.alpha)
        g = np.where(r[:, None] == t[None, :], 0.0, g)
        return g

    def gain_matrix(self, indices) -> np.ndarray:
        return self.gain_block(indices, indices)

    def interference(self, i: int, transmitters) -> float:
        t = [j for j in transmitters if j != i]
        if not t:
            return 0.0
        return float(self.gain_block([i], t).sum())

    @property
    def cross(self) -> dict[tuple[int, int], float]:
        """All interference entries, materialised. Meant for small fields."""
        if self._explicit is not None:
            return dict(self._explicit)
        n = len(self)
        if self.mode == "no_pathloss":
            r, t = np.nonzero(~np.eye(n, dtype=bool))
        else:
            hits = unit_range_pairs(self.field, 1.0)
            if not hits:
                return {}
            r, t = np.array(hits).T
        g = self.gain_block_pairs(r, t)
        return {(int(a), int(b)): float(v) for a, b, v in zip(r, t, g)}

    def gain_block_pairs(self, receivers, transmitters) -> np.ndarray:
        """Gains for aligned (receiver, transmitter) index arrays."""
        r = np.asarray(receivers, dtype=np.intp)
        t = np.asarray(transmitters, dtype=np.intp)
        if self._dense is not None:
            return self._dense[r, t]
        g = pair_fading(self.seed, r, t)
        if self.mode == "pathloss":
            d = np.hypot(*(self.field.tx[t] - self.field.rx[r]).T)
            g = interference_gain(g, d, self.alpha)
        return np.where(r == t, 0.0, g)


def unit_range_pairs(field: DipoleField, radius: float) -> list[tuple[int, int]]:
    """(receiver i, transmitter j) pairs with ``i != j`` and ``|t_j - r_i| <= radius``."""
    out = []
    for i, hits in enumerate(field.tx_tree.query_ball_point(field.rx, radius)):
        out.extend((i, j) for j in sorted(hits) if j != i)
    return out


def realize_channel(field: DipoleField, params: NetworkParams, seed: int,
                    mode: str = "pathloss") -> ChannelRealization:
    """Draw the channel for ``field``.

    Direct gains are i.i.d. Exp(1) and ignore geometry. In ``pathloss`` mode
    interference follows ``g * D**-alpha`` truncated at unit distance; in
    ``no_pathloss`` mode every pair interferes with plain Exp(1) fading.
    """
    rng = np.random.default_rng(seed)
    direct = sample_direct_gain(rng, size=len(field))
    return ChannelRealization(direct, params.alpha, field=field, seed=seed, mode=mode)
