"""Link rates, threshold activation (TBLAS) and max-active-links solvers.

A set of simultaneously active links is feasible when every member reaches
``r_min`` with interference from the other members only. Interference
gains are already zero beyond unit distance, so the unit-disc truncation
of the interference sum is carried by the channel itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Iterable, NamedTuple

import numpy as np

from dipolenet.channel import ChannelRealization
from dipolenet.errors import ContractError, ParameterError, SizeError
from dipolenet.params import NetworkParams

EXACT_CAP = 20
SOLVERS = ("tblas", "exact", "greedy")


@dataclass(frozen=True)
class ActivationResult:
    good_set: frozenset
    active_set: frozenset
    rates: dict = dc_field(default_factory=dict)
    h0: float = math.nan
    p0: float = math.nan
    solver: str = "tblas"

    @property
    def m_n(self) -> int:
        return len(self.good_set)

    @property
    def eta_n(self) -> int:
        return len(self.active_set)

    @property
    def min_active_rate(self):
        if not self.active_set:
            return None
        return min(self.rates[i] for i in self.active_set)

    def to_dict(self) -> dict:
        return {
            "h0": self.h0,
            "p0": self.p0,
            "m_n": self.m_n,
            "eta_n": self.eta_n,
            "active_indices": sorted(int(i) for i in self.active_set),
            "min_active_rate": self.min_active_rate,
        }


class GoodSet(NamedTuple):
    indices: frozenset
    h0: float
    p0: float


def _rates(members: np.ndarray, gains: np.ndarray, ch: ChannelRealization,
           params: NetworkParams) -> np.ndarray:
    """Rates of ``members`` given their mutual gain matrix."""
    interference = gains.sum(axis=1)
    signal = params.power * ch.direct[members]
    sinr = signal / (params.noise_var + params.power * interference)
    return params.bandwidth * np.log1p(sinr)


def link_rate(i: int, active: Iterable[int], ch: ChannelRealization,
              params: NetworkParams) -> float:
    """``B ln(1 + P h_ii / (sigma^2 + sum_j P h_ji))`` over active interferers ``j != i``."""
    active = set(int(a) for a in active)
    if i not in active:
        raise ContractError(f"link {i} is not in the active set")
    interference = ch.interference(i, sorted(active))
    sinr = params.power * ch.direct[i] / (params.noise_var + params.power * interference)
    return float(params.bandwidth * math.log1p(sinr))


def link_rates(active: Iterable[int], ch: ChannelRealization,
               params: NetworkParams) -> dict[int, float]:
    members = np.array(sorted(set(int(a) for a in active)), dtype=np.intp)
    if members.size == 0:
        return {}
    rates = _rates(members, ch.gain_matrix(members), ch, params)
    return dict(zip(members.tolist(), rates.tolist()))


def is_feasible(active: Iterable[int], ch: ChannelRealization, params: NetworkParams) -> bool:
    return all(r >= params.r_min for r in link_rates(active, ch, params).values())


def tblas_good_set(ch: ChannelRealization, params: NetworkParams, h0: float | None = None) -> GoodSet:
    """Links whose direct gain strictly exceeds ``h0 = gamma ln n``.

    Also returns ``p0 = exp(-h0)``, which equals ``n**-gamma`` for the
    default threshold. ``h0`` may be overridden for experiments.
    """
    if h0 is None:
        if params.n <= 1:
            raise ParameterError(f"TBLAS threshold needs n > 1, got n={params.n}")
        h0 = params.h0
    good = frozenset(np.flatnonzero(ch.direct > h0).tolist())
    return GoodSet(good, float(h0), math.exp(-h0))


def tblas_activate(ch: ChannelRealization, params: NetworkParams, h0: float | None = None) -> ActivationResult:
    """Switch on every good link, then keep those meeting ``r_min`` under that activation.

    ``rates`` covers all activated links; ``active_set`` is the feasible part.
    """
    good = tblas_good_set(ch, params, h0)
    rates = link_rates(good.indices, ch, params)
    ok = frozenset(i for i, r in rates.items() if r >= params.r_min)
    return ActivationResult(good.indices, ok, rates, good.h0, good.p0, "tblas")


def _info_good_set(ch, params):
    if params.n > 1:
        return tblas_good_set(ch, params)
    return GoodSet(frozenset(), math.nan, math.nan)


def max_active_exact(ch: ChannelRealization, params: NetworkParams, cap: int = EXACT_CAP) -> ActivationResult:
    """Largest feasible active set by exhaustive search.

    Depth-first search in lexicographic order of index sets, cutting every
    branch whose prefix is infeasible (feasibility is downward closed) or
    cannot beat the incumbent. The first maximum found is therefore the
    lexicographically smallest one.
    """
    n = len(ch)
    if n > cap:
        raise SizeError(f"{n} dipoles exceed the exhaustive-search cap of {cap}; "
                        "use max_active_greedy for larger instances")
    gains = ch.gain_matrix(np.arange(n))
    signal = params.power * ch.direct
    noise = params.noise_var
    need = params.r_min

    def ok(members, interference):
        sinr = signal[members] / (noise + params.power * interference)
        return bool(np.all(params.bandwidth * np.log1p(sinr) >= need))

    best: list[int] = []

    def search(start, members, interference):
        nonlocal best
        if len(members) > len(best):
            best = list(members)
        for c in range(start, n):
            if len(members) + (n - c) <= len(best):
                return
            new_members = members + [c]
            new_interference = np.append(interference + gains[members, c],
                                         gains[c, members].sum())
            if ok(new_members, new_interference):
                search(c + 1, new_members, new_interference)

    search(0, [], np.zeros(0))
    good = _info_good_set(ch, params)
    return ActivationResult(good.indices, frozenset(best), link_rates(best, ch, params),
                            good.h0, good.p0, "exact")


def max_active_greedy(ch: ChannelRealization, params: NetworkParams) -> ActivationResult:
    """Greedy max-active-links baseline.

    Candidates are scanned by decreasing direct gain; a candidate is kept
    when the enlarged set stays feasible. Scanning stops at the first
    candidate that could not meet ``r_min`` even without interference.
    """
    order = np.argsort(-ch.direct, kind="stable")
    members: list[int] = []
    interference = np.zeros(0)
    for c in order.tolist():
        # noise-only rate is monotone in the direct gain, so nothing later can succeed
        if params.bandwidth * math.log1p(params.power * ch.direct[c] / params.noise_var) < params.r_min:
            break
        if members:
            inbound = ch.gain_block([c], members)[0]
            outbound = ch.gain_block(members, [c])[:, 0]
            trial = np.append(interference + outbound, inbound.sum())
        else:
            trial = np.zeros(1)
        idx = np.array(members + [c], dtype=np.intp)
        sinr = params.power * ch.direct[idx] / (params.noise_var + params.power * trial)
        if np.all(params.bandwidth * np.log1p(sinr) >= params.r_min):
            members.append(c)
            interference = trial
    good = _info_good_set(ch, params)
    return ActivationResult(good.indices, frozenset(members), link_rates(members, ch, params),
                            good.h0, good.p0, "greedy")


def activate(ch: ChannelRealization, params: NetworkParams, solver: str = "tblas") -> ActivationResult:
    if solver == "tblas":
        return tblas_activate(ch, params)
    if solver == "exact":
        return max_active_exact(ch, params)
    if solver == "greedy":
        return max_active_greedy(ch, params)
    raise ParameterError(f"unknown solver {solver!r}; expected one of {SOLVERS}")
