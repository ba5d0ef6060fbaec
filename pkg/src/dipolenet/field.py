"""Marked Poisson fields of transmitter-receiver dipoles on a disc window.

Receivers form a homogeneous Poisson process of intensity ``n`` on a disc
centred at the origin; each transmitter sits at ``rx + W`` with ``W``
uniform on a small disc of radius ``mark_radius``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from dipolenet.errors import ParameterError
from dipolenet.params import NetworkParams

#: Radius of the disc of unit area.
UNIT_DISC_RADIUS = 1.0 / math.sqrt(math.pi)

FIELD_CSV_HEADER = ("index", "tx_x", "tx_y", "rx_x", "rx_y")


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class Dipole:
    index: int
    tx: Point2
    rx: Point2


@dataclass(frozen=True, eq=False)
class DipoleField:
    """One realisation of the dipole process.

    Coordinates are kept as two read-only ``(N, 2)`` arrays; ``dipoles``
    gives the same data as :class:`Dipole` records in generation order.
    """

    tx: np.ndarray
    rx: np.ndarray
    intensity: float
    region_radius: float
    seed: int = 0

    def __post_init__(self):
        tx = np.array(self.tx, dtype=float).reshape(-1, 2)
        rx = np.array(self.rx, dtype=float).reshape(-1, 2)
        if tx.shape != rx.shape:
            raise ParameterError(f"tx and rx must have equal length, got {len(tx)} and {len(rx)}")
        if not (np.all(np.isfinite(tx)) and np.all(np.isfinite(rx))):
            raise ParameterError("dipole coordinates must be finite")
        if self.intensity <= 0:
            raise ParameterError(f"intensity must be positive, got {self.intensity}")
        if self.region_radius <= 0:
            raise ParameterError(f"region_radius must be positive, got {self.region_radius}")
        tx.flags.writeable = False
        rx.flags.writeable = False
        object.__setattr__(self, "tx", tx)
        object.__setattr__(self, "rx", rx)

    @classmethod
    def from_points(cls, tx, rx, intensity=1.0, region_radius=None, seed=0) -> "DipoleField":
        """Build a field from explicit coordinates (hand-made test geometries)."""
        tx = np.asarray(tx, dtype=float).reshape(-1, 2)
        rx = np.asarray(rx, dtype=float).reshape(-1, 2)
        if region_radius is None:
            extent = max(np.max(np.hypot(*tx.T), initial=0.0), np.max(np.hypot(*rx.T), initial=0.0))
            region_radius = max(extent, UNIT_DISC_RADIUS)
        return cls(tx=tx, rx=rx, intensity=float(intensity),
                   region_radius=float(region_radius), seed=int(seed))

    def __len__(self):
        return len(self.rx)

    @property
    def dipoles(self) -> tuple[Dipole, ...]:
        return tuple(self.dipole(i) for i in range(len(self)))

    def dipole(self, i: int) -> Dipole:
        self._check_index(i)
        return Dipole(i, Point2(*self.tx[i]), Point2(*self.rx[i]))

    @property
    def window_area(self) -> float:
        return math.pi * self.region_radius ** 2

    @cached_property
    def tx_tree(self) -> cKDTree:
        return cKDTree(self.tx)

    def _check_index(self, i):
        if not isinstance(i, (int, np.integer)) or not 0 <= i < len(self):
            raise IndexError(f"dipole index {i!r} out of range for field of size {len(self)}")

    def interior(self, margin: float) -> np.ndarray:
        """Indices of receivers at least ``margin`` away from the window boundary."""
        return np.flatnonzero(np.hypot(*self.rx.T) <= self.region_radius - margin)


def _uniform_disc(rng: np.random.Generator, count: int, radius: float) -> np.ndarray:
    r = radius * np.sqrt(rng.random(count))
    theta = 2.0 * np.pi * rng.random(count)
    return np.column_stack((r * np.cos(theta), r * np.sin(theta)))


def sample_field(params: NetworkParams, seed: int) -> DipoleField:
    """Draw one dipole field.

    The dipole count is Poisson(n * window_area) (or exactly the rounded
    mean when ``params.fixed_count`` is set), receivers are i.i.d. uniform
    on the window and each transmitter is displaced from its receiver by a
    vector uniform on the disc of radius ``params.mark_radius``.
    """
    rng = np.random.default_rng(seed)
    radius = params.window_radius
    mean = params.n * params.window_area
    count = int(round(mean)) if params.fixed_count else int(rng.poisson(mean))
    rx = _uniform_disc(rng, count, radius)
    tx = rx + _uniform_disc(rng, count, params.mark_radius)
    return DipoleField(tx=tx, rx=rx, intensity=params.n, region_radius=radius, seed=int(seed))


def neighborhood(field: DipoleField, j: int) -> set[int]:
    """Transmitters ``i != j`` within the unit-area disc around receiver ``j``."""
    field._check_index(j)
    hits = field.tx_tree.query_ball_point(field.rx[j], UNIT_DISC_RADIUS)
    return {int(i) for i in hits if i != j}


def pair_distance(field: DipoleField, i: int, j: int) -> float:
    """Distance from transmitter ``i`` to receiver ``j``."""
    field._check_index(i)
    field._check_index(j)
    return float(math.hypot(*(field.tx[i] - field.rx[j])))


def write_field_csv(field: DipoleField, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(FIELD_CSV_HEADER)
        for i in range(len(field)):
            writer.writerow([i, *map(repr, map(float, field.tx[i])), *map(repr, map(float, field.rx[i]))])
    return path


def read_field_csv(path, intensity=1.0, region_radius=None) -> DipoleField:
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != FIELD_CSV_HEADER:
            raise ParameterError(f"unexpected field CSV header {reader.fieldnames}")
        rows = sorted(reader, key=lambda r: int(r["index"]))
    tx = [(float(r["tx_x"]), float(r["tx_y"])) for r in rows]
    rx = [(float(r["rx_x"]), float(r["rx_y"])) for r in rows]
    return DipoleField.from_points(tx, rx, intensity=intensity, region_radius=region_radius)
