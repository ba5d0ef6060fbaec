"""Monte Carlo sweeps over the intensity ``n``.

Every (n, replication) cell gets its own 64-bit seed derived from the
master seed, so results do not depend on worker count or completion order.
"""

from __future__ import annotations

import csv
import logging
import struct
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from dipolenet.activation import SOLVERS, activate
from dipolenet.channel import MODES, realize_channel
from dipolenet.errors import ParameterError
from dipolenet.field import sample_field
from dipolenet.params import NetworkParams

log = logging.getLogger(__name__)

CSV_HEADER = ("n", "replication", "seed", "m_n", "eta_n", "solver", "mode", "wall_time_ms")


@dataclass(frozen=True, order=True)
class ExperimentRecord:
    n: float
    replication: int
    seed: int
    m_n: int
    eta_n: int
    solver: str
    mode: str
    wall_time_ms: int = 0

    def csv_row(self) -> str:
        return ",".join([format_n(self.n), str(self.replication), str(self.seed), str(self.m_n),
                         str(self.eta_n), self.solver, self.mode, str(self.wall_time_ms)])


def format_n(n: float) -> str:
    n = float(n)
    return str(int(n)) if n.is_integer() else repr(n)


def replication_seed(master_seed: int, n: float, replication: int) -> int:
    """64-bit seed for one sweep cell, derived from (master seed, n, replication)."""
    n_bits = struct.unpack("<Q", struct.pack("<d", float(n)))[0]
    seq = np.random.SeedSequence([int(master_seed), n_bits, int(replication)])
    return int(seq.generate_state(1, np.uint64)[0])


def run_replication(params: NetworkParams, n: float, replication: int, seed: int,
                    solver: str = "tblas", mode: str = "pathloss",
                    record_timing: bool = False) -> ExperimentRecord:
    """Field, channel and activation for one sweep cell."""
    start = time.perf_counter()
    p = params.with_n(n)
    field_seed, channel_seed = np.random.SeedSequence(seed).generate_state(2, np.uint64)
    field = sample_field(p, int(field_seed))
    channel = realize_channel(field, p, int(channel_seed), mode=mode)
    result = activate(channel, p, solver)
    elapsed = int(round((time.perf_counter() - start) * 1000)) if record_timing else 0
    return ExperimentRecord(float(n), int(replication), int(seed), result.m_n, result.eta_n,
                            solver, mode, elapsed)


def _job(args):
    return run_replication(*args)


def run_sweep(params: NetworkParams, n_grid: Sequence[float], reps: int, solver: str = "tblas",
              mode: str = "pathloss", master_seed: int = 1, workers: int = 1,
              sink: Callable[[ExperimentRecord], None] | None = None,
              record_timing: bool = False) -> list[ExperimentRecord]:
    """Run ``reps`` replications at every ``n`` in ``n_grid``.

    ``sink`` sees each record as soon as it is finished (in completion
    order); the returned list is sorted by ``(n, replication)``.
    """
    grid = [float(n) for n in n_grid]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ParameterError("n_grid must be nonempty and strictly ascending")
    if reps < 1:
        raise ParameterError("reps must be >= 1")
    if solver not in SOLVERS:
        raise ParameterError(f"unknown solver {solver!r}")
    if mode not in MODES:
        raise ParameterError(f"unknown mode {mode!r}")
    jobs = [(params, n, r, replication_seed(master_seed, n, r), solver, mode, record_timing)
            for n in grid for r in range(reps)]
    records = []
    if workers <= 1:
        for job in jobs:
            rec = _job(job)
            records.append(rec)
            if sink:
                sink(rec)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_job, job) for job in jobs]
            for fut in as_completed(futures):
                rec = fut.result()
                records.append(rec)
                if sink:
                    sink(rec)
    records.sort(key=lambda r: (r.n, r.replication))
    log.info("sweep finished: %d records", len(records))
    return records


def write_records_csv(records: Iterable[ExperimentRecord], path) -> Path:
    path = Path(path)
    lines = [",".join(CSV_HEADER)] + [r.csv_row() for r in records]
    with path.open("w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


class PartialWriter:
    """Append-as-you-go sink; the file keeps whatever finished before a failure."""

    def __init__(self, path):
        self.path = Path(path)
        self._fh = self.path.open("w", newline="")
        self._fh.write(",".join(CSV_HEADER) + "\n")

    def __call__(self, record: ExperimentRecord):
        self._fh.write(record.csv_row() + "\n")
        self._fh.flush()

    def close(self):
        self._fh.close()


def read_records_csv(path) -> list[ExperimentRecord]:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != CSV_HEADER:
            raise ParameterError(f"{path}: unexpected header {header}")
        out = []
        for row in reader:
            n, rep, seed, m_n, eta_n, solver, mode, wall = row
            out.append(ExperimentRecord(float(n), int(rep), int(seed), int(m_n), int(eta_n),
                                        solver, mode, int(wall)))
    return out
