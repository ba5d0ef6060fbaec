"""Experiment driver: sweeps, scaling fits, plots and configuration."""

from dipolenet.harness.config import SweepSettings, load_config, parse_config
from dipolenet.harness.fit import ScalingFit, fit_curve, fit_scaling, mean_counts
from dipolenet.harness.plot import emit_plot
from dipolenet.harness.sweep import (
    CSV_HEADER,
    ExperimentRecord,
    read_records_csv,
    replication_seed,
    run_replication,
    run_sweep,
    write_records_csv,
)

__all__ = [
    "CSV_HEADER",
    "ExperimentRecord",
    "ScalingFit",
    "SweepSettings",
    "emit_plot",
    "fit_curve",
    "fit_scaling",
    "load_config",
    "mean_counts",
    "parse_config",
    "read_records_csv",
    "replication_seed",
    "run_replication",
    "run_sweep",
    "write_records_csv",
]
