"""SVG scatter of active-link counts against ``n``, with the fitted curve."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib as mpl  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from dipolenet.errors import ParameterError  # noqa: E402
from dipolenet.harness.fit import ScalingFit, mean_counts  # noqa: E402

# Fixed salt and no timestamp: identical inputs give identical bytes.
SVG_RC = {
    "svg.hashsalt": "dipolenet",
    "svg.fonttype": "path",
    "font.family": "DejaVu Sans",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "path.simplify": False,
}


def emit_plot(records, fit: ScalingFit | None, path, title: str | None = None) -> Path:
    """Write per-replication ``eta_n`` against ``n`` as SVG.

    Replications are drawn as small dots, per-``n`` means as larger markers,
    and ``fit`` (if any, and if more than one ``n`` is present) as a line.
    """
    records = list(records)
    if not records:
        raise ParameterError("emit_plot needs at least one record")
    path = Path(path)
    n = np.array([r.n for r in records], dtype=float)
    eta = np.array([r.eta_n for r in records], dtype=float)
    ns, means = mean_counts(records)

    with mpl.rc_context(SVG_RC):
        fig = Figure(figsize=(6.4, 4.2))
        ax = fig.add_subplot(1, 1, 1)
        ax.scatter(n, eta, s=6, alpha=0.35, color="tab:blue", linewidths=0, label="replications")
        ax.scatter(ns, means, s=28, color="tab:blue", edgecolors="black", linewidths=0.6,
                   label="mean", zorder=3)
        if fit is not None and len(ns) > 1:
            grid = np.linspace(ns.min(), ns.max(), 200)
            if fit.fixed_exponent is None:
                label = f"{fit.c1:.2f} + {fit.amplitude:.3g} n^{fit.exponent:.3f}"
            else:
                label = f"{fit.c1:.2f} + {fit.amplitude:.3g} n^{fit.exponent:g} (fixed)"
            (line,) = ax.plot(grid, fit.predict(grid), color="tab:red", linewidth=1.5, label=label)
            line.set_gid("fit-curve")
        ax.set_xlabel("intensity n (pairs per unit area)")
        ax.set_ylabel("active links meeting R_min")
        solvers = sorted({r.solver for r in records})
        modes = sorted({r.mode for r in records})
        ax.set_title(title or f"active links vs n ({', '.join(solvers)}; {', '.join(modes)})")
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path
