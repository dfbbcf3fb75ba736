"""Log-scale convergence charts rendered to self-contained SVG."""
import logging
from collections import defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import matplotlib

matplotlib.use("agg")

import numpy as np
import pandas as pd
from matplotlib import rc_context
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from sdcabench.core.errors import PlotError
from sdcabench.crud.trace import parse_trace_filename, read_trace_csv
from sdcabench.models.trace import Trace

logger = logging.getLogger(__name__)

Source = Union[str, Path, Trace]

SVG_RC = {
    "svg.fonttype": "none",
    "svg.hashsalt": "sdcabench",
    "path.simplify": False,
}


def _load(source: Source) -> Tuple[str, pd.DataFrame]:
    if isinstance(source, Trace):
        return source.solver, source.to_frame()
    solver, _ = parse_trace_filename(source)
    return solver, read_trace_csv(source)


def seed_means(sources: Iterable[Source], column: str = "gap") -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    """Per solver: the shared epoch grid and the seed-mean of ``column``."""
    grouped: Dict[str, List[pd.DataFrame]] = defaultdict(list)
    for source in sources:
        solver, frame = _load(source)
        grouped[solver].append(frame)
    if not grouped:
        raise PlotError("nothing to plot")

    curves = {}
    for solver, frames in grouped.items():
        epochs = frames[0]["epoch"].to_numpy()
        for frame in frames[1:]:
            if not np.array_equal(frame["epoch"].to_numpy(), epochs):
                raise PlotError(f"{solver}: traces do not share an epoch grid")
        values = np.vstack([frame[column].to_numpy(dtype=float) for frame in frames])
        curves[solver] = (epochs, values.mean(axis=0))
    return curves


def plot_svg(sources: Iterable[Source], output_path: Union[str, Path], title: Optional[str] = None,
             column: str = "gap") -> Path:
    curves = seed_means(sources, column)
    output_path = Path(output_path)

    with rc_context(SVG_RC):
        fig = Figure(figsize=(6.4, 4.8))
        FigureCanvasSVG(fig)
        ax = fig.add_subplot(1, 1, 1)
        plotted = 0
        for solver in sorted(curves):
            epochs, values = curves[solver]
            # log axis: non-positive gaps are dropped
            y = np.where(values > 0, values, np.nan)
            if not np.any(np.isfinite(y)):
                logger.warning("%s has no positive %s values; skipped", solver, column)
                continue
            (line,) = ax.plot(epochs, y, label=solver, linewidth=1.5)
            line.set_gid(f"trace-{solver}")
            plotted += 1
        if not plotted:
            raise PlotError(f"no positive {column} values to draw on a log scale")
        ax.set_yscale("log")
        ax.set_xlabel("passes over the data")
        ax.set_ylabel("objective gap" if column == "gap" else column)
        if title:
            ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        fig.savefig(output_path, format="svg", metadata={"Date": None})
    logger.info("wrote %s (%d curves)", output_path, plotted)
    return output_path
