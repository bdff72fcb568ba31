from pathlib import Path

import pandas as pd
import plotly.io as pio

from ..bounds import SweepReport


def sweep_frame(report: SweepReport) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "m": [r.m for r in report.records],
            "bound": [float(r.bound) for r in report.records],
            "solved": [r.solved for r in report.records],
        }
    )


def sweep_figure(report: SweepReport) -> dict:
    """Bound on z_m against m; solved points marked, the target w dashed."""

    data = sweep_frame(report)
    solved = data[data["solved"]]
    return {
        "data": [
            {"x": data["m"].tolist(), "y": data["bound"].tolist(), "type": "scatter", "mode": "lines", "name": "bound"},
            {
                "x": solved["m"].tolist(),
                "y": solved["bound"].tolist(),
                "type": "scatter",
                "mode": "markers",
                "name": "solved",
            },
            {
                "x": [report.m_lo, report.m_hi],
                "y": [float(report.w)] * 2,
                "type": "scatter",
                "mode": "lines",
                "line": {"dash": "dash"},
                "name": "w",
            },
        ],
        "layout": {
            "height": 400,
            "margin": {"l": 40, "r": 10, "t": 10, "b": 40},
            "xaxis": {"title": {"text": "m"}},
            "yaxis": {"title": {"text": "bound on z_m (approx.)"}},
        },
    }


def write_sweep_chart(report: SweepReport, path: Path) -> Path:
    pio.write_html(sweep_figure(report), file=str(path), include_plotlyjs="cdn", full_html=True, div_id="sweep-chart")
    return path
