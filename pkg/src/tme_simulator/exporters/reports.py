"""CSV and JSON serialization of metrics, cells and telemetry."""

import io
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd

from tme_simulator.exceptions import FormatError
from tme_simulator.models import MetricsReport, SimulationConfig, TelemetrySeries

from .formats import write_bytes

PathLike = Union[str, Path]

TELEMETRY_COLUMNS = ["iteration", "loss", "unassigned"]
CELL_COLUMNS = [
    "cell_id",
    "phenotype",
    "stamp_coverage",
    "semi_major_axis",
    "eccentricity",
]


def encode_csv(frame: pd.DataFrame, index: bool = False) -> bytes:
    return frame.to_csv(index=index, lineterminator="\n").encode("utf-8")


def telemetry_frame(series: TelemetrySeries) -> pd.DataFrame:
    return pd.DataFrame(
        {
            "iteration": [r.iteration for r in series],
            "loss": [r.loss for r in series],
            "unassigned": [r.unassigned for r in series],
        },
        columns=TELEMETRY_COLUMNS,
    )


def report_tables(
    report: MetricsReport, cfg: SimulationConfig
) -> Dict[str, pd.DataFrame]:
    """Metrics as named tables, one CSV file each."""
    neighborhoods = cfg.neighborhood_labels
    phenotypes = cfg.phenotype_labels
    markers = cfg.marker_labels

    def matrix(
        values: np.ndarray, rows: List[str], cols: List[str], axis: str
    ) -> pd.DataFrame:
        frame = pd.DataFrame(values, index=rows, columns=cols)
        frame.index.name = axis
        return frame

    interactions = report.phenotype_interactions
    n_idx, p_idx, q_idx = np.meshgrid(
        np.arange(interactions.shape[2]),
        np.arange(interactions.shape[0]),
        np.arange(interactions.shape[1]),
        indexing="ij",
    )
    interaction_rows = pd.DataFrame(
        {
            "neighborhood": [neighborhoods[i] for i in n_idx.ravel()],
            "phenotype_a": [phenotypes[i] for i in p_idx.ravel()],
            "phenotype_b": [phenotypes[i] for i in q_idx.ravel()],
            "edges": interactions[p_idx, q_idx, n_idx].ravel(),
        }
    )

    morphology = pd.DataFrame(
        {
            "phenotype": [phenotypes[m.phenotype - 1] for m in report.morphology],
            "cells": [m.cells for m in report.morphology],
            "median_semi_major_axis": [
                m.median_semi_major_axis for m in report.morphology
            ],
            "median_eccentricity": [m.median_eccentricity for m in report.morphology],
        }
    )

    return {
        "neighborhood_adjacency": matrix(
            report.neighborhood_adjacency, neighborhoods, neighborhoods, "neighborhood"
        ),
        "neighborhood_areas": pd.DataFrame(
            {"neighborhood": neighborhoods, "pixels": report.neighborhood_areas}
        ).set_index("neighborhood"),
        "phenotype_interactions": interaction_rows.set_index("neighborhood"),
        "phenotype_abundance": matrix(
            report.phenotype_abundance_pct, phenotypes, neighborhoods, "phenotype"
        ),
        "phenotype_cell_counts": matrix(
            report.phenotype_cell_counts, phenotypes, neighborhoods, "phenotype"
        ),
        "expression_mean": matrix(
            report.expression_mean, phenotypes, markers, "phenotype"
        ),
        "expression_std": matrix(
            report.expression_std, phenotypes, markers, "phenotype"
        ),
        "morphology": morphology.set_index("phenotype"),
    }


def summary_document(report: MetricsReport, cfg: SimulationConfig) -> Dict[str, Any]:
    """Every table of the report in one JSON-ready mapping."""
    return {
        "neighborhoods": cfg.neighborhood_labels,
        "phenotypes": cfg.phenotype_labels,
        "markers": cfg.marker_labels,
        "neighborhood_adjacency": _plain(report.neighborhood_adjacency),
        "neighborhood_areas": _plain(report.neighborhood_areas),
        "phenotype_interactions": _plain(report.phenotype_interactions),
        "phenotype_abundance_pct": _plain(report.phenotype_abundance_pct),
        "phenotype_cell_counts": _plain(report.phenotype_cell_counts),
        "expression_mean": _plain(report.expression_mean),
        "expression_std": _plain(report.expression_std),
        "morphology": [
            {
                "phenotype": m.phenotype,
                "cells": m.cells,
                "median_semi_major_axis": _number(m.median_semi_major_axis),
                "median_eccentricity": _number(m.median_eccentricity),
            }
            for m in report.morphology
        ],
    }


def encode_summary(report: MetricsReport, cfg: SimulationConfig) -> bytes:
    document = summary_document(report, cfg)
    return (json.dumps(document, indent=2, sort_keys=True) + "\n").encode("utf-8")


async def write_report(
    report: MetricsReport, cfg: SimulationConfig, directory: PathLike
) -> Dict[str, bytes]:
    """Write one CSV per table plus ``summary.json``.

    Returns the bytes written keyed by file name.
    """
    directory = Path(directory)
    written: Dict[str, bytes] = {}
    for name, frame in report_tables(report, cfg).items():
        data = encode_csv(frame, index=True)
        await write_bytes(directory / f"{name}.csv", data)
        written[f"{name}.csv"] = data
    summary = encode_summary(report, cfg)
    await write_bytes(directory / "summary.json", summary)
    written["summary.json"] = summary
    return written


def decode_cell_coverage(data: bytes) -> np.ndarray:
    """Stamp coverage indexed by ``cell_id - 1`` from a cells CSV."""
    frame = pd.read_csv(io.BytesIO(data), float_precision="round_trip")
    missing = set(CELL_COLUMNS) - set(frame.columns)
    if missing:
        raise FormatError(f"cells table lacks columns {sorted(missing)}")
    if frame.empty:
        return np.zeros(0, dtype=np.float64)
    coverage = np.full(int(frame["cell_id"].max()), np.nan)
    coverage[frame["cell_id"].to_numpy() - 1] = frame["stamp_coverage"].to_numpy()
    return coverage


def _plain(values: np.ndarray) -> Any:
    """Nested lists with NaN replaced by None."""
    if np.issubdtype(values.dtype, np.integer):
        return values.tolist()
    if values.ndim > 1:
        return [_plain(row) for row in values]
    return [_number(v) for v in values.tolist()]


def _number(value: float) -> Any:
    return None if math.isnan(value) else value
