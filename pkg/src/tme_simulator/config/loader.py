"""Parsing, validation and serialization of simulation configs."""

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, List, Sequence, Union

import numpy as np
from pydantic import ValidationError

from tme_simulator.exceptions import ConfigError
from tme_simulator.models.simulation import SimulationConfig

SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ValidationResult:
    """Outcome of :func:`validate_config`."""

    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def parse_config(text: Union[str, bytes]) -> SimulationConfig:
    """Parse a JSON config document and check every invariant.

    Raises:
        ConfigError: on malformed JSON, missing or mistyped fields, and
            invariant violations.
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"invalid config document at line {e.lineno}, column {e.colno}: {e.msg}"
        ) from e

    if not isinstance(document, dict):
        raise ConfigError(
            f"config document must be an object, got {type(document).__name__}"
        )

    try:
        cfg = SimulationConfig.model_validate(document)
    except ValidationError as e:
        raise ConfigError(
            "invalid config", violations=[_describe_error(err) for err in e.errors()]
        ) from e

    result = validate_config(cfg)
    if not result.ok:
        raise ConfigError("config violates invariants", violations=result.violations)
    return cfg


def load_config(path: Union[str, Path]) -> SimulationConfig:
    """Read and parse a config file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror or e}") from e
    return parse_config(text)


def serialize_config(cfg: SimulationConfig) -> str:
    """Indented JSON document; ``parse_config`` restores an equal config."""
    return cfg.model_dump_json(indent=2, exclude_none=True)


def validate_config(cfg: SimulationConfig) -> ValidationResult:
    """Collect every violated invariant of ``cfg``.

    Shape checks come first; value checks that depend on a malformed field
    are skipped rather than reported twice.
    """
    violations: List[str] = []
    n, p, c = cfg.num_neighborhoods, cfg.num_phenotypes, cfg.num_markers

    shapes_ok = {
        "neighborhood_abundance": _check_shape(
            violations, "neighborhood_abundance", cfg.neighborhood_abundance, (n,)
        ),
        "neighborhood_interaction": _check_shape(
            violations, "neighborhood_interaction", cfg.neighborhood_interaction, (n, n)
        ),
        "phenotype_abundance": _check_shape(
            violations, "phenotype_abundance", cfg.phenotype_abundance, (p, n)
        ),
        "phenotype_interaction": _check_shape(
            violations, "phenotype_interaction", cfg.phenotype_interaction, (p, p, n)
        ),
        "phenotype_eccentricity": _check_shape(
            violations, "phenotype_eccentricity", cfg.phenotype_eccentricity, (p,)
        ),
        "phenotype_size": _check_shape(
            violations, "phenotype_size", cfg.phenotype_size, (p,)
        ),
        "marker_expression": _check_shape(
            violations, "marker_expression", cfg.marker_expression, (p, c)
        ),
    }

    for name, shape_ok in shapes_ok.items():
        if not shape_ok:
            continue
        if not np.isfinite(np.asarray(getattr(cfg, name), dtype=np.float64)).all():
            violations.append(f"{name} has non-finite entries")
            shapes_ok[name] = False
    for name in ("leakage_sigma", "psf_sigma", "graph_radius"):
        if not math.isfinite(getattr(cfg, name)):
            violations.append(f"{name} must be finite")
    if math.isnan(cfg.snr_db):
        violations.append("snr_db is NaN")

    nb_ok = 1 <= cfg.background_neighborhood <= n
    if not nb_ok:
        violations.append(
            f"background_neighborhood is {cfg.background_neighborhood}, "
            f"expected 1..{n}"
        )
    ph_ok = 1 <= cfg.background_phenotype <= p
    if not ph_ok:
        violations.append(
            f"background_phenotype is {cfg.background_phenotype}, expected 1..{p}"
        )

    if shapes_ok["neighborhood_abundance"]:
        abundance = cfg.neighborhood_abundance_array()
        total = float(abundance.sum())
        if abs(total - 100.0) > SUM_TOLERANCE:
            violations.append(
                f"neighborhood_abundance sums to {total:g}, expected 100"
            )
        if (abundance < 0).any():
            violations.append("neighborhood_abundance has negative entries")

    if shapes_ok["phenotype_abundance"]:
        abundance = cfg.phenotype_abundance_array()
        names = cfg.neighborhood_labels if len(cfg.neighborhood_labels) == n else None
        for column, total in enumerate(abundance.sum(axis=0)):
            if abs(float(total) - 100.0) > SUM_TOLERANCE:
                name = names[column] if names else f"Nb{column + 1}"
                violations.append(
                    f"phenotype_abundance column {name} sums to {float(total):g}, "
                    "expected 100"
                )
        if (abundance < 0).any():
            violations.append("phenotype_abundance has negative entries")
        if nb_ok and ph_ok:
            share = abundance[
                cfg.background_phenotype - 1, cfg.background_neighborhood - 1
            ]
            if abs(float(share) - 100.0) > SUM_TOLERANCE:
                violations.append(
                    f"phenotype_abundance puts {float(share):g} on the background "
                    f"phenotype in the background neighborhood, expected 100"
                )

    if shapes_ok["marker_expression"]:
        expression = cfg.marker_expression_array()
        if ((expression < 0) | (expression > 1)).any():
            violations.append("marker_expression has entries outside [0, 1]")
        if ph_ok and np.any(expression[cfg.background_phenotype - 1] != 0):
            violations.append(
                f"marker_expression row of background phenotype "
                f"{cfg.background_phenotype} must be all zeros"
            )

    if shapes_ok["phenotype_eccentricity"]:
        ecc = np.asarray(cfg.phenotype_eccentricity, dtype=np.float64)
        if ((ecc < 0) | (ecc >= 1)).any():
            violations.append("phenotype_eccentricity has entries outside [0, 1)")

    if shapes_ok["phenotype_size"]:
        size = np.asarray(cfg.phenotype_size, dtype=np.float64)
        if (size < 1).any():
            violations.append("phenotype_size has entries below 1 pixel")

    for name, values, expected in (
        ("marker_names", cfg.marker_names, c),
        ("phenotype_names", cfg.phenotype_names, p),
        ("neighborhood_names", cfg.neighborhood_names, n),
    ):
        if values is not None and len(values) != expected:
            violations.append(
                f"{name} has {len(values)} entries, expected {expected}"
            )

    return ValidationResult(violations)


def _check_shape(
    violations: List[str], name: str, value: Any, expected: Sequence[int]
) -> bool:
    shape = _nested_shape(value, len(expected))
    if shape != tuple(expected):
        violations.append(
            f"{name} has shape {_format_shape(shape)}, "
            f"expected {_format_shape(tuple(expected))}"
        )
        return False
    return True


def _nested_shape(value: Any, depth: int) -> Any:
    """Shape of a nested tuple, or None when rows are ragged."""
    if depth == 1:
        return (len(value),)
    if not value:
        return (0,) + (0,) * (depth - 1)
    inner = {_nested_shape(row, depth - 1) for row in value}
    if len(inner) != 1 or None in inner:
        return None
    return (len(value),) + inner.pop()


def _format_shape(shape: Any) -> str:
    if shape is None:
        return "ragged"
    return "x".join(str(d) for d in shape)


def _describe_error(error: Any) -> str:
    location = ".".join(str(part) for part in error.get("loc", ())) or "<document>"
    return f"{location}: {error.get('msg', 'invalid value')}"
