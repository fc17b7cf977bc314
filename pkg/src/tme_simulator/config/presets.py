"""Built-in parameter presets."""

from enum import Enum
from typing import Dict, List, Tuple

from tme_simulator.models.simulation import SimulationConfig


class PresetScale(str, Enum):
    """Image size of a preset."""

    FULL = "full"
    DESK = "desk"


PRESET_SIZES: Dict[PresetScale, Tuple[int, int]] = {
    PresetScale.FULL: (1000, 2000),
    PresetScale.DESK: (256, 512),
}

PRESET_NAMES = ("fig4",)

# Six neighborhoods, Nb1 carries no cells.
_NEIGHBORHOOD_ABUNDANCE = (30.0, 14.0, 14.0, 14.0, 14.0, 14.0)
_NEIGHBORHOOD_PAIRS = {(2, 3): 1.0, (5, 6): -1.0}

# Phenotype shares per neighborhood; Ph9 is the background phenotype.
_PHENOTYPE_SHARES: Dict[int, Dict[int, float]] = {
    1: {9: 100.0},
    2: {3: 20.0, 7: 20.0, 4: 10.0, 5: 10.0, 9: 40.0},
    3: {1: 30.0, 6: 20.0, 9: 50.0},
    4: {2: 15.0, 5: 15.0, 6: 15.0, 8: 15.0, 9: 40.0},
    5: {2: 20.0, 4: 15.0, 7: 20.0, 9: 45.0},
    6: {1: 15.0, 5: 20.0, 7: 20.0, 8: 10.0, 9: 35.0},
}
_PHENOTYPE_PAIRS: Dict[int, Dict[Tuple[int, int], float]] = {
    2: {(3, 7): -1.0, (4, 5): 1.0},
    4: {(6, 2): 1.0},
    6: {(5, 7): -1.0},
}

_PHENOTYPE_SIZE = (4.0, 6.0, 4.0, 2.0, 5.0, 6.0, 4.0, 5.0, 3.0)
_PHENOTYPE_ECCENTRICITY = (0.5, 0.6, 0.0, 0.0, 0.9, 0.7, 0.6, 0.75, 0.0)

# phenotype -> {marker: level}
_MARKER_LEVELS: Dict[int, Dict[int, float]] = {
    1: {1: 1.0},
    2: {2: 0.8},
    3: {3: 0.9},
    4: {4: 0.7},
    5: {5: 0.85},
    6: {6: 0.75},
    7: {2: 0.8, 5: 0.8},
    8: {4: 0.8, 6: 0.8},
    9: {},
}


def preset_fig4(scale: PresetScale = PresetScale.DESK) -> SimulationConfig:
    """Tumor microenvironment with nine phenotypes in six neighborhoods.

    Nb2 and Nb3 attract each other while Nb5 and Nb6 repel. Inside Nb2,
    Ph3 and Ph7 repel and Ph4 and Ph5 attract; Ph6 attracts Ph2 in Nb4 and
    Ph5 repels Ph7 in Nb6. Interaction magnitudes are +1/-1 with a +1
    diagonal for every phenotype present in a neighborhood. ``desk`` keeps
    every parameter and shrinks the image to 256 x 512.
    """
    scale = PresetScale(scale)
    width, height = PRESET_SIZES[scale]
    n, p, c = 6, 9, 6

    neighborhood_interaction = _identity(n)
    for (a, b), value in _NEIGHBORHOOD_PAIRS.items():
        neighborhood_interaction[a - 1][b - 1] = value
        neighborhood_interaction[b - 1][a - 1] = value

    phenotype_abundance = [[0.0] * n for _ in range(p)]
    for nb, shares in _PHENOTYPE_SHARES.items():
        for ph, share in shares.items():
            phenotype_abundance[ph - 1][nb - 1] = share

    phenotype_interaction = [[[0.0] * n for _ in range(p)] for _ in range(p)]
    for nb, shares in _PHENOTYPE_SHARES.items():
        for ph in shares:
            phenotype_interaction[ph - 1][ph - 1][nb - 1] = 1.0
        for (a, b), value in _PHENOTYPE_PAIRS.get(nb, {}).items():
            phenotype_interaction[a - 1][b - 1][nb - 1] = value
            phenotype_interaction[b - 1][a - 1][nb - 1] = value

    marker_expression = [[0.0] * c for _ in range(p)]
    for ph, levels in _MARKER_LEVELS.items():
        for mk, level in levels.items():
            marker_expression[ph - 1][mk - 1] = level

    return SimulationConfig(
        width=width,
        height=height,
        num_neighborhoods=n,
        neighborhood_abundance=_NEIGHBORHOOD_ABUNDANCE,
        neighborhood_interaction=_freeze(neighborhood_interaction),
        background_neighborhood=1,
        num_phenotypes=p,
        background_phenotype=9,
        phenotype_abundance=_freeze(phenotype_abundance),
        phenotype_interaction=tuple(_freeze(plane) for plane in phenotype_interaction),
        phenotype_eccentricity=_PHENOTYPE_ECCENTRICITY,
        phenotype_size=_PHENOTYPE_SIZE,
        num_markers=c,
        marker_expression=_freeze(marker_expression),
    )


def get_preset(name: str, scale: PresetScale = PresetScale.DESK) -> SimulationConfig:
    """Look up a preset by name."""
    if name != "fig4":
        raise KeyError(f"unknown preset {name!r}, expected one of {PRESET_NAMES}")
    return preset_fig4(scale)


def _identity(size: int) -> List[List[float]]:
    return [[1.0 if i == j else 0.0 for j in range(size)] for i in range(size)]


def _freeze(rows: List[List[float]]) -> Tuple[Tuple[float, ...], ...]:
    return tuple(tuple(row) for row in rows)
