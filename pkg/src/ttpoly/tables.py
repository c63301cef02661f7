"""Reference values for model sizes and LP-bound ratios, and the column recipes behind them."""

from __future__ import annotations

from dataclasses import replace
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from pathlib import Path

from .model import BuildOptions
from .schedule import Instance

# relative tolerance on a percentage cell, in percentage points
CELL_TOLERANCE = Fraction(1, 20)

DEFAULT_U = 3

BASE = BuildOptions(no_repeaters=True, U=DEFAULT_U)
_LIFTED = dict(lifted_away_away=True, lifted_home_travel=True)
_HOME_FLOW = dict(home_flow=True, flow_equations=True)
_FULL = dict(**_LIFTED, **_HOME_FLOW, hsrt_flow=True)

# (label, options applied on top of the base model)
LP_BOUND_COLUMNS: tuple[tuple[str, dict], ...] = (
    ("base", {}),
    ("+lifted", _LIFTED),
    ("+flow", dict(flow=True, flow_own_venue=True)),
    ("+home-flow,flow-eq", _HOME_FLOW),
    ("+hsrt-flow", dict(hsrt_flow=True)),
    ("full", _FULL),
    ("full-lifted", {**_FULL, **{k: False for k in _LIFTED}}),
    ("full-home-flow,flow-eq", {**_FULL, **{k: False for k in _HOME_FLOW}}),
    ("full-hsrt-flow", {**_FULL, "hsrt_flow": False}),
)


def column_options(column: int, mirrored: bool = False, U: int = DEFAULT_U) -> BuildOptions:
    return replace(BASE, mirrored=mirrored, U=U, **LP_BOUND_COLUMNS[column][1])


# LP bound as a percentage of the best known objective, per (instance, mirrored)
_LP_BOUND_TEXT: dict[tuple[str, bool], tuple[str, ...]] = {
    ("NL4", True): ('24.3', '24.3', '97.0', '97.0', '30.8', '97.0', '97.0', '34.6', '97.0'),
    ("SUP4", True): ('24.9', '24.9', '41.0', '41.0', '28.3', '41.0', '41.0', '28.3', '41.0'),
    ("GAL4", True): ('24.8', '24.8', '94.1', '94.1', '35.4', '94.1', '94.1', '38.3', '94.1'),
    ("INCR4", True): ('25.0', '25.0', '77.1', '77.1', '35.4', '77.1', '77.1', '37.5', '77.1'),
    ("LINE4", True): ('25.0', '25.0', '77.8', '77.8', '41.7', '77.8', '77.8', '41.7', '77.8'),
    ("CIRC4", True): ('20.0', '20.0', '80.0', '80.0', '40.0', '80.0', '80.0', '40.0', '80.0'),
    ("CON4", True): ('23.5', '23.5', '94.1', '94.1', '47.1', '94.1', '94.1', '47.1', '94.1'),
    ("NL4", False): ('24.2', '24.2', '96.9', '96.9', '30.4', '96.9', '96.9', '32.6', '96.9'),
    ("SUP4", False): ('5.2', '5.2', '20.9', '20.9', '10.4', '20.9', '20.9', '10.4', '20.9'),
    ("GAL4", False): ('22.6', '22.6', '90.4', '90.4', '35.0', '90.4', '90.4', '36.7', '90.4'),
    ("INCR4", False): ('16.7', '16.7', '66.7', '66.7', '31.3', '66.7', '66.7', '31.3', '66.7'),
    ("LINE4", False): ('16.7', '16.7', '66.7', '66.7', '33.3', '66.7', '66.7', '33.3', '66.7'),
    ("CIRC4", False): ('20.0', '20.0', '80.0', '80.0', '40.0', '80.0', '80.0', '40.0', '80.0'),
    ("CON4", False): ('23.5', '23.5', '94.1', '94.1', '47.1', '94.1', '94.1', '47.1', '94.1'),
    ("NL6", True): ('11.0', '11.0', '53.2', '53.2', '30.1', '65.5', '65.5', '30.7', '53.2'),
    ("SUP6", True): ('10.8', '10.8', '14.1', '14.1', '12.6', '29.1', '29.1', '12.6', '14.1'),
    ("GAL6", True): ('11.3', '11.3', '65.1', '65.1', '35.6', '77.2', '77.2', '36.1', '65.1'),
    ("INCR6", True): ('9.0', '9.0', '44.2', '44.2', '26.0', '56.7', '56.7', '26.7', '45.0'),
    ("LINE6", True): ('8.9', '8.9', '44.6', '44.6', '28.9', '57.8', '57.8', '28.9', '45.2'),
    ("CIRC6", True): ('8.3', '8.3', '50.0', '50.0', '33.3', '66.7', '66.7', '33.3', '50.0'),
    ("CON6", True): ('12.5', '12.5', '75.0', '75.0', '50.0', '87.5', '87.5', '50.0', '75.0'),
    ("NL6", False): ('9.1', '9.1', '54.8', '54.8', '32.1', '72.8', '72.8', '32.1', '54.8'),
    ("SUP6", False): ('0.7', '0.7', '4.2', '4.2', '2.8', '32.9', '32.9', '2.8', '4.2'),
    ("GAL6", False): ('12.0', '12.0', '72.1', '72.1', '39.8', '87.3', '87.3', '39.8', '72.1'),
    ("INCR6", False): ('7.9', '7.9', '47.4', '47.4', '28.9', '66.7', '66.7', '28.9', '47.4'),
    ("LINE6", False): ('7.9', '7.9', '47.4', '47.4', '31.6', '68.4', '68.4', '31.6', '47.4'),
    ("CIRC6", False): ('9.4', '9.4', '56.3', '56.3', '37.5', '75.0', '75.0', '37.5', '56.3'),
    ("CON6", False): ('14.0', '14.0', '83.7', '83.7', '55.8', '97.7', '97.7', '55.8', '83.7'),
    ("NL8", True): ('8.2', '8.2', '53.8', '53.8', '33.3', '76.1', '76.1', '33.8', '53.8'),
    ("SUP8", True): ('1.7', '1.7', '7.2', '7.2', '4.1', '32.1', '32.1', '4.1', '7.2'),
    ("GAL8", True): ('7.9', '7.9', '49.6', '49.6', '31.4', '71.9', '71.9', '31.5', '49.6'),
    ("INCR8", True): ('6.0', '6.0', '37.2', '37.2', '25.0', '56.4', '56.4', '25.3', '37.3'),
    ("LINE8", True): ('6.0', '6.0', '37.7', '37.7', '27.7', '56.5', '56.5', '27.7', '37.7'),
    ("CIRC8", True): ('5.7', '5.7', '45.7', '45.7', '34.3', '68.6', '68.6', '34.3', '45.7'),
    ("CON8", True): ('10.0', '10.0', '80.0', '80.0', '60.0', '100.0', '100.0', '60.0', '80.0'),
    ("NL8", False): ('6.8', '6.8', '54.1', '54.1', '34.4', '80.4', '80.4', '34.4', '54.1'),
    ("SUP8", False): ('1.0', '1.0', '7.7', '7.7', '3.9', '39.8', '39.8', '3.9', '7.7'),
    ("GAL8", False): ('6.5', '6.5', '52.3', '52.3', '32.5', '78.8', '78.8', '32.5', '52.3'),
    ("INCR8", False): ('5.1', '5.1', '41.0', '41.0', '28.4', '66.7', '66.7', '28.4', '41.0'),
    ("LINE8", False): ('4.9', '4.9', '39.5', '39.5', '29.6', '64.2', '64.2', '29.6', '39.5'),
    ("CIRC8", False): ('6.1', '6.1', '48.5', '48.5', '36.4', '72.7', '72.7', '36.4', '48.5'),
    ("CON8", False): ('10.0', '10.0', '80.0', '80.0', '60.0', '100.0', '100.0', '60.0', '80.0'),
}
LP_BOUND_REFERENCE: dict[tuple[str, bool], tuple[Decimal, ...]] = {
    key: tuple(Decimal(v) for v in vals) for key, vals in _LP_BOUND_TEXT.items()
}

SYNTHETIC = ("CON", "CIRC", "LINE", "INCR")
FILE_BASED = ("NL", "SUP", "GAL")

# model sizes for the plain and mirrored base model; rows marked exact are
# reproduced verbatim, the rest were reported after an external presolve
SIZE_REFERENCE: dict[str, dict[int, int]] = {
    "variables": {4: 120, 6: 480, 8: 1232},
    "flow rows": {4: 24, 6: 60, 8: 112},
    "hsrt-flow rows": {4: 8, 6: 12, 8: 16},
}
SIZE_REFERENCE_PRESOLVED: dict[str, dict[int, int]] = {
    "constraints": {4: 332, 6: 1998, 8: 6664},
    "lifted rows": {4: 120, 6: 1080, 8: 5268},
    "nonzeros": {4: 1334, 6: 10260, 8: 35168},
    "mirrored variables": {4: 84, 6: 330, 8: 840},
    "mirrored constraints": {4: 282, 6: 1785, 8: 6132},
}


def percent(lp_value: Fraction | float, best: Fraction | float) -> Fraction:
    return 100 * Fraction(lp_value) / Fraction(best)


def format_percent(value: Fraction) -> str:
    """One decimal, halves rounded away from zero."""
    exact = Decimal(value.numerator) / Decimal(value.denominator)
    return str(exact.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def cell_matches(value: Fraction, reference: Decimal, tol: Fraction = CELL_TOLERANCE) -> bool:
    return abs(value - Fraction(reference)) <= tol


def reference_row(name: str, mirrored: bool) -> tuple[Decimal, ...] | None:
    return LP_BOUND_REFERENCE.get((name.upper(), mirrored))


def find_instance_file(data_dir: str | Path, name: str) -> Path | None:
    """First ``*.xml`` file in ``data_dir`` whose stem equals ``name`` ignoring case."""
    for path in sorted(Path(data_dir).glob("*")):
        if path.suffix.lower() == ".xml" and path.stem.upper() == name.upper():
            return path
    return None


def instance_label(inst: Instance, mirrored: bool) -> str:
    return f"{inst.name} (mirrored)" if mirrored else inst.name
