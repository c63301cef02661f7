"""Distance instances: synthetic families and a minimal RobinX XML reader/writer."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from fractions import Fraction
from pathlib import Path

from .schedule import Instance, check_team_count

FAMILIES = ("con", "circ", "line", "incr")


class InstanceFormatError(ValueError):
    pass


def _from_function(n: int, name: str, dist) -> Instance:
    check_team_count(n)
    d = {(i, j): Fraction(dist(i, j)) for i in range(1, n + 1) for j in range(1, n + 1) if i != j}
    return Instance(n, name, d)


def gen_con(n: int) -> Instance:
    return _from_function(n, f"CON{n}", lambda i, j: 1)


def gen_circ(n: int) -> Instance:
    return _from_function(n, f"CIRC{n}", lambda i, j: min(abs(i - j), n - abs(i - j)))


def gen_line(n: int) -> Instance:
    return _from_function(n, f"LINE{n}", lambda i, j: abs(i - j))


def incr_positions(n: int) -> list[int]:
    # gap between venue i and i+1 is i
    pos = [0]
    for i in range(1, n):
        pos.append(pos[-1] + i)
    return pos


def gen_incr(n: int) -> Instance:
    pos = incr_positions(n)
    return _from_function(n, f"INCR{n}", lambda i, j: abs(pos[i - 1] - pos[j - 1]))


GENERATORS = {"con": gen_con, "circ": gen_circ, "line": gen_line, "incr": gen_incr}


def generate(family: str, n: int) -> Instance:
    try:
        return GENERATORS[family.lower()](n)
    except KeyError:
        raise ValueError(f"unknown instance family {family!r}") from None


def _number(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InstanceFormatError(f"bad distance value {text!r}") from None


def parse_robinx(path: str | Path) -> Instance:
    """Read team count and distance matrix from a RobinX XML file.

    Team ids in ``distance`` elements may be 0- or 1-based; the base is inferred
    from the smallest id used. Everything except teams and distances is ignored.
    """
    path = Path(path)
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as exc:
        raise InstanceFormatError(f"{path}: malformed XML: {exc}") from None

    teams = [el for el in root.iter("team")]
    entries = []
    for el in root.iter("distance"):
        try:
            entries.append((int(el.attrib["team1"]), int(el.attrib["team2"]), _number(el.attrib["dist"])))
        except KeyError as exc:
            raise InstanceFormatError(f"{path}: distance element lacks attribute {exc}") from None
        except ValueError:
            raise InstanceFormatError(f"{path}: non-integer team id in distance element") from None
    if not entries:
        raise InstanceFormatError(f"{path}: no distance entries")

    ids = {a for a, _, _ in entries} | {b for _, b, _ in entries}
    base = 0 if min(ids) == 0 else 1
    n = len(teams) if teams else max(ids) - base + 1
    if teams and max(ids) - base + 1 > n:
        raise InstanceFormatError(f"{path}: distance refers to team beyond the {n} declared")
    try:
        check_team_count(n)
    except ValueError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from None

    d: dict[tuple[int, int], Fraction] = {}
    for a, b, v in entries:
        i, j = a - base + 1, b - base + 1
        if i == j:
            continue
        if (i, j) in d and d[(i, j)] != v:
            raise InstanceFormatError(f"{path}: conflicting distances for pair ({i},{j})")
        d[(i, j)] = v
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i != j and (i, j) not in d:
                raise InstanceFormatError(f"{path}: missing distance for pair ({i},{j})")
    name = root.findtext(".//InstanceName") or path.stem
    return Instance(n, name.strip(), d)


def _fmt(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else str(v)


def write_robinx(inst: Instance, path: str | Path) -> None:
    """Write the subset that :func:`parse_robinx` reads (0-based team ids)."""
    root = ET.Element("Instance")
    meta = ET.SubElement(root, "MetaData")
    ET.SubElement(meta, "InstanceName").text = inst.name
    data = ET.SubElement(root, "Data")
    dists = ET.SubElement(data, "Distances")
    for i in range(1, inst.n + 1):
        for j in range(1, inst.n + 1):
            if i != j:
                ET.SubElement(dists, "distance", dist=_fmt(inst.dist(i, j)), team1=str(i - 1), team2=str(j - 1))
    res = ET.SubElement(root, "Resources")
    teams = ET.SubElement(res, "Teams")
    for t in range(inst.n):
        ET.SubElement(teams, "team", id=str(t), name=f"T{t + 1}")
    ET.indent(root)
    ET.ElementTree(root).write(path, encoding="utf-8", xml_declaration=True)
