import itertools
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ttpoly.instances import (FAMILIES, InstanceFormatError, gen_circ, gen_con, gen_incr, gen_line, generate,
                              incr_positions, parse_robinx, write_robinx)
from ttpoly.schedule import Instance

from conftest import FIXTURES

even_n = st.sampled_from([4, 6, 8, 10, 12])


def test_small_values():
    assert gen_con(4).dist(1, 2) == 1
    c = gen_circ(4)
    assert (c.dist(1, 2), c.dist(1, 3), c.dist(1, 4)) == (1, 2, 1)
    assert gen_line(4).dist(1, 4) == 3
    assert incr_positions(4) == [0, 1, 3, 6]
    inc = gen_incr(4)
    assert inc.dist(1, 2) < inc.dist(2, 3) < inc.dist(3, 4)
    assert inc.matrix()[0] == [0, 1, 3, 6]


@given(st.sampled_from(FAMILIES), even_n)
def test_generators_symmetric_metric(family, n):
    inst = generate(family, n)
    assert inst.name == f"{family.upper()}{n}"
    for i, j in itertools.permutations(range(1, n + 1), 2):
        assert inst.dist(i, j) == inst.dist(j, i) > 0
    for i, j, k in itertools.permutations(range(1, n + 1), 3):
        assert inst.dist(i, k) <= inst.dist(i, j) + inst.dist(j, k)


def test_unknown_family_and_bad_n():
    with pytest.raises(ValueError):
        generate("star", 4)
    with pytest.raises(ValueError):
        generate("con", 5)


def test_handwritten_fixture_equals_generator():
    inst = parse_robinx(FIXTURES / "circ4_onebased.xml")
    ref = gen_circ(4)
    assert inst.n == 4 and inst.matrix() == ref.matrix()
    assert inst.name == "CIRC4-handwritten"


def test_missing_pair_named():
    with pytest.raises(InstanceFormatError, match=r"\(2,3\)"):
        parse_robinx(FIXTURES / "missing_pair.xml")


def test_malformed_xml():
    with pytest.raises(InstanceFormatError, match="malformed"):
        parse_robinx(FIXTURES / "malformed.xml")


@given(st.sampled_from(FAMILIES), st.sampled_from([4, 6, 8]))
def test_round_trip(tmp_path_factory, family, n):
    inst = generate(family, n)
    path = tmp_path_factory.mktemp("rt") / "inst.xml"
    write_robinx(inst, path)
    back = parse_robinx(path)
    assert (back.n, back.name, back.matrix()) == (inst.n, inst.name, inst.matrix())


def test_round_trip_rational_distances(tmp_path):
    d = {(i, j): Fraction(i + 2 * j, 7) for i in range(1, 7) for j in range(1, 7) if i != j}
    inst = Instance(6, "ODD6", d)
    write_robinx(inst, tmp_path / "odd.xml")
    assert parse_robinx(tmp_path / "odd.xml").matrix() == inst.matrix()


def test_con6_has_30_unit_entries(tmp_path):
    write_robinx(gen_con(6), tmp_path / "c.xml")
    text = (tmp_path / "c.xml").read_text()
    assert text.count("<distance ") == 30
    assert text.count('dist="1"') == 30


def test_conflicting_entries(tmp_path):
    body = "".join(f'<distance team1="{i}" team2="{j}" dist="1"/>' for i in range(4) for j in range(4) if i != j)
    body += '<distance team1="0" team2="1" dist="5"/>'
    (tmp_path / "x.xml").write_text(f"<Instance><Data><Distances>{body}</Distances></Data></Instance>")
    with pytest.raises(InstanceFormatError, match="conflicting"):
        parse_robinx(tmp_path / "x.xml")


def test_zero_based_without_team_section(tmp_path):
    body = "".join(f'<distance team1="{i}" team2="{j}" dist="{abs(i - j)}"/>' for i in range(6) for j in range(6)
                   if i != j)
    (tmp_path / "l.xml").write_text(f"<Instance><Data><Distances>{body}</Distances></Data></Instance>")
    assert parse_robinx(tmp_path / "l.xml").matrix() == gen_line(6).matrix()
