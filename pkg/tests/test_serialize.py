import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from _nets import binding, birth_binding, cascade, gene, net, networks
from crnkit import cbn, moments, network, serialize
from crnkit.serialize import SchemaError, from_json, to_json


def artifacts():
    g = gene()
    sys = moments.moment_system(g, [(1, 0, 0), (0, 0, 1), (0, 0, 2)])
    out = [
        g,
        cascade(),
        network.stoichiometry(g),
        network.conservation_basis(g),
        network.conservation_basis(net(["A", "B"], [((1, 1), (0, 0), 1)])),
        network.conservation_basis(cascade()),
        network.structure(binding()),
        network.ffn_certificate(cascade()),
        sys,
        moments.steady_state(sys),
        moments.transient(sys, [0] * len(sys.b), [0.5])[0],
        cbn.solve_complex_balance(binding(3, 2)),
        cbn.verify_complex_balance(binding(3, 2), (1.0, 1.0, 1.5), tol=1e-12),
    ]
    return out


def test_round_trip_every_type():
    for obj in artifacts():
        text = to_json(obj)
        back = from_json(text)
        assert back == obj, type(obj).__name__
        assert to_json(back) == text


def test_partition_table_and_distribution_round_trip():
    b = birth_binding()
    table = cbn.PartitionTable(network.conservation_basis(b).rows, (F(1), F(1), F(1)))
    cbn.partition_function(table, (2,))
    back = from_json(to_json(table))
    assert back == table and back.memo == table.memo
    dist = cbn.conditional_distribution(table, (2,))
    assert from_json(to_json(dist)) == dist


def test_number_encoding():
    # float rates are held as the exact binary rational
    d = json.loads(to_json(net(["X"], [((0,), (1,), 0.1)])))
    assert serialize.decode_number(d["reactions"][0]["rate"]) == F(0.1)
    assert serialize.encode_number(0.1) == {"float": "0.1"}
    assert serialize.decode_number({"float": "0.1"}) == 0.1
    assert serialize.decode_number({"num": "3", "den": "6"}) == F(1, 2)
    assert serialize.encode_number(7) == "7"
    with pytest.raises(TypeError):
        serialize.encode_number(True)


@pytest.mark.parametrize("text", [
    "[]",
    "not json",
    '{"type": "Nope"}',
    '{"type": "StoichMatrix", "rows": 1, "cols": 2, "data": [["1"]]}',
    '{"type": "StoichMatrix", "rows": 1, "cols": 1, "data": [[1.5]]}',
    '{"type": "ReactionNetwork", "species": ["A"]}',
    '{"type": "ReactionNetwork", "species": ["A"], "reactions": [{"source": [0], "target": [1], "rate": {"num": "1", "den": "0"}}]}',
])
def test_schema_errors(text):
    with pytest.raises(SchemaError):
        from_json(text)


def test_unknown_object():
    with pytest.raises(TypeError):
        to_json(object())


def test_z_table_csv():
    table = cbn.PartitionTable(network.conservation_basis(birth_binding()).rows, (F(1), F(1), F(1)))
    cbn.partition_function(table, (2,))
    lines = serialize.z_table_csv(table, ["n"]).splitlines()
    assert lines[0] == "n,Z,Z_float"
    assert lines[1:] == [f"{b},{z},{float(z)!r}" for (b,), z in sorted(table.memo.items())]


@settings(max_examples=200, deadline=None)
@given(networks(max_species=4, max_reactions=5, max_coef=2))
def test_round_trip_random_networks(n):
    assert from_json(to_json(n)) == n
    basis = network.conservation_basis(n)
    assert from_json(to_json(basis)) == basis
