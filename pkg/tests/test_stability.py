import csv
import io
import json

import numpy as np
import pytest

from coat.errors import ConfigurationError
from coat.parallel import rng_for
from coat.simulation import bases_to_composition, generate_omega0, sample_bases
from coat.stability import (
    Edge,
    StabilityNetwork,
    bootstrap_stability,
    edge_sign_split,
    export_network,
    network_from_json,
)


@pytest.fixture(scope="module")
def comp():
    om = generate_omega0("2", 20, seed=6).values
    return bases_to_composition(sample_bases(60, None, om, "normal", rng_for(6, 5)))


def identity_resample(rng, n):
    return np.arange(n)


def test_identity_resample_gives_full_stability(comp):
    net = bootstrap_stability(comp, rule="hard", folds=5, B=1, retain=1, seed=0, pd=False,
                              fixed_lambda=True, resample=identity_resample)
    assert net.edges
    assert net.stability == 1.0
    assert all(e.frequency == 1 and e.retained for e in net.edges)


def test_retain_zero_keeps_every_edge(comp):
    net = bootstrap_stability(comp, folds=5, B=3, retain=0, seed=1)
    assert all(e.retained for e in net.edges)


def test_frequencies_bounded_and_retention_rule(comp):
    net = bootstrap_stability(comp, folds=5, B=6, retain=4, seed=2)
    assert len(net.replicate_lambdas) == 6
    for e in net.edges:
        assert 0 <= e.frequency <= 6
        assert e.retained == (e.frequency >= 4)
        assert -1 <= e.correlation <= 1
        assert e.i < e.j


def test_deterministic_and_thread_independent(comp):
    a = bootstrap_stability(comp, folds=5, B=4, retain=2, seed=3, threads=1)
    b = bootstrap_stability(comp, folds=5, B=4, retain=2, seed=3, threads=4)
    assert export_network(a) == export_network(b)
    assert export_network(a, "json") == export_network(b, "json")


def test_invalid_configuration(comp):
    with pytest.raises(ConfigurationError):
        bootstrap_stability(comp, B=5, retain=6)
    with pytest.raises(ConfigurationError):
        bootstrap_stability(comp, B=0, retain=0)


def test_edge_sign_split():
    net = StabilityNetwork(
        edges=[Edge(0, 1, 0.5, 9, True), Edge(0, 2, -0.3, 9, True), Edge(1, 2, -0.1, 1, False)],
        B=10, retained_threshold=8, stability=0.5, taxon_ids=("a", "b", "c"),
    )
    assert edge_sign_split(net) == (1, 1)


def test_empty_network_exports():
    net = StabilityNetwork(edges=[], B=10, retained_threshold=8, stability=None, taxon_ids=("a", "b"))
    assert export_network(net) == b"source,target,correlation,frequency,retained\n"
    doc = json.loads(export_network(net, "json"))
    assert doc["edges"] == [] and doc["stability"] is None


def test_export_round_trip(comp):
    net = bootstrap_stability(comp, folds=5, B=3, retain=2, seed=4)
    blob = export_network(net, "json")
    back = network_from_json(blob)
    assert back == net
    rows = list(csv.DictReader(io.StringIO(export_network(net).decode())))
    assert len(rows) == len(net.edges)
    for row, e in zip(rows, net.edges):
        assert row["source"] == net.taxon_ids[e.i]
        assert float(row["correlation"]) == pytest.approx(e.correlation, abs=5e-7)
        assert row["retained"] == str(int(e.retained))
    assert b"\r" not in export_network(net)


def test_unknown_export_format():
    net = StabilityNetwork(edges=[], B=1, retained_threshold=1, stability=None)
    with pytest.raises(ConfigurationError):
        export_network(net, "graphml")
