import json
import math

import pytest

from gedraft.dataset import (
    Dataset,
    DatasetFormatError,
    PairRecord,
    dataset_from_json,
    dataset_to_json,
    read_dataset,
    write_dataset,
)
from gedraft.graphs import Graph


def make_pair(i, j, ged, ni, nj, split):
    d = ged / ((ni + nj) / 2)
    return PairRecord(i, j, ged, d, math.exp(-d), split)


@pytest.fixture
def small_ds():
    graphs = [
        Graph.make("a", [0, 1], [(0, 1)]),
        Graph.make("b", [0, 1, 2], [(0, 1), (1, 2)]),
        Graph.make("c", [2, 2], []),
    ]
    pairs = [
        make_pair("a", "b", 2, 2, 3, "train"),
        make_pair("b", "c", 4, 3, 2, "val"),
        make_pair("c", "a", 3, 2, 2, "test"),
    ]
    return Dataset(("C", "N", "O"), graphs, pairs)


def test_lookup_and_splits(small_ds):
    assert small_ds.graph("b").n == 3
    assert [p.i for p in small_ds.split_pairs("val")] == ["b"]
    assert small_ds.validate() == []


def test_roundtrip_bit_exact(small_ds, tmp_path):
    path = tmp_path / "ds.json"
    write_dataset(small_ds, path)
    back = read_dataset(path)
    assert back.alphabet == small_ds.alphabet
    assert back.graphs == small_ds.graphs
    for p, q in zip(small_ds.pairs, back.pairs):
        assert p == q  # floats identical after a 17-significant-digit trip


def test_17g_float_roundtrip():
    # a value whose shortest repr needs all 17 digits
    x = 0.1 + 0.2
    assert json.loads(format(x, ".17g")) == x


def test_validate_detects_inconsistent_labels(small_ds):
    bad = Dataset(
        small_ds.alphabet,
        small_ds.graphs,
        [PairRecord("a", "b", 2, 0.8, 0.5, "train")],
    )
    violations = bad.validate()
    assert any("sim" in v for v in violations)


def test_validate_detects_unknown_graph(small_ds):
    bad = Dataset(small_ds.alphabet, small_ds.graphs, [make_pair("a", "zz", 1, 2, 2, "train")])
    assert any("unknown graph id" in v for v in bad.validate())


def test_validate_detects_bad_split(small_ds):
    bad = Dataset(small_ds.alphabet, small_ds.graphs, [make_pair("a", "b", 2, 2, 3, "dev")])
    assert any("split" in v for v in bad.validate())


def test_validate_detects_label_outside_alphabet(small_ds):
    bad = Dataset(("C",), small_ds.graphs, [])
    assert any("alphabet" in v for v in bad.validate())


def test_write_refuses_invalid(small_ds, tmp_path):
    bad = Dataset(small_ds.alphabet, small_ds.graphs, [PairRecord("a", "b", 2, 0.8, 0.5, "train")])
    with pytest.raises(DatasetFormatError):
        write_dataset(bad, tmp_path / "bad.json")


def test_unknown_version_rejected(small_ds):
    doc = dataset_to_json(small_ds)
    doc["version"] = "99"
    with pytest.raises(DatasetFormatError, match="version"):
        dataset_from_json(doc)


def test_missing_field_rejected(small_ds):
    doc = dataset_to_json(small_ds)
    del doc["graphs"]
    with pytest.raises(DatasetFormatError, match="graphs"):
        dataset_from_json(doc)


def test_malformed_graph_record_reports_index(small_ds):
    doc = dataset_to_json(small_ds)
    del doc["graphs"][1]["labels"]
    with pytest.raises(DatasetFormatError, match="graph 1"):
        dataset_from_json(doc)


def test_malformed_json_reports_line(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"version": "1",\n "alphabet": [,]}\n')
    with pytest.raises(DatasetFormatError, match="line 2"):
        read_dataset(path)


def test_edges_written_sorted(small_ds):
    doc = dataset_to_json(small_ds)
    for rec in doc["graphs"]:
        assert rec["edges"] == sorted(rec["edges"])
