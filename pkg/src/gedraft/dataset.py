"""Supervised pair dataset and its JSON file format (schema version 1).

File layout::

    {"version": "1",
     "alphabet": ["C", "N", ...],
     "graphs": [{"id": ..., "labels": [int], "edges": [[u, v], ...]}, ...],
     "pairs": [{"i": id, "j": id, "ged": int, "nged": float,
                "sim": float, "split": "train"|"val"|"test"}, ...]}

Edges are sorted (u < v, then lexicographic). Floats are written with 17
significant digits so a round-trip is bit-exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .graphs import Graph, validate

SCHEMA_VERSION = "1"
SPLITS = ("train", "val", "test")
_LABEL_TOL = 1e-12


@dataclass(frozen=True)
class PairRecord:
    i: str
    j: str
    ged: int
    nged: float
    sim: float
    split: str


@dataclass
class Dataset:
    alphabet: tuple[str, ...]
    graphs: list[Graph]
    pairs: list[PairRecord]
    _by_id: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._by_id = {g.id: g for g in self.graphs}

    def graph(self, gid: str) -> Graph:
        return self._by_id[gid]

    def split_pairs(self, split: str) -> list[PairRecord]:
        return [p for p in self.pairs if p.split == split]

    def validate(self) -> list[str]:
        violations = []
        if len(self._by_id) != len(self.graphs):
            violations.append("duplicate graph ids")
        for g in self.graphs:
            for v in validate(g):
                violations.append(f"graph {g.id!r}: {v}")
            if g.labels and max(g.labels) >= len(self.alphabet):
                violations.append(f"graph {g.id!r}: label outside alphabet")
        for idx, p in enumerate(self.pairs):
            if p.i not in self._by_id or p.j not in self._by_id:
                violations.append(f"pair {idx}: unknown graph id")
                continue
            if p.split not in SPLITS:
                violations.append(f"pair {idx}: unknown split {p.split!r}")
            ni, nj = self._by_id[p.i].n, self._by_id[p.j].n
            want_nged = p.ged / ((ni + nj) / 2)
            if abs(p.nged - want_nged) > _LABEL_TOL:
                violations.append(f"pair {idx}: nged inconsistent with ged")
            if abs(p.sim - math.exp(-p.nged)) > _LABEL_TOL:
                violations.append(f"pair {idx}: sim != exp(-nged)")
        return violations


class DatasetFormatError(ValueError):
    pass


def _format_float(x: float) -> float:
    # 17 significant digits round-trip IEEE doubles exactly
    return json.loads(format(x, ".17g"))


def dataset_to_json(ds: Dataset) -> dict:
    return {
        "version": SCHEMA_VERSION,
        "alphabet": list(ds.alphabet),
        "graphs": [
            {
                "id": g.id,
                "labels": list(g.labels),
                "edges": [[u, v] for u, v in sorted(g.edges)],
            }
            for g in ds.graphs
        ],
        "pairs": [
            {
                "i": p.i,
                "j": p.j,
                "ged": p.ged,
                "nged": _format_float(p.nged),
                "sim": _format_float(p.sim),
                "split": p.split,
            }
            for p in ds.pairs
        ],
    }


def dataset_from_json(doc: dict) -> Dataset:
    if not isinstance(doc, dict):
        raise DatasetFormatError("top-level document must be an object")
    version = doc.get("version")
    if version != SCHEMA_VERSION:
        raise DatasetFormatError(
            f"unknown schema version {version!r}; expected {SCHEMA_VERSION!r}"
        )
    for key in ("alphabet", "graphs", "pairs"):
        if key not in doc:
            raise DatasetFormatError(f"missing field {key!r}")
    graphs = []
    for idx, rec in enumerate(doc["graphs"]):
        try:
            graphs.append(
                Graph.make(rec["id"], rec["labels"], [tuple(e) for e in rec["edges"]])
            )
        except (KeyError, TypeError) as exc:
            raise DatasetFormatError(f"graph {idx}: malformed record ({exc})")
    pairs = []
    for idx, rec in enumerate(doc["pairs"]):
        try:
            pairs.append(
                PairRecord(
                    i=rec["i"],
                    j=rec["j"],
                    ged=int(rec["ged"]),
                    nged=float(rec["nged"]),
                    sim=float(rec["sim"]),
                    split=rec["split"],
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetFormatError(f"pair {idx}: malformed record ({exc})")
    ds = Dataset(tuple(doc["alphabet"]), graphs, pairs)
    violations = ds.validate()
    if violations:
        raise DatasetFormatError("invariant violations: " + "; ".join(violations))
    return ds


def write_dataset(ds: Dataset, path) -> None:
    violations = ds.validate()
    if violations:
        raise DatasetFormatError("refusing to write: " + "; ".join(violations))
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dataset_to_json(ds), fh, indent=1)
        fh.write("\n")


def read_dataset(path) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"{path}: line {exc.lineno}: {exc.msg}")
    return dataset_from_json(doc)
