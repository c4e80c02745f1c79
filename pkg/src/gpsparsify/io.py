"""JSON file formats.

Canonical files are what ``dumps_*`` writes: compact separators, fixed key
order, floats in shortest round-trip form (``repr``), one trailing newline.
Loading then storing a canonical file reproduces it byte for byte.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .core import Polytope, VectorSet
from .sparsify import SparseSup


def _dump(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False) + "\n"


def _rows(mat) -> list[list[float]]:
    arr = mat.toarray() if sp.issparse(mat) else np.asarray(mat)
    return [[float(v) for v in row] for row in arr]


def vectorset_to_dict(T: VectorSet) -> dict:
    out = {"dim": T.dim, "points": _rows(T.points)}
    if T.labels is not None:
        out["labels"] = list(T.labels)
    return out


def vectorset_from_dict(d: dict) -> VectorSet:
    pts = np.asarray(d["points"], dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != int(d["dim"]):
        raise ValueError("points do not match dim")
    return VectorSet(pts, d.get("labels"))


def sparsesup_to_dict(s: SparseSup) -> dict:
    return {"dim": s.dim, "support": _rows(s.support.points),
            "shifts": [float(c) for c in s.shifts], "width_used": float(s.width_used),
            "source_indices": [int(i) for i in s.source_indices]}


def sparsesup_from_dict(d: dict) -> SparseSup:
    pts = np.asarray(d["support"], dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != int(d["dim"]):
        raise ValueError("support does not match dim")
    return SparseSup(VectorSet(pts), d["shifts"], float(d["width_used"]), d["source_indices"])


def polytope_to_dict(K: Polytope) -> dict:
    hs = []
    if K.kind == "list":
        hs = [{"normal": row, "offset": float(b)} for row, b in zip(_rows(K.normals), K.offsets)]
    return {"dim": K.dim, "kind": K.kind, "halfspaces": hs}


def polytope_from_dict(d: dict) -> Polytope:
    dim, kind = int(d["dim"]), d.get("kind", "list")
    if kind != "list":
        return Polytope(dim, kind=kind)
    hs = d.get("halfspaces", [])
    if not hs:
        return Polytope(dim, np.zeros((0, dim)), np.zeros(0))
    return Polytope(dim, [h["normal"] for h in hs], [h["offset"] for h in hs])


_KINDS = {
    VectorSet: vectorset_to_dict,
    SparseSup: sparsesup_to_dict,
    Polytope: polytope_to_dict,
}


def dumps(obj) -> str:
    for cls, fn in _KINDS.items():
        if isinstance(obj, cls):
            return _dump(fn(obj))
    if hasattr(obj, "to_dict"):
        return _dump(obj.to_dict())
    raise TypeError(f"no file format for {type(obj).__name__}")


def store(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def load_vectorset(path) -> VectorSet:
    return vectorset_from_dict(load_json(path))


def load_sparsesup(path) -> SparseSup:
    return sparsesup_from_dict(load_json(path))


def load_polytope(path) -> Polytope:
    return polytope_from_dict(load_json(path))


def load_any(path):
    """Dispatch on the keys present in the file."""
    d = load_json(path)
    if "shifts" in d:
        return sparsesup_from_dict(d)
    if "halfspaces" in d or "kind" in d:
        return polytope_from_dict(d)
    if "points" in d:
        return vectorset_from_dict(d)
    raise ValueError(f"{path}: unrecognized file format")
