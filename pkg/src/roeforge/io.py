"""JSON documents for spaces, maps, matrices, involutions and homotopies.

Spaces may be given inline or referenced by a path relative to the referring file.
"""
from __future__ import annotations

import json
from pathlib import Path

from .coarse_maps import PointMap
from .cylinder import CoarseHomotopyData, build_cylinder
from .metric_space import FiniteMetricSpace, _freeze_label
from .report import StructuralError
from .roe_matrix import BlockMatrix, IndexSpace
from .rotation import Involution


class InputError(Exception):
    """A file could not be read as the expected document (CLI exit code 2)."""


def load_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _field(doc, name, path, kind=None):
    if not isinstance(doc, dict):
        raise InputError(f"{path}: expected a JSON object")
    if name not in doc:
        raise InputError(f"{path}: missing field '{name}'")
    value = doc[name]
    if kind is not None and not isinstance(value, kind):
        raise InputError(f"{path}: field '{name}' must be a {kind.__name__ if isinstance(kind, type) else 'value'}")
    return value


def _wrap(path, field_name, fn, *args):
    try:
        return fn(*args)
    except (StructuralError, KeyError, ValueError, TypeError) as exc:
        raise InputError(f"{path}: field '{field_name}': {exc}") from None


def resolve_space(ref, base: Path, field_name: str = "space") -> FiniteMetricSpace:
    if isinstance(ref, dict):
        _field(ref, "labels", f"{base}:{field_name}", list)
        _field(ref, "dist", f"{base}:{field_name}", list)
        return _wrap(base, field_name, FiniteMetricSpace.from_json, ref)
    if isinstance(ref, str):
        return load_space(base.parent / ref if not Path(ref).is_absolute() else Path(ref))
    raise InputError(f"{base}: field '{field_name}' must be a path or an inline space")


def load_space(path) -> FiniteMetricSpace:
    path = Path(path)
    doc = load_json(path)
    _field(doc, "labels", path, list)
    _field(doc, "dist", path, list)
    return _wrap(path, "dist", FiniteMetricSpace.from_json, doc)


def load_map(path, source: FiniteMetricSpace | None = None,
             target: FiniteMetricSpace | None = None) -> PointMap:
    path = Path(path)
    doc = load_json(path)
    values = _field(doc, "values", path, list)
    if source is None:
        source = resolve_space(_field(doc, "source", path), path, "source")
    if target is None:
        target = resolve_space(_field(doc, "target", path), path, "target")
    return _wrap(path, "values", PointMap, source, target, values)


def map_to_json(f: PointMap, source_ref=None, target_ref=None) -> dict:
    return {
        "source": f.source.to_json() if source_ref is None else source_ref,
        "target": f.target.to_json() if target_ref is None else target_ref,
        "values": list(f.values),
    }


def _index_from(ref, base: Path) -> IndexSpace:
    if isinstance(ref, dict) and "outer" in ref:
        outer = resolve_space(ref["outer"], base, "index.outer")
        return IndexSpace(outer, ref.get("inner", ()))
    return IndexSpace(resolve_space(ref, base, "index"))


def load_matrix(path, index: IndexSpace | None = None) -> BlockMatrix:
    path = Path(path)
    doc = load_json(path)
    if index is None:
        index = _index_from(_field(doc, "index", path), path)
    if "blocks" in doc and not isinstance(doc["blocks"], dict):
        raise InputError(f"{path}: field 'blocks' must be an object keyed by 'i,j'")
    return _wrap(path, "blocks", BlockMatrix.from_json, doc, index)


def load_involution(path) -> Involution:
    path = Path(path)
    doc = load_json(path)
    _field(doc, "labels", path, list)
    _field(doc, "sigma", path, list)
    return _wrap(path, "sigma", Involution.from_json, doc)


# homotopy files: H is keyed by "x,n" with x written as in the base labels

def _key_label(x) -> str:
    if isinstance(x, str):
        try:
            json.loads(x)
        except ValueError:
            return x
    return json.dumps(x)


def _parse_key_label(text: str):
    try:
        return _freeze_label(json.loads(text))
    except ValueError:
        return text


def homotopy_to_json(data: CoarseHomotopyData, base_ref=None, target_ref=None) -> dict:
    X = data.cylinder.base
    H = {f"{_key_label(x)},{n}": data.H((x, n)) for x, n in data.cylinder.space.labels}
    return {
        "base": X.to_json() if base_ref is None else base_ref,
        "target": data.target.to_json() if target_ref is None else target_ref,
        "p": list(data.cylinder.p),
        "H": H,
        "f": list(data.f.values),
        "g": list(data.g.values),
    }


def homotopy_from_json(doc: dict, path: Path) -> CoarseHomotopyData:
    X = resolve_space(_field(doc, "base", path), path, "base")
    Y = resolve_space(_field(doc, "target", path), path, "target")
    p = _field(doc, "p", path, list)
    cyl = _wrap(path, "p", build_cylinder, X, p)
    raw = _field(doc, "H", path, dict)
    values = {}
    for key, y in raw.items():
        left, _, right = key.rpartition(",")
        try:
            values[(_parse_key_label(left), int(right))] = _freeze_label(y)
        except ValueError:
            raise InputError(f"{path}: field 'H': key {key!r} is not 'x,n'") from None
    missing = [pt for pt in cyl.space.labels if pt not in values]
    if missing:
        raise InputError(f"{path}: field 'H': no value for cylinder point {missing[0]!r}")
    extra = set(values) - set(cyl.space.labels)
    if extra:
        raise InputError(f"{path}: field 'H': {sorted(extra, key=repr)[0]!r} is not a cylinder point")
    H = _wrap(path, "H", PointMap, cyl.space, Y, [values[pt] for pt in cyl.space.labels])
    data = CoarseHomotopyData.from_H(cyl, H)
    # explicit endpoint maps override the faces so that mismatches get reported
    f = _wrap(path, "f", PointMap, X, Y, doc["f"]) if "f" in doc else data.f
    g = _wrap(path, "g", PointMap, X, Y, doc["g"]) if "g" in doc else data.g
    return CoarseHomotopyData(cyl, H, f, g)


def load_homotopy(path) -> CoarseHomotopyData:
    path = Path(path)
    return homotopy_from_json(load_json(path), path)
