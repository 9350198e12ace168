"""JSON spec documents: one file describing algebra, split, metric and options.

Layout (indices are 1-based)::

    {
      "description": "optional free text",
      "algebra": {"dim": 3, "labels": ["e1", "e2", "e3"], "brackets": [[1, 2, 3, 1.0]]},
      "split": {"h": [], "m": [1, 2, 3]},
      "metric": {"kind": "exponential", "inner_product": [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
                 "x": [0, 0, 0.5], "b0": 2.0},
      "options": {"seed": 0}
    }

``brackets`` lists ``[i, j, k, c]`` meaning ``[e_i, e_j]`` has ``c`` on
``e_k``; the antisymmetric partner is filled in.  ``x`` is given in full
algebra coordinates and must vanish on ``h``.  ``metric.kind`` is one of
``exponential``, ``infinite_series`` or ``custom`` (the last needs
``"phi"``, a preset name).  Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FinslerError, InputError
from .geodesic import HomogeneousSpace
from .lie import LieAlgebra, ReductiveSplit, check_structure, default_jacobi_tol
from .metric import PHI_PRESETS, Metric, MetricKind
from .oracle import OracleScheme

TOP_KEYS = {"description", "algebra", "split", "metric", "options"}
ALGEBRA_KEYS = {"dim", "labels", "brackets"}
SPLIT_KEYS = {"h", "m"}
METRIC_KEYS = {"kind", "inner_product", "x", "b0", "phi"}
OPTION_KEYS = {"jacobi_tol", "criterion_tol", "seed", "oracle", "oracle_step"}


class SpecError(InputError):
    """A spec document failed to load; the message names the field."""


@dataclass(frozen=True, eq=False)
class SpecDocument:
    algebra: LieAlgebra
    split: ReductiveSplit
    metric: Metric
    options: dict = field(default_factory=dict)
    description: str = ""

    @property
    def space(self) -> HomogeneousSpace:
        return HomogeneousSpace(self.algebra, self.split, self.metric)

    @property
    def jacobi_tol(self) -> float:
        return self.options.get("jacobi_tol", default_jacobi_tol())

    @property
    def criterion_tol(self) -> float | None:
        return self.options.get("criterion_tol")

    @property
    def seed(self) -> int:
        return self.options.get("seed", 0)

    @property
    def scheme(self) -> OracleScheme:
        return OracleScheme(self.options.get("oracle", "dual"), self.options.get("oracle_step"))

    def to_dict(self) -> dict:
        met = self.metric
        metric = {
            "kind": met.kind.value,
            "inner_product": met.inner_product.tolist(),
            "x": self.split.embed(met.x).tolist(),
        }
        if math.isfinite(met.b0):
            metric["b0"] = met.b0
        if met.custom_phi is not None:
            metric["phi"] = met.custom_phi.name
        out = {}
        if self.description:
            out["description"] = self.description
        out["algebra"] = {
            "dim": self.algebra.dim,
            "labels": list(self.algebra.labels),
            "brackets": [list(e) for e in self.algebra.to_sparse()],
        }
        out["split"] = {
            "h": [i + 1 for i in self.split.h_indices],
            "m": [i + 1 for i in self.split.m_indices],
        }
        out["metric"] = metric
        out["options"] = dict(sorted(self.options.items()))
        return out


def _fail(where: str, msg: str):
    raise SpecError(f"{where}: {msg}")


def _keys(obj, allowed: set, required: set, where: str):
    if not isinstance(obj, dict):
        _fail(where, f"expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        _fail(where, f"unknown key(s) {unknown}; allowed: {sorted(allowed)}")
    missing = sorted(required - set(obj))
    if missing:
        _fail(where, f"missing key(s) {missing}")


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(where, f"expected a number, got {v!r}")
    if not math.isfinite(v):
        _fail(where, f"expected a finite number, got {v!r}")
    return float(v)


def _int(v, where: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        _fail(where, f"expected an integer, got {v!r}")
    return v


def _int_list(v, where: str) -> list[int]:
    if not isinstance(v, list):
        _fail(where, f"expected a list, got {type(v).__name__}")
    return [_int(x, f"{where}[{i}]") for i, x in enumerate(v)]


def _vector(v, n: int, where: str) -> list[float]:
    if not isinstance(v, list) or len(v) != n:
        _fail(where, f"expected a list of {n} numbers, got {v!r}")
    return [_number(x, f"{where}[{i}]") for i, x in enumerate(v)]


def _parse_options(obj) -> dict:
    _keys(obj, OPTION_KEYS, set(), "options")
    out = {}
    for key in ("jacobi_tol", "criterion_tol", "oracle_step"):
        if key in obj:
            val = _number(obj[key], f"options.{key}")
            if not val > 0:
                _fail(f"options.{key}", f"must be positive, got {val!r}")
            out[key] = val
    if "seed" in obj:
        seed = _int(obj["seed"], "options.seed")
        if seed < 0:
            _fail("options.seed", f"must be non-negative, got {seed}")
        out["seed"] = seed
    if "oracle" in obj:
        if obj["oracle"] not in ("dual", "central"):
            _fail("options.oracle", f"must be 'dual' or 'central', got {obj['oracle']!r}")
        out["oracle"] = obj["oracle"]
    try:
        OracleScheme(out.get("oracle", "dual"), out.get("oracle_step"))
    except InputError as exc:
        _fail("options.oracle_step", str(exc))
    return out


def _parse_algebra(obj, jacobi_tol: float) -> LieAlgebra:
    _keys(obj, ALGEBRA_KEYS, {"dim", "brackets"}, "algebra")
    dim = _int(obj["dim"], "algebra.dim")
    if dim < 1:
        _fail("algebra.dim", f"must be positive, got {dim}")
    labels = obj.get("labels")
    if labels is not None:
        if not isinstance(labels, list) or not all(isinstance(s, str) for s in labels):
            _fail("algebra.labels", "expected a list of strings")
    entries = obj["brackets"]
    if not isinstance(entries, list):
        _fail("algebra.brackets", "expected a list of [i, j, k, value] entries")
    parsed = []
    for pos, e in enumerate(entries):
        where = f"algebra.brackets[{pos}]"
        if not isinstance(e, list) or len(e) != 4:
            _fail(where, f"expected [i, j, k, value], got {e!r}")
        parsed.append((_int(e[0], where + "[0]"), _int(e[1], where + "[1]"), _int(e[2], where + "[2]"),
                       _number(e[3], where + "[3]")))
    try:
        return LieAlgebra.from_sparse(dim, parsed, labels)
    except FinslerError as exc:
        _fail("algebra", str(exc))


def _parse_split(obj, dim: int) -> ReductiveSplit:
    _keys(obj, SPLIT_KEYS, {"m"}, "split")
    h = _int_list(obj.get("h", []), "split.h")
    m = _int_list(obj["m"], "split.m")
    for name, idx in (("h", h), ("m", m)):
        for i, v in enumerate(idx):
            if not 1 <= v <= dim:
                _fail(f"split.{name}[{i}]", f"index {v} outside 1..{dim}")
    try:
        return ReductiveSplit(tuple(i - 1 for i in h), tuple(i - 1 for i in m))
    except FinslerError as exc:
        _fail("split", str(exc))


def _parse_metric(obj, split: ReductiveSplit) -> Metric:
    _keys(obj, METRIC_KEYS, {"kind", "inner_product", "x"}, "metric")
    try:
        kind = MetricKind(obj["kind"])
    except ValueError:
        _fail("metric.kind", f"must be one of {[k.value for k in MetricKind]}, got {obj['kind']!r}")
    nm = len(split.m_indices)
    rows = obj["inner_product"]
    if not isinstance(rows, list) or len(rows) != nm:
        _fail("metric.inner_product", f"expected {nm} rows (dim m = {nm})")
    a = np.array([_vector(r, nm, f"metric.inner_product[{i}]") for i, r in enumerate(rows)])
    x_full = np.array(_vector(obj["x"], split.dim, "metric.x"))
    for i in split.h_indices:
        if x_full[i] != 0.0:
            _fail(f"metric.x[{i}]", f"X must lie in m but has component {float(x_full[i])!r} on h")
    b0 = math.inf
    if "b0" in obj:
        b0 = _number(obj["b0"], "metric.b0")
    phi = None
    if kind is MetricKind.CUSTOM:
        if "phi" not in obj:
            _fail("metric.phi", f"custom metrics need a phi preset, one of {sorted(PHI_PRESETS)}")
        if obj["phi"] not in PHI_PRESETS:
            _fail("metric.phi", f"unknown preset {obj['phi']!r}; known: {sorted(PHI_PRESETS)}")
        phi = PHI_PRESETS[obj["phi"]]
    elif "phi" in obj:
        _fail("metric.phi", f"only custom metrics take a phi preset, kind is {kind.value!r}")
    try:
        return Metric(kind, a, split.m_coords(x_full), b0, phi)
    except FinslerError as exc:
        _fail("metric", str(exc))


def spec_from_dict(data) -> SpecDocument:
    """Validate a decoded document and build the domain objects."""
    _keys(data, TOP_KEYS, {"algebra", "split", "metric"}, "document")
    desc = data.get("description", "")
    if not isinstance(desc, str):
        _fail("description", "expected a string")
    options = _parse_options(data.get("options", {}))
    jtol = options.get("jacobi_tol", default_jacobi_tol())
    algebra = _parse_algebra(data["algebra"], jtol)
    split = _parse_split(data["split"], algebra.dim)
    report = check_structure(algebra, split, jtol)
    if not report.jacobi_ok:
        _fail("algebra.brackets", f"Jacobi identity fails: max residual {report.jacobi_residual!r} > {jtol!r}")
    if not report.subalgebra_ok:
        _fail("split.h", f"[h, h] is not contained in h: residual {report.subalgebra_residual!r}")
    if not report.reductive_ok:
        _fail("split", f"[h, m] is not contained in m: residual {report.reductive_residual!r}")
    metric = _parse_metric(data["metric"], split)
    return SpecDocument(algebra, split, metric, options, desc)


def parse_spec(path) -> SpecDocument:
    """Load and fully validate a spec document from ``path``."""
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise SpecError(f"{path}: no such file") from None
    except OSError as exc:
        raise SpecError(f"{path}: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return spec_from_dict(data)
    except SpecError as exc:
        raise SpecError(f"{path}: {exc}") from None


def _compact(obj, indent: int = 0) -> str:
    """JSON with numeric lists kept on one line."""
    pad = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}  {json.dumps(k)}: {_compact(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, list) and obj and all(isinstance(r, list) for r in obj):
        rows = [f"{pad}  {json.dumps(r)}" for r in obj]
        return "[\n" + ",\n".join(rows) + "\n" + pad + "]"
    return json.dumps(obj)


def emit_spec(doc: SpecDocument) -> str:
    return _compact(doc.to_dict()) + "\n"


def write_spec(doc: SpecDocument, path) -> None:
    Path(path).write_text(emit_spec(doc))
