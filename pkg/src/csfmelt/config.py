"""JSON run configuration: schema, defaults and validation."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

from .benchmarks import BENCHMARKS, HALF_WIDTH, REFERENCE_POLICIES, RunSpec
from .delta import CASES
from .errors import InvalidInputError
from .evaporation import METHODS
from .materials import TI64, MaterialSet

SCHEMA_VERSION = 1

_SWEEPABLE = ("case", "method", "eps", "n_i")


@dataclass(frozen=True)
class RunConfig:
    benchmark: str
    case: tuple = ("V1",)
    method: tuple = ("IV",)
    eps: tuple = ()
    n_i: tuple = ()
    dt: float = 1e-9
    t_end: float = 1e-5
    steady: bool = False
    materials: dict = field(default_factory=dict)
    out: Optional[str] = None
    workers: int = 1
    reference: str = "paper-exact"
    budget_minutes: Optional[float] = None
    fields: bool = False
    schema_version: int = SCHEMA_VERSION

    @property
    def material(self) -> MaterialSet:
        return TI64.with_overrides(**self.materials) if self.materials else TI64

    @property
    def is_single(self) -> bool:
        return all(len(getattr(self, k)) == 1 for k in _SWEEPABLE)

    def specs(self) -> list:
        from .benchmarks import sweep_specs

        return sweep_specs(self.benchmark, self.case, self.method, self.eps, self.n_i,
                           dt=self.dt, t_end=self.t_end, steady=self.steady, material=self.material)

    def to_document(self) -> dict:
        doc = asdict(self)
        for k in _SWEEPABLE:
            doc[k] = list(doc[k])
        return doc


def _fail(key, constraint):
    raise InvalidInputError(f"config key {key!r}: {constraint}")


def _listify(key, value, kind):
    vals = value if isinstance(value, (list, tuple)) else [value]
    out = []
    for v in vals:
        if kind is int:
            if isinstance(v, bool) or not isinstance(v, int):
                _fail(key, f"expected integer, got {v!r}")
        elif kind is float:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                _fail(key, f"expected number, got {v!r}")
            v = float(v)
        elif not isinstance(v, str):
            _fail(key, f"expected string, got {v!r}")
        out.append(v)
    return tuple(out)


def _positive(key, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
        _fail(key, f"must be a positive finite number, got {v!r}")
    return float(v)


def parse_config(document) -> RunConfig:
    """Validate a JSON document (str, path-free dict or bytes) into a RunConfig."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise InvalidInputError(f"config is not valid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise InvalidInputError("config must be a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(document) - known)
    if unknown:
        raise InvalidInputError(f"unknown config key(s): {', '.join(map(repr, unknown))}")
    doc = dict(document)

    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        _fail("schema_version", f"unsupported version {version!r} (expected {SCHEMA_VERSION})")
    if "benchmark" not in doc:
        _fail("benchmark", "required")
    bench = doc["benchmark"]
    if bench not in BENCHMARKS:
        _fail("benchmark", f"must be one of {{{', '.join(BENCHMARKS)}}}, got {bench!r}")

    case = _listify("case", doc.get("case", "V1"), str)
    for c in case:
        if c not in CASES:
            _fail("case", f"must be one of {{{', '.join(CASES)}}}, got {c!r}")
    method = _listify("method", doc.get("method", "IV"), str)
    for m in method:
        if m not in METHODS:
            _fail("method", f"must be one of {{{', '.join(METHODS)}}}, got {m!r}")
    if "eps" not in doc:
        _fail("eps", "required")
    eps = _listify("eps", doc["eps"], float)
    for e in eps:
        _positive("eps", e)
        if e > HALF_WIDTH / 2:
            _fail("eps", f"must not exceed {HALF_WIDTH / 2} m, got {e!r}")
    n_i = _listify("n_i", doc.get("n_i", 16), int)
    for n in n_i:
        if n < 4:
            _fail("n_i", f"must be an integer >= 4, got {n!r}")

    dt = _positive("dt", doc.get("dt", 1e-9))
    t_end = _positive("t_end", doc.get("t_end", 1e-5))
    if t_end < dt:
        _fail("t_end", "must be at least dt")
    steady = doc.get("steady", False)
    if not isinstance(steady, bool):
        _fail("steady", "must be a boolean")
    if steady and bench != "B1":
        _fail("steady", "only B1 has a steady variant")

    materials = doc.get("materials", {}) or {}
    if not isinstance(materials, dict):
        _fail("materials", "must be an object of MaterialSet overrides")
    mat_fields = {f.name for f in fields(MaterialSet)}
    for k, v in materials.items():
        if k not in mat_fields:
            _fail(f"materials.{k}", "unknown material parameter")
        if k == "c_s":
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v >= 0:
                _fail("materials.c_s", "must be a non-negative number")
        else:
            _positive(f"materials.{k}", v)
    materials = {k: float(v) for k, v in sorted(materials.items())}
    try:
        TI64.with_overrides(**materials)
    except InvalidInputError as exc:
        _fail("materials", str(exc))

    out = doc.get("out")
    if out is not None and not isinstance(out, str):
        _fail("out", "must be a path string")
    workers = doc.get("workers", 1)
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        _fail("workers", f"must be an integer >= 1, got {workers!r}")
    reference = doc.get("reference", "paper-exact")
    if reference not in REFERENCE_POLICIES:
        _fail("reference", f"must be one of {{{', '.join(REFERENCE_POLICIES)}}}, got {reference!r}")
    budget = doc.get("budget_minutes")
    if budget is not None:
        budget = _positive("budget_minutes", budget)
    dump = doc.get("fields", False)
    if not isinstance(dump, bool):
        _fail("fields", "must be a boolean")

    cfg = RunConfig(benchmark=bench, case=case, method=method, eps=eps, n_i=n_i, dt=dt, t_end=t_end,
                    steady=steady, materials=materials, out=out, workers=workers, reference=reference,
                    budget_minutes=budget, fields=dump)
    # constructing the specs validates cross-field constraints early
    cfg.specs()
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
