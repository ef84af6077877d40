"""JSON input/output for every object the command line handles."""
from __future__ import annotations

import csv
import io as _io
import json
import os
import tempfile

import numpy as np

from .errors import ParseError, RoumieuError
from .family import RSequence
from .matrices import DEFAULT_NMAX, WeightMatrix
from .seminorms import DerivativeBoundProfile
from .sequences import PARAMETRIC_KINDS, WeightSequence
from .weights import WeightFunctionOmega, matrix_from_omega

OMEGA_KINDS = ("power", "logpower")


def _field(d: dict, key: str, where: str):
    if not isinstance(d, dict):
        raise ParseError(f"{where}: expected an object", where)
    if key not in d:
        raise ParseError(f"{where}: missing field {key!r}", f"{where}.{key}")
    return d[key]


def _numbers(value, where: str) -> list[float]:
    if not isinstance(value, list) or not value:
        raise ParseError(f"{where}: expected a non-empty list of numbers", where)
    try:
        return [float(v) for v in value]
    except (TypeError, ValueError):
        raise ParseError(f"{where}: entries must be numbers", where) from None


def _wrap(where: str, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except ParseError:
        raise
    except (RoumieuError, TypeError, ValueError) as exc:
        raise ParseError(f"{where}: {exc}", where) from None


def sequence_from_dict(d: dict, where: str = "sequence") -> WeightSequence:
    if not isinstance(d, dict):
        raise ParseError(f"{where}: expected an object", where)
    if "values" in d:
        return _wrap(f"{where}.values", WeightSequence.tabulated,
                     _numbers(d["values"], f"{where}.values"))
    if "log_values" in d:
        return _wrap(f"{where}.log_values", WeightSequence.from_logs,
                     _numbers(d["log_values"], f"{where}.log_values"))
    kind = _field(d, "kind", where)
    if kind not in PARAMETRIC_KINDS:
        raise ParseError(f"{where}.kind: unknown sequence kind {kind!r}", f"{where}.kind")
    params = d.get("params", {k: v for k, v in d.items() if k != "kind"})
    if not isinstance(params, dict):
        raise ParseError(f"{where}.params: expected an object", f"{where}.params")
    return _wrap(f"{where}.params", WeightSequence, kind, params)


def omega_from_dict(d: dict, where: str = "omega") -> WeightFunctionOmega:
    kind = _field(d, "kind", where)
    if kind == "tabulated":
        t = _numbers(_field(d, "t", where), f"{where}.t")
        v = _numbers(_field(d, "values", where), f"{where}.values")
        return _wrap(where, WeightFunctionOmega.tabulated, t, v)
    if kind not in OMEGA_KINDS:
        raise ParseError(f"{where}.kind: unknown weight function kind {kind!r}", f"{where}.kind")
    params = d.get("params", {k: v for k, v in d.items() if k != "kind"})
    return _wrap(f"{where}.params", WeightFunctionOmega, kind, params)


def matrix_from_dict(d: dict, where: str = "matrix", pmax: int = 200,
                     nmax: int | None = None) -> WeightMatrix:
    """``nmax`` overrides the file's value for generated (non-explicit) matrices."""
    prov = _field(d, "provenance", where)
    if nmax is None:
        nmax = d.get("nmax", DEFAULT_NMAX)
    if not isinstance(nmax, int) or nmax < 0:
        raise ParseError(f"{where}.nmax: expected a non-negative integer", f"{where}.nmax")
    if prov == "explicit":
        rows = _field(d, "rows", where)
        if not isinstance(rows, list) or not rows:
            raise ParseError(f"{where}.rows: expected a non-empty list", f"{where}.rows")
        return WeightMatrix.explicit(
            [sequence_from_dict(r, f"{where}.rows[{i}]") for i, r in enumerate(rows)])
    if prov in ("constant", "scaled"):
        base = sequence_from_dict(_field(d, "base", where), f"{where}.base")
        return WeightMatrix(prov, base=base, nmax=nmax)
    if prov == "from-omega":
        om = omega_from_dict(_field(d, "omega", where), f"{where}.omega")
        return _wrap(where, matrix_from_omega, om, max(nmax, 1), pmax)
    raise ParseError(f"{where}.provenance: unknown provenance {prov!r}", f"{where}.provenance")


def r_from_dict(d: dict, where: str = "r") -> RSequence:
    if "r" in d:
        return _wrap(f"{where}.r", RSequence.tabulated, _numbers(d["r"], f"{where}.r"))
    kind = _field(d, "kind", where)
    if kind == "power":
        return _wrap(f"{where}.gamma", RSequence.power, _field(d, "gamma", where))
    if kind == "geometric":
        return _wrap(f"{where}.base", RSequence.geometric, _field(d, "base", where))
    raise ParseError(f"{where}.kind: unknown r kind {kind!r}", f"{where}.kind")


def profile_from_dict(d: dict, where: str = "profile") -> DerivativeBoundProfile:
    name = d.get("name", "profile")
    prov = d.get("provenance", {"kind": "synthetic"})
    if isinstance(prov, str):
        prov = {"kind": prov}
    if "a" in d:
        seq = _wrap(f"{where}.a", WeightSequence.tabulated, _numbers(d["a"], f"{where}.a"))
    elif "a_log" in d:
        seq = _wrap(f"{where}.a_log", WeightSequence.from_logs,
                    _numbers(d["a_log"], f"{where}.a_log"))
    elif "family" in d:
        seq = sequence_from_dict(d["family"], f"{where}.family")
    else:
        raise ParseError(f"{where}: needs one of 'a', 'a_log' or 'family'", f"{where}.a")
    return DerivativeBoundProfile(str(name), seq, prov)


def detect_type(d) -> str:
    """Classify a parsed JSON object by its keys."""
    if not isinstance(d, dict):
        raise ParseError("top level: expected a JSON object", "top level")
    if "provenance" in d and any(k in d for k in ("rows", "base", "omega")):
        return "matrix"
    if any(k in d for k in ("a", "a_log", "family")):
        return "profile"
    if "r" in d or d.get("kind") == "geometric" or "gamma" in d:
        return "r"
    kind = d.get("kind")
    if kind in OMEGA_KINDS or (kind == "tabulated" and "t" in d):
        return "omega"
    return "sequence"


_READERS = {"sequence": sequence_from_dict, "matrix": matrix_from_dict,
            "omega": omega_from_dict, "r": r_from_dict, "profile": profile_from_dict}


def read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}", "file") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}",
                         "json") from None


def load(path: str, expect: str | tuple[str, ...] | None = None, **kw):
    """Load ``path`` and return ``(type, object)``."""
    d = read_json(path)
    kind = detect_type(d)
    if expect is not None:
        allowed = (expect,) if isinstance(expect, str) else expect
        if kind not in allowed:
            raise ParseError(f"{path}: expected {' or '.join(allowed)}, found {kind}", "type")
    reader = _READERS[kind]
    obj = reader(d, **kw) if kind == "matrix" else reader(d)
    return kind, obj


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def csv_text(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def write_atomic(path: str, data: str | bytes) -> None:
    """Write via a temporary file in the same directory and rename into place."""
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
