"""Run configuration: defaults, ``key = value`` files and the environment override."""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields, replace

from .errors import InvalidArgument

ENV_VAR = "ROUMIEU_KIT_CONFIG"
FORMATS = ("json", "csv", "text")


@dataclass(frozen=True)
class RunConfig:
    depth: int = 200
    nmax: int = 8
    t_min: float = 1.0
    t_max: float = 1e24
    t_points: int = 4801
    y_max: float = 1600.0
    y_points: int = 3201
    h_grid: tuple[float, ...] = (1.0, 0.5)
    tol_prec: float = 0.1
    tol_conj: float = 1e-6
    threshold: float = 1e6
    format: str = "json"

    def __post_init__(self):
        if self.depth < 8:
            raise InvalidArgument("depth must be at least 8")
        if self.nmax < 1:
            raise InvalidArgument("nmax must be at least 1")
        for name in ("tol_prec", "tol_conj", "threshold", "y_max", "t_min"):
            if not getattr(self, name) > 0:
                raise InvalidArgument(f"{name} must be positive")
        if not self.t_max > self.t_min or self.t_points < 8 or self.y_points < 3:
            raise InvalidArgument("grids need increasing bounds and enough points")
        if not self.h_grid or any(not h > 0 for h in self.h_grid):
            raise InvalidArgument("h_grid must be a non-empty list of positive numbers")
        if self.format not in FORMATS:
            raise InvalidArgument(f"format must be one of {', '.join(FORMATS)}")

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_dict(self) -> dict:
        out = asdict(self)
        out["h_grid"] = list(self.h_grid)
        return out


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(key: str, raw: str):
    kind = _TYPES[key]
    try:
        if kind == "int":
            return int(float(raw)) if float(raw).is_integer() else int(raw)
        if kind == "float":
            return float(raw)
        if key == "h_grid":
            return tuple(float(x) for x in raw.replace("[", "").replace("]", "").split(",")
                         if x.strip())
    except ValueError:
        raise InvalidArgument(f"config field {key!r}: cannot parse {raw!r}") from None
    return raw.strip().strip('"')


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    """Read ``key = value`` lines (``#`` starts a comment) on top of ``base``."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        if "=" not in line:
            raise InvalidArgument(f"config line {lineno}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES:
            raise InvalidArgument(f"config line {lineno}: unknown field {key!r}")
        values[key] = _coerce(key, raw)
    return replace(base or RunConfig(), **values)


def load_config(path: str | None = None) -> RunConfig:
    """Defaults, then the file named by ``ROUMIEU_KIT_CONFIG``, then ``path``."""
    cfg = RunConfig()
    for source in (os.environ.get(ENV_VAR), path):
        if source:
            try:
                with open(source, encoding="utf-8") as fh:
                    cfg = parse_config(fh.read(), cfg)
            except OSError as exc:
                raise InvalidArgument(f"cannot read config {source}: {exc.strerror}") from None
    return cfg
