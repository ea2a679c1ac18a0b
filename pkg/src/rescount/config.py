"""Run configuration: a JSON file plus command-line overrides."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

DEFAULT_R_GRID = tuple(float(x) for x in range(50, 401, 25))
DEFAULT_THETA_GRID = tuple(round(0.1 * i, 10) for i in range(1, 16))


class ConfigError(ValueError):
    pass


def parse_complex(text) -> complex:
    if isinstance(text, (int, float, complex)):
        return complex(text)
    if isinstance(text, dict):
        return complex(text.get("re", 0.0), text.get("im", 0.0))
    try:
        return complex(str(text).replace(" ", "").replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex value {text!r}") from exc


def parse_grid(text) -> tuple:
    """Comma list ``50,100,200`` or inclusive range ``start:stop:step``."""
    if isinstance(text, (list, tuple)):
        return tuple(float(x) for x in text)
    text = str(text).strip()
    try:
        if ":" in text:
            start, stop, step = (float(p) for p in text.split(":"))
            if step <= 0:
                raise ConfigError("grid step must be positive")
            n = int(np.floor((stop - start) / step + 1e-9)) + 1
            return tuple(round(start + i * step, 12) for i in range(n))
        return tuple(float(p) for p in text.split(",") if p)
    except ValueError as exc:
        raise ConfigError(f"cannot parse grid {text!r}") from exc


@dataclass(frozen=True)
class RunConfig:
    d: int = 3
    sigma: complex = 1.0 + 0j
    c: float = 1.0
    k0: int = 3
    quad_tol: float = 1e-7
    r_grid: tuple = DEFAULT_R_GRID
    theta_grid: tuple = DEFAULT_THETA_GRID
    cache_dir: str = ".rescount-cache"
    output_dir: str = "out"
    seed: int = 0
    A_plumb: float = 1.0
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.d not in (3, 5, 7):
            raise ConfigError(f"d must be 3, 5 or 7, got {self.d}")
        if not 1e-12 <= self.quad_tol <= 1e-4:
            raise ConfigError("quad_tol must lie in [1e-12, 1e-4]")
        if self.c <= 0:
            raise ConfigError("c must be positive")
        if complex(self.sigma) == 0:
            raise ConfigError("sigma must be nonzero")
        for name in ("r_grid", "theta_grid"):
            g = getattr(self, name)
            if len(g) == 0:
                raise ConfigError(f"{name} is empty")
            if any(b <= a for a, b in zip(g, g[1:])):
                raise ConfigError(f"{name} must be strictly increasing")
        if self.r_grid[0] <= 0:
            raise ConfigError("r_grid must be positive")

    def as_dict(self):
        out = asdict(self)
        out["sigma"] = [complex(self.sigma).real, complex(self.sigma).imag]
        out["r_grid"] = list(self.r_grid)
        out["theta_grid"] = list(self.theta_grid)
        return out

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw = dict(data)
        try:
            if "sigma" in kw:
                s = kw["sigma"]
                kw["sigma"] = complex(*s) if isinstance(s, list) else parse_complex(s)
            for g in ("r_grid", "theta_grid"):
                if g in kw:
                    kw[g] = parse_grid(kw[g])
            for key, typ in (("d", int), ("k0", int), ("seed", int), ("c", float),
                             ("quad_tol", float), ("A_plumb", float)):
                if key in kw:
                    kw[key] = typ(kw[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        return cls(**kw)

    @classmethod
    def load(cls, path=None, **overrides) -> "RunConfig":
        data = {}
        if path is not None:
            try:
                data = json.loads(Path(path).read_text())
            except (OSError, json.JSONDecodeError) as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from exc
            if not isinstance(data, dict):
                raise ConfigError("config file must hold a JSON object")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_mapping(data)

    def with_(self, **kw) -> "RunConfig":
        return replace(self, **kw)
