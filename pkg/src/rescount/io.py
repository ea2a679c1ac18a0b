"""CSV/JSON/SVG output with a versioned header and a metadata comment line."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np


def jsonable(obj):
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.complexfloating):
        return jsonable(complex(obj))
    if isinstance(obj, np.ndarray):
        return [jsonable(x) for x in obj.tolist()]
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, allow_nan=True)


def _fmt(x) -> str:
    if isinstance(x, (str, np.str_)):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (complex, np.complexfloating)):
        return repr(complex(x))
    return repr(float(x))


def write_csv(path, name: str, columns: dict, metadata: dict | None = None) -> Path:
    """Write ``# name v1``, ``# {metadata json}``, a header row and the columns."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    keys = list(columns)
    cols = [np.atleast_1d(np.asarray(columns[k])) for k in keys]
    n = len(cols[0]) if cols else 0
    if any(len(c) != n for c in cols):
        raise ValueError("columns differ in length")
    lines = [f"# {name} v1", "# " + dumps(metadata or {}), ",".join(keys)]
    lines += [",".join(_fmt(c[i]) for c in cols) for i in range(n)]
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path):
    """Return (name, metadata, columns) from a file written by write_csv."""
    lines = Path(path).read_text().splitlines()
    if len(lines) < 3 or not lines[0].startswith("# ") or not lines[0].endswith(" v1"):
        raise ValueError(f"{path}: missing versioned header")
    name = lines[0][2:-3]
    meta = json.loads(lines[1][2:])
    keys = lines[2].split(",")
    rows = [line.split(",") for line in lines[3:] if line]
    columns = {}
    for j, k in enumerate(keys):
        vals = [row[j] for row in rows]
        try:
            columns[k] = np.array([float(v) for v in vals])
        except ValueError:
            try:
                columns[k] = np.array([complex(v) for v in vals])
            except ValueError:
                columns[k] = np.array(vals)
    return name, meta, columns


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj) + "\n")
    return path


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_residual_plot(path, r, residual, title: str = "", fit=None) -> Path:
    """Log-log plot of |residual| against r with an optional fitted power line."""
    plt = _figure()
    fig, ax = plt.subplots(figsize=(5, 4))
    r = np.asarray(r, dtype=float)
    y = np.abs(np.asarray(residual, dtype=float))
    keep = y > 0
    ax.loglog(r[keep], y[keep], "o", ms=3, label="|residual|")
    if fit is not None and fit.amplitude > 0:
        ax.loglog(r, fit.amplitude * r ** fit.exponent, "-", label=f"fit r^{fit.exponent:.3f}")
    ax.set_xlabel("r")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(path)


def save_scatter(path, points, colors, title: str = "") -> Path:
    plt = _figure()
    fig, ax = plt.subplots(figsize=(5, 4))
    pts = np.asarray(points, dtype=complex)
    ax.scatter(pts.real, pts.imag, c=colors, s=2, cmap="coolwarm")
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(path)
