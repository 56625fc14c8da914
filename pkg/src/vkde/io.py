"""Reading samples and writing CSV/JSON/SVG outputs.

Floats are written with 17 significant digits so every value round-trips
exactly and reruns produce byte-identical files.
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path

import numpy as np

from .errors import DataError
from .estimators import Sample

__all__ = [
    "load_sample",
    "write_sample",
    "format_float",
    "write_csv",
    "read_csv",
    "write_json",
    "write_result",
    "to_jsonable",
]

_SPLIT = re.compile(r"[,\s]+")


def load_sample(path) -> Sample:
    """Read a numeric table: one observation per line, comma or whitespace separated.

    Blank lines and lines starting with ``#`` are skipped. Raises
    :class:`DataError` naming the offending line for non-numeric tokens or a
    ragged column count, and for files without observations.
    """
    path = Path(path)
    rows, width = [], None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            tokens = [tok for tok in _SPLIT.split(text) if tok]
            try:
                row = [float(tok) for tok in tokens]
            except ValueError:
                bad = next(tok for tok in tokens if not _is_float(tok))
                raise DataError(f"{path}:{lineno}: non-numeric token {bad!r}") from None
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataError(f"{path}:{lineno}: expected {width} columns, found {len(row)}")
            rows.append(row)
    if not rows:
        raise DataError(f"{path}: no observations")
    return Sample.from_array(np.array(rows), dim=width)


def _is_float(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def format_float(x) -> str:
    return format(float(x), ".17g")


def write_sample(path, sample) -> Path:
    """Write observations (in input order when a :class:`Sample` is given)."""
    if isinstance(sample, Sample):
        data = np.empty_like(sample.data)
        data[sample.sorted_index] = sample.data
    else:
        data = np.asarray(sample, dtype=float)
        data = data.reshape(-1, 1) if data.ndim == 1 else data
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for row in data:
            fh.write(",".join(format_float(v) for v in row) + "\n")
    return path


def _cell(v) -> str:
    if isinstance(v, (str, np.str_)):
        return str(v)
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format_float(v)


def write_csv(path, columns: dict) -> Path:
    """Write equal-length columns in the given key order."""
    path = Path(path)
    names = list(columns)
    cols = [np.asarray(columns[k]).ravel() for k in names]
    lengths = {c.size for c in cols}
    if len(lengths) > 1:
        raise ValueError(f"columns have different lengths: {sorted(lengths)}")
    try:
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(names) + "\n")
            for row in zip(*cols):
                fh.write(",".join(_cell(v) for v in row) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_csv(path) -> dict:
    """Read a file written by :func:`write_csv`; numeric columns become float arrays."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8").splitlines()
    names = lines[0].split(",")
    raw = [line.split(",") for line in lines[1:]]
    out = {}
    for j, name in enumerate(names):
        col = [r[j] for r in raw]
        try:
            out[name] = np.array([float(v) for v in col])
        except ValueError:
            out[name] = np.array(col)
    return out


def to_jsonable(obj):
    """Convert numpy scalars and arrays (recursively) to plain Python values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    return obj


def write_json(path, obj) -> Path:
    path = Path(path)
    try:
        path.write_text(json.dumps(to_jsonable(obj), indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def write_result(result, outdir, *, svg: bool = False) -> list:
    """Write ``records.csv``, ``summary.json`` and one ``plot_<panel>.csv`` per panel.

    Wall time is left out so reruns are byte-identical.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = [
        write_csv(outdir / "records.csv", result.records),
        write_json(
            outdir / "summary.json",
            {"experiment": result.experiment, "config": result.config, "aggregates": result.aggregates},
        ),
    ]
    for name, panel in result.panels.items():
        cols = {k: panel[k] for k in ("t", "f_true", "kde", "vkde")}
        written.append(write_csv(outdir / f"plot_{name}.csv", cols))
        if svg:
            written.append(_write_svg(outdir / f"plot_{name}.svg", name, cols))
    return written


def _write_svg(path, title, cols) -> Path:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise RuntimeError("SVG output needs matplotlib (pip install artifact[plot])") from exc
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(cols["t"], cols["f_true"], label="true density", color="black")
    ax.plot(cols["t"], cols["kde"], label="KDE", linestyle="--")
    ax.plot(cols["t"], cols["vkde"], label="VKDE", linestyle="-.")
    ax.set_title(title)
    ax.set_xlabel("t")
    ax.legend()
    fig.tight_layout()
    # fixed metadata keeps the file reproducible
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return Path(path)
