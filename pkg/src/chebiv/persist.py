"""Versioned text format for built models.

Layout: a magic line ``CHEB-IV v1``, one JSON document, and a closing
``END`` line.  Every float is stored as ``float.hex`` so a round trip is
bit-exact; a missing ``END`` line marks a truncated file.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .builder import PRESETS, AccuracyPreset, SurfaceModel
from .cheb import Cheb1D, LowRank2D
from .domain import Area, BoundaryCurves
from .errors import ModelFormatError, ModelVersionError
from .laplace import LaplaceSurface

MAGIC = "CHEB-IV"
VERSION = "v1"
END = "END"


def _hex(a) -> list[str] | str:
    if np.ndim(a) == 0:
        return float(a).hex()
    return [float(v).hex() for v in np.asarray(a, dtype=float).ravel()]


def _unhex(s, field: str):
    try:
        if isinstance(s, str):
            return float.fromhex(s)
        return np.array([float.fromhex(v) for v in s], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"field {field!r}: bad float encoding ({exc})") from None


def _cheb_to_dict(p: Cheb1D) -> dict:
    return {"interval": _hex(p.interval), "coeffs": _hex(p.coeffs)}


def _cheb_from_dict(d: dict, field: str) -> Cheb1D:
    return Cheb1D(_unhex(d["coeffs"], field), tuple(_unhex(d["interval"], field)))


def _lowrank_to_dict(m: LowRank2D) -> dict:
    return {
        "rank": m.rank,
        "weights": _hex(m.weights),
        "first_interval": _hex(m.first_interval),
        "second_interval": _hex(m.second_interval),
        "rows": [_cheb_to_dict(p) for p in m.row_interps],
        "cols": [_cheb_to_dict(p) for p in m.col_interps],
        "residual": _hex(m.info.get("residual", 0.0)),
        "grid": list(m.info.get("grid", [])),
    }


def _lowrank_from_dict(d: dict, field: str) -> LowRank2D:
    w = _unhex(d["weights"], f"{field}.weights")
    if w.size != d["rank"] or len(d["rows"]) != d["rank"] or len(d["cols"]) != d["rank"]:
        raise ModelFormatError(f"field {field!r}: rank {d['rank']} does not match stored slices")
    rows = [_cheb_from_dict(p, f"{field}.rows[{i}]") for i, p in enumerate(d["rows"])]
    cols = [_cheb_from_dict(p, f"{field}.cols[{i}]") for i, p in enumerate(d["cols"])]
    info = {"residual": _unhex(d["residual"], f"{field}.residual"), "grid": d.get("grid", [])}
    return LowRank2D(w, rows, cols, tuple(_unhex(d["first_interval"], field)),
                     tuple(_unhex(d["second_interval"], field)), info)


def _json_safe(meta: dict) -> dict:
    return json.loads(json.dumps(meta, default=float))


def model_to_dict(model: SurfaceModel | LaplaceSurface) -> dict:
    if isinstance(model, LaplaceSurface):
        return {
            "kind": "laplace",
            "x_range": _hex(model.x_range),
            "v_range": _hex(model.v_range),
            "interp": _lowrank_to_dict(model.interp),
            "meta": _json_safe(model.meta),
        }
    curves = {k: (v.hex() if isinstance(v, float) else v) for k, v in asdict(model.curves).items()}
    return {
        "kind": "black-scholes",
        "preset": {"name": model.preset.name, "tol": _hex(model.preset.tol)},
        "delta": _hex(model.delta),
        "curves": curves,
        "areas": {a.value: _lowrank_to_dict(m) for a, m in model.areas.items()},
        "boundaries": {k: _cheb_to_dict(p) for k, p in model.boundaries.items()},
        "meta": _json_safe(model.meta),
    }


def model_from_dict(d: dict) -> SurfaceModel | LaplaceSurface:
    try:
        kind = d["kind"]
        if kind == "laplace":
            return LaplaceSurface(_lowrank_from_dict(d["interp"], "interp"),
                                  tuple(_unhex(d["x_range"], "x_range")),
                                  tuple(_unhex(d["v_range"], "v_range")), d.get("meta", {}))
        if kind != "black-scholes":
            raise ModelFormatError(f"field 'kind': unknown model kind {kind!r}")
        p = d["preset"]
        preset = AccuracyPreset(p["name"], _unhex(p["tol"], "preset.tol"))
        if p["name"] in PRESETS and PRESETS[p["name"]] == preset:
            preset = PRESETS[p["name"]]
        curves = BoundaryCurves(**{k: (_unhex(v, f"curves.{k}") if isinstance(v, str) else v)
                                   for k, v in d["curves"].items()})
        areas = {Area(k): _lowrank_from_dict(v, f"areas.{k}") for k, v in d["areas"].items()}
        boundaries = {k: _cheb_from_dict(v, f"boundaries.{k}") for k, v in d["boundaries"].items()}
        return SurfaceModel(preset, areas, boundaries, curves, d.get("meta", {}))
    except KeyError as exc:
        raise ModelFormatError(f"missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelFormatError):
            raise
        raise ModelFormatError(f"malformed model: {exc}") from None


def dumps(model) -> str:
    body = json.dumps(model_to_dict(model), indent=1, sort_keys=True)
    return f"{MAGIC} {VERSION}\n{body}\n{END}\n"


def loads(text: str):
    lines = text.split("\n", 1)
    head = lines[0].strip()
    parts = head.split()
    if len(parts) != 2 or parts[0] != MAGIC:
        raise ModelFormatError(f"line 1: expected magic '{MAGIC} {VERSION}', found {head[:40]!r}")
    if parts[1] != VERSION:
        raise ModelVersionError(f"unsupported model format version: expected {VERSION}, found {parts[1]}")
    rest = lines[1] if len(lines) > 1 else ""
    body, sep, tail = rest.rstrip("\n").rpartition("\n")
    if not sep or tail.strip() != END:
        raise ModelFormatError("truncated model file: missing END line")
    try:
        d = json.loads(body)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"line {exc.lineno + 1}: invalid JSON ({exc.msg})") from None
    return model_from_dict(d)


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write via a temporary file in the target directory and rename into place."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_model(model, path) -> None:
    atomic_write_text(path, dumps(model))


def load_model(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ModelFormatError(f"{path}: not a text model file ({exc.reason})") from None
    return loads(text)
