"""JSON model files.

Two layouts are accepted::

    {"n": 3, "alpha": [..], "beta": [..], "gamma": [..]}
    {"schroedinger": {"h": 0.1, "v_re": [..], "v_im": [..], "normalized": false}}

Plain decimal numbers only; NaN and Infinity are rejected.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

from .errors import ValidationError
from .operators import ComplexTridiagonal, build_tridiagonal, discretize_schroedinger

__all__ = ["load_model", "parse_model", "model_to_dict", "dump_model", "format_float", "dumps"]


def _reject_constant(name):
    raise ValidationError(f"non-finite literal {name} is not allowed in model files")


def _number_list(obj, key, where="model"):
    if key not in obj:
        raise ValidationError(f"{where}: missing field '{key}'")
    values = obj[key]
    if not isinstance(values, list):
        raise ValidationError(f"{where}: field '{key}' must be an array")
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ValidationError(f"{where}: field '{key}' must contain finite numbers")
    return [float(v) for v in values]


def parse_model(obj):
    """Build a :class:`ComplexTridiagonal` from decoded JSON."""
    if not isinstance(obj, dict):
        raise ValidationError("model: top level must be an object")
    if "schroedinger" in obj:
        block = obj["schroedinger"]
        if not isinstance(block, dict):
            raise ValidationError("model: field 'schroedinger' must be an object")
        h = block.get("h")
        if isinstance(h, bool) or not isinstance(h, (int, float)):
            raise ValidationError("schroedinger: field 'h' must be a number")
        v_re = _number_list(block, "v_re", "schroedinger")
        v_im = _number_list(block, "v_im", "schroedinger") if "v_im" in block else [0.0] * len(v_re)
        normalized = block.get("normalized", False)
        if not isinstance(normalized, bool):
            raise ValidationError("schroedinger: field 'normalized' must be a boolean")
        try:
            return discretize_schroedinger(v_re, v_im, h, normalized=normalized)
        except ValidationError as exc:
            raise ValidationError(f"schroedinger: {exc}") from None

    alpha = _number_list(obj, "alpha")
    beta = _number_list(obj, "beta")
    gamma = _number_list(obj, "gamma")
    if "n" in obj:
        n = obj["n"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ValidationError("model: field 'n' must be a positive integer")
        if len(beta) != n:
            raise ValidationError(f"model: field 'beta' has {len(beta)} entries, expected n={n}")
        if len(gamma) != n:
            raise ValidationError(f"model: field 'gamma' has {len(gamma)} entries, expected n={n}")
        if len(alpha) != n - 1:
            raise ValidationError(f"model: field 'alpha' has {len(alpha)} entries, expected n-1={n - 1}")
    scaling = obj.get("scaling", "raw")
    energy_scale = obj.get("energy_scale", 1.0)
    if scaling not in ("raw", "normalized"):
        raise ValidationError("model: field 'scaling' must be 'raw' or 'normalized'")
    if isinstance(energy_scale, bool) or not isinstance(energy_scale, (int, float)):
        raise ValidationError("model: field 'energy_scale' must be a number")
    try:
        h = build_tridiagonal(alpha, beta, gamma)
    except ValidationError as exc:
        raise ValidationError(f"model: {exc}") from None
    if scaling != "raw" or energy_scale != 1.0:
        h = ComplexTridiagonal(h.alpha, h.beta, h.gamma, scaling=scaling, energy_scale=float(energy_scale))
    return h


def load_model(path):
    """Read and validate a model file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read model file {path}: {exc.strerror}") from None
    try:
        obj = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON in {path}: {exc.msg} (line {exc.lineno})") from None
    return parse_model(obj)


def model_to_dict(h):
    out = {
        "n": h.n,
        "alpha": [float(v) for v in h.alpha],
        "beta": [float(v) for v in h.beta],
        "gamma": [float(v) for v in h.gamma],
    }
    if h.scaling != "raw" or h.energy_scale != 1.0:
        out["scaling"] = h.scaling
        out["energy_scale"] = float(h.energy_scale)
    return out


def format_float(value):
    """Fixed 17-significant-digit rendering; round-trips any IEEE double."""
    value = float(value)
    if not math.isfinite(value):
        return "null"
    if value == 0:
        return "0"  # folds -0.0 so output is sign-stable
    return format(value, ".17g")


def dumps(obj, indent=2, _level=0):
    """JSON text with insertion-ordered keys and :func:`format_float` numbers."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if hasattr(obj, "item"):
        return dumps(obj.item(), indent, _level)
    return json.dumps(str(obj))


def dump_model(h, path):
    Path(path).write_text(dumps(model_to_dict(h)) + "\n")
