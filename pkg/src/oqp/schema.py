"""JSON layout of CLI output and its validator.

Every document looks like ``{"command": ..., "records": [{"inputs": ...,
"result": ...}, ...]}``. Non-finite floats are written as the strings
``"inf"``, ``"-inf"`` and ``"nan"`` so that the files stay strict JSON.
"""

from __future__ import annotations

import json
import math

import jsonschema

from .optimizer import OptimizationResult, Relaxed, TRow
from .queue_sim import SimReport

_NUM = {"oneOf": [{"type": "number"}, {"enum": ["inf", "-inf", "nan"]}]}
_OPT_NUM = {"oneOf": [_NUM, {"type": "null"}]}
_OPT_INT = {"type": ["integer", "null"]}

_TROW = {
    "type": "object",
    "required": ["T", "r_star_of_T", "gamma_I", "d_ch", "bracket", "v"],
    "additionalProperties": False,
    "properties": {
        "T": {"type": "integer"},
        "r_star_of_T": _NUM,
        "gamma_I": _NUM,
        "d_ch": _NUM,
        "bracket": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
        "v": _OPT_INT,
    },
}

_RELAXED = {
    "type": "object",
    "required": ["d_ir", "r_ir", "t_ir", "v_ir"],
    "additionalProperties": False,
    "properties": {"d_ir": _NUM, "r_ir": _NUM, "t_ir": _NUM, "v_ir": _OPT_NUM},
}

_OPTIMIZE = {
    "type": "object",
    "required": ["regime", "d_star", "r_star", "t_star", "v_star", "per_t_table",
                 "relaxed", "case_bound", "exact_I"],
    "additionalProperties": False,
    "properties": {
        "regime": {"type": "string"},
        "d_star": _OPT_NUM,
        "r_star": _OPT_NUM,
        "t_star": _OPT_INT,
        "v_star": _OPT_INT,
        "per_t_table": {"type": "array", "items": _TROW},
        "relaxed": {"oneOf": [_RELAXED, {"type": "null"}]},
        "case_bound": _OPT_NUM,
        "exact_I": {"type": "boolean"},
    },
}

_SIMULATE = {
    "type": "object",
    "required": ["p_delay_hat", "ci95_half_width", "empirical_exponent",
                 "predicted_exponent", "per_phase_violation", "slots_observed"],
    "additionalProperties": False,
    "properties": {
        "p_delay_hat": {"type": "number", "minimum": 0, "maximum": 1},
        "ci95_half_width": _NUM,
        "empirical_exponent": _NUM,
        "predicted_exponent": _OPT_NUM,
        "per_phase_violation": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "slots_observed": {"type": "integer", "minimum": 0},
        "p_delay_random_bit": _OPT_NUM,
    },
}

_SCALARS = {"type": "object", "additionalProperties": _NUM}

RESULT_SCHEMAS = {
    "rate": _SCALARS,
    "optimize": _OPTIMIZE,
    "classify": _OPTIMIZE,
    "simulate": _SIMULATE,
    "oracle": _SCALARS,
}

DOCUMENT_SCHEMA = {
    "type": "object",
    "required": ["command", "records"],
    "additionalProperties": False,
    "properties": {
        "command": {"enum": sorted(RESULT_SCHEMAS)},
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["inputs", "result"],
                "additionalProperties": False,
                "properties": {"inputs": {"type": "object"}, "result": {"type": "object"}},
            },
        },
    },
}


def _encode(value):
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {k: _encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    return value


def _decode(value):
    if isinstance(value, str) and value in ("inf", "-inf", "nan"):
        return float(value)
    if isinstance(value, dict):
        return {k: _decode(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_decode(v) for v in value]
    return value


def _as_dict(result):
    return result if isinstance(result, dict) else result.to_dict()


def dumps(command: str, records) -> str:
    """Serialize ``(inputs, result)`` pairs; the output is validated first."""
    doc = {
        "command": command,
        "records": [{"inputs": _encode(inp), "result": _encode(_as_dict(res))} for inp, res in records],
    }
    validate(doc)
    return json.dumps(doc, indent=2, allow_nan=False)


def validate(doc: dict) -> None:
    jsonschema.validate(doc, DOCUMENT_SCHEMA)
    schema = RESULT_SCHEMAS[doc["command"]]
    for rec in doc["records"]:
        jsonschema.validate(rec["result"], schema)


def _optimization_result(d):
    rows = [TRow(row["T"], row["r_star_of_T"], row["gamma_I"], row["d_ch"],
                 tuple(row["bracket"]), row["v"]) for row in d["per_t_table"]]
    relaxed = Relaxed(**d["relaxed"]) if d["relaxed"] is not None else None
    return OptimizationResult(**{**d, "per_t_table": rows, "relaxed": relaxed})


def loads(text: str):
    """Parse and validate a document; returns ``(command, [(inputs, result)])``.

    Results come back as the library's own objects where one exists.
    """
    doc = json.loads(text)
    validate(doc)
    command = doc["command"]
    out = []
    for rec in doc["records"]:
        result = _decode(rec["result"])
        if command in ("optimize", "classify"):
            result = _optimization_result(result)
        elif command == "simulate":
            result = SimReport(**result)
        out.append((_decode(rec["inputs"]), result))
    return command, out
