"""JSON-ready serialisation of reports and the schemas they validate against.

Rationals are written as ``"p/q"`` strings so reports stay exact and
bit-identical between runs.
"""
from __future__ import annotations

import json

from .korn import KornReport, PwField
from .rational import q_str
from .sharpness import SharpnessReport

_RATIONAL = {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}

DESCRIPTOR_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "element descriptor",
    "type": "object",
    "required": ["name", "dimension", "base_space", "enrichment", "dof_set_id", "dofs", "korn_expected"],
    "properties": {
        "name": {"type": "string"},
        "dimension": {"enum": [2, 3]},
        "base_space": {"type": "string"},
        "enrichment": {"type": "string"},
        "dof_set_id": {"type": "string"},
        "dofs": {"type": "array", "items": {
            "type": "object",
            "required": ["selector", "weight_space", "domain"],
            "properties": {
                "selector": {"enum": ["normal", "tangential2d", "cross_normal3d", "full_vector", "interior"]},
                "weight_space": {"type": "string"},
                "domain": {"enum": ["each_face", "cell"]},
            },
        }},
        "korn_expected": {"type": "boolean"},
        "table": {"type": ["string", "null"]},
        "row": {"type": ["integer", "null"]},
        "label": {"type": "string"},
    },
    "additionalProperties": False,
}

LISTING_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["elements"],
    "properties": {"elements": {"type": "array", "items": DESCRIPTOR_SCHEMA}},
}

KORN_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "Korn report",
    "type": "object",
    "required": ["element", "test", "verdict", "kernel_dim", "expected", "residuals"],
    "properties": {
        "element": {"type": "string"},
        "test": {"enum": ["kernel", "dof_coverage"]},
        "verdict": {"enum": ["holds", "fails"]},
        "kernel_dim": {"type": "integer", "minimum": 0},
        "expected": {"type": "integer", "minimum": 0},
        "witness": {"type": "array", "items": {"type": "array", "items": {"type": "string"}}},
        "witness_h1_sq": _RATIONAL,
        "residuals": {"type": "object"},
        "settings": {"type": "object"},
        "expected_verdict": {"enum": ["holds", "fails"]},
        "matches_expected": {"type": "boolean"},
    },
}

SHARPNESS_REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "sharpness report",
    "type": "object",
    "required": ["case", "dimension", "violated", "coefficients", "residuals", "strain_norm_sq",
                 "h1_seminorm_sq", "phi_moments", "checks", "passed"],
    "properties": {
        "case": {"type": "string", "pattern": "^[EF][1-6]$"},
        "dimension": {"enum": [2, 3]},
        "violated": {"type": "string"},
        "coefficients": {"type": "object", "additionalProperties": _RATIONAL},
        "residuals": {"type": "object", "additionalProperties": _RATIONAL},
        "strain_norm_sq": _RATIONAL,
        "h1_seminorm_sq": _RATIONAL,
        "phi_moments": {"type": "array", "items": _RATIONAL},
        "checks": {"type": "object", "additionalProperties": {"type": "boolean"}},
        "generic_check": {"type": "boolean"},
        "passed": {"type": "boolean"},
        "printed_recipe": {"type": "object"},
        "notes": {"type": "string"},
    },
}

TABLE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "table reproduction",
    "type": "object",
    "required": ["tables", "all_match"],
    "properties": {
        "all_match": {"type": "boolean"},
        "tables": {"type": "array", "items": {
            "type": "object",
            "required": ["table", "rows", "korn_column", "printed_column", "match"],
            "properties": {
                "table": {"type": "string"},
                "korn_column": {"type": "array", "items": {"enum": ["Yes", "No"]}},
                "printed_column": {"type": "array", "items": {"enum": ["Yes", "No"]}},
                "match": {"type": "boolean"},
                "rows": {"type": "array", "items": {
                    "type": "object",
                    "required": ["element", "row", "korn", "printed", "match", "unisolvent"],
                    "properties": {
                        "element": {"type": "string"},
                        "row": {"type": "integer"},
                        "korn": {"enum": ["Yes", "No"]},
                        "printed": {"enum": ["Yes", "No"]},
                        "match": {"type": "boolean"},
                        "unisolvent": {"type": "boolean"},
                        "determinant": _RATIONAL,
                        "kernel_dim": {"type": "integer"},
                        "expected": {"type": "integer"},
                        "witness": {"type": "array"},
                        "residuals": {"type": "object"},
                    },
                }},
            },
        }},
    },
}

SCHEMAS = {
    "descriptor": DESCRIPTOR_SCHEMA,
    "listing": LISTING_SCHEMA,
    "korn": KORN_REPORT_SCHEMA,
    "sharpness": SHARPNESS_REPORT_SCHEMA,
    "tables": TABLE_SCHEMA,
}


def _exact(value):
    """Recursively turn rationals into strings."""
    if isinstance(value, dict):
        return {str(k): _exact(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_exact(v) for v in value]
    if isinstance(value, (bool, str, type(None))):
        return value
    if isinstance(value, int):
        return value
    return q_str(value)


def field_text(u: PwField) -> list[list[str]]:
    return [[c.to_text() for c in v.comps] for v in u.fields]


def korn_report_dict(rep: KornReport) -> dict:
    out = {
        "element": rep.element,
        "test": rep.test,
        "verdict": rep.verdict,
        "kernel_dim": rep.kernel_dim,
        "expected": rep.expected_kernel_dim,
        "residuals": _exact(rep.residuals),
        "settings": _exact(rep.settings),
    }
    if rep.witness is not None:
        out["witness"] = field_text(rep.witness)
    if rep.witness_h1_sq is not None:
        out["witness_h1_sq"] = q_str(rep.witness_h1_sq)
    return out


def sharpness_report_dict(rep: SharpnessReport) -> dict:
    return {
        "case": rep.case,
        "dimension": rep.dimension,
        "violated": rep.violated,
        "coefficients": _exact(rep.coefficients),
        "residuals": _exact(rep.residuals),
        "strain_norm_sq": q_str(rep.strain_norm_sq),
        "h1_seminorm_sq": q_str(rep.h1_seminorm_sq),
        "phi_moments": [q_str(b) for b in rep.phi_moments],
        "checks": dict(rep.checks),
        "generic_check": rep.generic_check,
        "passed": rep.passed,
        "printed_recipe": _exact(rep.printed_recipe),
        "notes": rep.notes,
    }


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def validate(obj: dict, kind: str) -> None:
    """Raise ``jsonschema.ValidationError`` if ``obj`` does not match the named schema."""
    import jsonschema

    jsonschema.validate(obj, SCHEMAS[kind])
