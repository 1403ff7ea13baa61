"""JSON Schemas for every JSON document the CLI writes."""

_PARAMS = {
    "type": "object",
    "properties": {"a": {"type": "number"}, "b": {"type": "number"}, "lambda": {"type": "number", "exclusiveMinimum": 0}},
    "required": ["a", "b", "lambda"],
}
_STATE = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2}
_NUM_OR_NULL = {"type": ["number", "null"]}

IRREDUCIBILITY = {
    "type": "object",
    "properties": {
        "verdict": {"enum": ["StronglyIrreducible", "ClassOfOriginIsS", "NotStronglyIrreducible", "UnresolvedClass"]},
        "witness": {"oneOf": [_STATE, {"type": "null"}]},
        "k_star": {"type": ["integer", "null"]},
        "note": {"type": "string"},
    },
    "required": ["verdict", "witness", "k_star"],
}

CLASSIFY = {
    "type": "object",
    "properties": {
        "params": _PARAMS,
        "phase": {"enum": ["Recurrent", "Transient", "Boundary"]},
        "sublabels": {"type": "array", "items": {"enum": ["R1", "R2", "R3", "T1", "T2a", "T2b"]}},
        "theta": _NUM_OR_NULL,
        "irreducibility": IRREDUCIBILITY,
    },
    "required": ["params", "phase", "sublabels", "theta", "irreducibility"],
}

TRAJECTORY = {
    "type": "object",
    "properties": {
        "seed": {"type": "integer"},
        "params": _PARAMS,
        "init": _STATE,
        "status": {"enum": ["completed", "escaped", "overflow"]},
        "status_step": {"type": ["integer", "null"]},
        "counts": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2},
    },
    "required": ["seed", "params", "status", "status_step", "counts"],
}

DRIFT_REPORT = {
    "type": "object",
    "properties": {
        "params": _PARAMS,
        "label": {"enum": ["R1", "R2", "R3"]},
        "fn": {
            "type": "object",
            "properties": {"kind": {"enum": ["LinearR1", "AngularR2", "QuadraticR3"]}},
            "required": ["kind"],
        },
        "epsilon": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "K": {"type": "number", "minimum": 1},
        "drift_set": {"enum": ["A u C", "C"]},
        "A_rule": {"type": "string"},
        "C_size": {"type": "integer", "minimum": 0},
        "C": {"oneOf": [{"type": "array", "items": _STATE}, {"type": "null"}]},
        "box": {"type": "integer", "minimum": 1},
        "boundary_margin": {"type": "number"},
        "conditions": {"type": "object", "additionalProperties": {"type": "boolean"}},
        "sound": {"type": "boolean"},
    },
    "required": ["params", "fn", "epsilon", "K", "C_size", "box", "boundary_margin", "sound"],
}

STATIONARY = {
    "type": "object",
    "properties": {
        "params": _PARAMS,
        "N": {"type": "integer", "minimum": 1},
        "tol": {"type": "number"},
        "residual": {"type": "number", "minimum": 0},
        "leak": {"type": "number"},
        "max_row_defect": {"type": "number", "minimum": 0},
        "iterations": {"type": "integer"},
        "weights": {"type": "array", "items": {"type": "array", "prefixItems": [{"type": "integer"}, {"type": "integer"}, {"type": "number"}]}},
    },
    "required": ["params", "N", "residual", "leak", "iterations"],
}

RATE = {
    "type": "object",
    "properties": {
        "params": _PARAMS,
        "N": {"type": "integer"},
        "horizon": {"type": "integer"},
        "init": _STATE,
        "beta_hat": {"type": "number"},
        "r_squared": {"type": "number"},
        "window": {"type": "array", "items": {"type": "integer"}},
        "tv": {"type": "array", "items": {"type": "number"}},
    },
    "required": ["params", "beta_hat", "r_squared", "window"],
}

TRANSIENCE = {
    "type": "object",
    "properties": {
        "params": _PARAMS,
        "seed": {"type": "integer"},
        "runs": {"type": "integer", "minimum": 1},
        "horizon": {"type": "integer"},
        "escape_level": {"type": "number"},
        "theta": _NUM_OR_NULL,
        "r": _NUM_OR_NULL,
        "eps_t2b": _NUM_OR_NULL,
        "escape_fraction": {"type": "number", "minimum": 0, "maximum": 1},
        "mean_escape_step": _NUM_OR_NULL,
        "per_run": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {
                    "index": {"type": "integer"},
                    "escaped": {"type": "boolean"},
                    "escape_step": {"type": ["integer", "null"]},
                    "growth_rate": _NUM_OR_NULL,
                    "ratio_fraction": _NUM_OR_NULL,
                },
                "required": ["index", "escaped", "escape_step", "growth_rate", "ratio_fraction"],
            },
        },
    },
    "required": ["params", "seed", "runs", "escape_fraction", "mean_escape_step"],
}

PHASE_DIAGRAM = {
    "type": "array",
    "items": {
        "type": "object",
        "properties": {
            "a": {"type": "number"},
            "b": {"type": "number"},
            "phase": {"enum": ["Recurrent", "Transient", "Boundary"]},
            "sublabels": {"type": "array", "items": {"type": "string"}},
            "theta": _NUM_OR_NULL,
        },
        "required": ["a", "b", "phase", "sublabels", "theta"],
    },
}

IRREDUCIBILITY_DOC = {
    "type": "object",
    "properties": {"params": _PARAMS, **IRREDUCIBILITY["properties"]},
    "required": ["params", "verdict", "witness", "k_star"],
}

#: Schema per CLI subcommand (JSON format output).
SCHEMAS = {
    "classify": CLASSIFY,
    "simulate": TRAJECTORY,
    "drift-check": DRIFT_REPORT,
    "stationary": STATIONARY,
    "rate": RATE,
    "transience": TRANSIENCE,
    "irreducibility": IRREDUCIBILITY_DOC,
    "phase-diagram": PHASE_DIAGRAM,
}
