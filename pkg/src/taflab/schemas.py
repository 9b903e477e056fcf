"""JSON schemas for command-line input files and reports."""

UNIT = {"type": "string", "pattern": r"^[0-9]+:[0-9]+:[0-9]+$"}
UNITS = {"type": "array", "items": UNIT}
THRESHOLDS = {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 1}}}
IDEAL = {"type": "object", "required": ["thresholds"], "properties": {"thresholds": THRESHOLDS}}
TRIBOOL = {
    "type": "object",
    "required": ["status", "evidence"],
    "properties": {
        "status": {"enum": ["out", "in_up_to", "in_certified"]},
        "evidence": {"type": "object"},
    },
}
COMPLEX = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
MATRIX = {"type": "array", "items": {"type": "array", "items": COMPLEX}}

# -- input ---------------------------------------------------------------------

PRESENTATION = {
    "type": "object",
    "oneOf": [
        {
            "required": ["builder"],
            "properties": {
                "builder": {
                    "type": "object",
                    "required": ["kind"],
                    "properties": {
                        "kind": {"enum": ["refinement", "standard", "nest", "example_1_3", "custom"]},
                        "base": {"type": "integer", "minimum": 1},
                        "factor": {"type": "integer", "minimum": 1},
                        "seed": {"type": "integer"},
                        "perms": {"type": "array"},
                    },
                },
                "depth": {"type": "integer", "minimum": 1},
                "stationary_period": {"type": "integer", "minimum": 1},
            },
        },
        {
            "required": ["levels", "images"],
            "properties": {
                "levels": {"type": "array", "minItems": 1,
                           "items": {"type": "array", "items": {"type": "integer", "minimum": 1}}},
                "images": {
                    "type": "object",
                    "propertyNames": {"pattern": "^[0-9]+$"},
                    "additionalProperties": {
                        "type": "object",
                        "propertyNames": UNIT,
                        "additionalProperties": UNITS,
                    },
                },
                "stationary_period": {"type": ["integer", "null"], "minimum": 1},
                "relabeling": {"type": ["array", "null"]},
                "ordered": {"type": "boolean"},
            },
        },
    ],
}

CHAIN = {
    "type": "object",
    "required": ["units"],
    "properties": {
        "start_level": {"type": "integer", "minimum": 1},
        "units": {"type": "array", "minItems": 1, "items": UNIT},
        "include_left": {"type": "boolean"},
        "include_right": {"type": "boolean"},
    },
}

POINT = {
    "oneOf": [
        {"type": "object", "required": ["first"],
         "properties": {"first": {"type": "integer", "minimum": 1},
                        "prefix": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                        "cycle": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 0}}}},
        {"type": "object", "required": ["units"],
         "properties": {"start_level": {"type": "integer", "minimum": 1}, "units": UNITS}},
    ],
}

POINTS = {"type": "object", "required": ["a", "b"], "properties": {"a": POINT, "b": POINT}}

DISTANCE_INPUT = {
    "type": "object",
    "required": ["T"],
    "properties": {
        "T": {"oneOf": [MATRIX, {"type": "array", "items": MATRIX}]},
        "sigma": THRESHOLDS,
        "J": IDEAL,
    },
}

COCYCLE_INPUT = {
    "type": "object",
    "properties": {
        "cocycle": {"oneOf": [{"const": "displacement"},
                              {"type": "object", "required": ["labels"],
                               "properties": {"labels": {"type": "object"}}}]},
        "interval": CHAIN,
    },
}

IDEAL_INPUT = {
    "type": "object",
    "properties": {"ideal": IDEAL, "generators": UNITS},
    "anyOf": [{"required": ["ideal"]}, {"required": ["generators"]}],
}

# -- reports ---------------------------------------------------------------------

TRUNCATION = {
    "type": "object",
    "required": ["level", "depth", "certified_out", "certified_in", "candidate_ideal", "verdicts"],
    "properties": {
        "level": {"type": "integer"},
        "depth": {"type": "integer"},
        "certified_out": UNITS,
        "certified_in": UNITS,
        "candidate_ideal": IDEAL,
        "verdicts": {"type": "object", "additionalProperties": TRIBOOL},
    },
}

REPORTS = {
    "validate": {
        "type": "object",
        "required": ["ok", "failures"],
        "properties": {
            "ok": {"type": "boolean"},
            "failures": {"type": "array", "items": {"type": "object", "required": ["axiom", "witness"]}},
            "levels": {"type": "array"},
            "stationary_period": {"type": ["integer", "null"]},
            "ordered": {"type": "boolean"},
        },
    },
    "ideals": {
        "type": "object",
        "required": ["level", "count"],
        "properties": {"level": {"type": "integer"}, "count": {"type": "integer", "minimum": 1},
                       "ideals": {"type": "array", "items": IDEAL}},
    },
    "mi": {
        "type": "object",
        "required": ["level", "ideal", "meet_irreducible", "minimal_excluded"],
        "properties": {"level": {"type": "integer"}, "ideal": IDEAL, "meet_irreducible": {"type": "boolean"},
                       "minimal_excluded": UNITS},
    },
    "chain": {
        "type": "object",
        "required": ["mi_chain", "condition_c"],
        "properties": {"mi_chain": {"type": "boolean"}, "witness_level": {"type": ["integer", "null"]},
                       "condition_c": {"type": "string"}, "condition_c_detail": TRIBOOL,
                       "truncations": {"type": "array", "items": TRUNCATION}},
    },
    "cmi": {
        "type": "object",
        "required": ["cmi", "cmi_detail"],
        "properties": {"cmi": {"type": "string"}, "cmi_detail": TRIBOOL},
    },
    "interval": {
        "type": "object",
        "required": ["q_set", "truncations"],
        "properties": {"q_set": UNITS, "truncations": {"type": "array", "items": TRUNCATION}},
    },
    "classify": {
        "type": "object",
        "required": ["sigma", "tau", "certainty", "order"],
        "properties": {
            "sigma": {"enum": ["1", "2", "top", "not_MI", "unknown"]},
            "tau": {"enum": ["3", "top", "not_MI", "equals_sigma", "unknown"]},
            "in_P": {"type": ["boolean", "null"]},
            "gap_above_a": {"type": ["boolean", "null"]},
            "gap_below_b": {"type": ["boolean", "null"]},
            "certainty": {"enum": ["certified", "unknown"]},
            "order": {"type": "string"},
            "decomposition": {"type": "object"},
        },
    },
    "nestrep": {
        "type": "object",
        "required": ["basis", "action", "lattice", "nest", "kernel"],
        "properties": {
            "basis": UNITS,
            "action": {"type": "object"},
            "lattice": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
            "nest": {"type": "boolean"},
            "kernel": {"type": "object", "required": ["kernel", "equal"]},
        },
    },
    "distance": {
        "type": "object",
        "required": ["distance", "rectangles"],
        "properties": {
            "distance": {"type": "number", "minimum": 0},
            "rectangles": {"type": "array"},
            "nearest": {"type": "object", "required": ["S", "achieved"],
                        "properties": {"S": {"type": "array", "items": MATRIX}, "achieved": {"type": "number"}}},
            "ideal_check": {"type": "object", "required": ["direct", "mi_sup", "equal"]},
            "trials": {"type": "object", "required": ["count", "worst_gap", "seed"]},
        },
    },
    "mic": {
        "type": "object",
        "required": ["level", "pairs", "classes", "intervals"],
        "properties": {
            "level": {"type": "integer"},
            "pairs": {"type": "integer"},
            "classes": {"type": "integer"},
            "intervals": {"type": "array", "items": {"type": "object",
                                                     "required": ["lower", "upper", "class", "maximal"]}},
        },
    },
    "cocycle": {
        "type": "object",
        "required": ["ok", "failures"],
        "properties": {
            "ok": {"type": "boolean"},
            "failures": {"type": "array"},
            "finiteness": {"type": "object", "required": ["verdict", "running_max", "certified"]},
            "monotone": {"type": "object"},
        },
    },
    "error": {
        "type": "object",
        "required": ["error", "message"],
        "properties": {"error": {"type": "string"}, "message": {"type": "string"},
                       "pointer": {"type": "string"}, "failures": {"type": "array"}},
    },
}
