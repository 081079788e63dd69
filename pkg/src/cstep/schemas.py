"""JSON Schemas for every JSON file or stdout document the CLI produces."""

_num = {"type": "number"}
_opt_num = {"type": ["number", "null"]}
_point = {"type": "array", "items": _num, "minItems": 2, "maxItems": 2}
_points = {"type": "array", "items": _point}

ESTIMATE = {
    "type": "object",
    "required": ["reach_area", "terminal_area", "free_area", "value", "n_free", "n_terminal"],
    "properties": {
        "reach_area": {"type": "number", "minimum": 0},
        "terminal_area": {"type": "number", "minimum": 0},
        "free_area": {"type": "number", "minimum": 0},
        "value": _num,
        "n_free": {"type": "integer", "minimum": 0},
        "n_terminal": {"type": "integer", "minimum": 0},
    },
    "additionalProperties": False,
}

REACHSET = {
    "type": "object",
    "required": ["state", "seed", "estimate", "reach_hull", "terminal_hulls", "free_endpoints",
                 "terminal_points", "terminal_labels"],
    "properties": {
        "state": {"type": "array", "items": _num, "minItems": 4, "maxItems": 4},
        "seed": {"type": "integer"},
        "estimate": ESTIMATE,
        "reach_hull": _points,
        "terminal_hulls": {"type": "array", "items": _points},
        "free_endpoints": _points,
        "terminal_points": _points,
        "terminal_labels": {"type": "array", "items": {"type": "integer", "minimum": -1}},
        "map": {"type": "object"},
    },
    "additionalProperties": False,
}

EMPMAP = {
    "type": "object",
    "required": ["grid_spec", "velocity", "values", "seed", "floor"],
    "properties": {
        "grid_spec": {
            "type": "object",
            "required": ["x", "y"],
            "properties": {"x": {"type": "array", "items": _num, "minItems": 2},
                           "y": {"type": "array", "items": _num, "minItems": 2}},
        },
        "velocity": _point,
        "values": {"type": "array", "items": {"type": "array", "items": _num}},
        "seed": {"type": "integer"},
        "floor": _num,
        "map": {"type": "object"},
    },
    "additionalProperties": False,
}

_rate = {"type": "number", "minimum": 0, "maximum": 1}

EVAL_REPORT = {
    "type": "object",
    "required": ["n_episodes", "success_rate", "collision_rate", "timeout_rate", "avg_clear_time",
                 "avg_clear_time_all", "avg_goal_time", "time_under_threshold", "mean_return",
                 "route_counts"],
    "properties": {
        "n_episodes": {"type": "integer", "minimum": 0},
        "success_rate": _rate,
        "collision_rate": _rate,
        "timeout_rate": _rate,
        "avg_clear_time": _opt_num,
        "avg_clear_time_all": _opt_num,
        "avg_goal_time": _opt_num,
        "time_under_threshold": {
            "type": "object",
            "required": ["0.1", "0.2", "0.3", "0.4", "0.5"],
            "additionalProperties": {"type": "number", "minimum": 0},
        },
        "mean_return": _num,
        "route_counts": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 0}},
    },
    "additionalProperties": False,
}

SNAPSHOT_HEADER = {
    "type": "object",
    "required": ["format", "policy_sizes", "value_sizes", "obs_dim", "act_dim", "low", "high",
                 "input_scale", "config_hash", "seed", "n_params"],
    "properties": {
        "format": {"const": 1},
        "policy_sizes": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2},
        "value_sizes": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2},
        "obs_dim": {"type": "integer", "minimum": 1},
        "act_dim": {"type": "integer", "minimum": 1},
        "low": {"type": "array", "items": _num},
        "high": {"type": "array", "items": _num},
        "input_scale": {"type": "array", "items": _num},
        "config_hash": {"type": "string"},
        "seed": {"type": "integer"},
        "n_params": {"type": "integer", "minimum": 1},
    },
    "additionalProperties": False,
}
