import logging
import os
from typing import Any, Dict

import yaml
from jsonschema import validate as js_validate, ValidationError

from constants import LOGGER_NAME
from qhurwitz.errors import UsageError

logger = logging.getLogger(LOGGER_NAME)

_RATIONAL = {"type": ["string", "integer"]}

PROFILE_SCHEMA = {
    "type": "object",
    "required": ["numeric"],
    "properties": {
        "numeric": {
            "type": "object",
            "required": ["q", "beta", "precision_bits"],
            "properties": {
                "q": _RATIONAL,
                "beta": _RATIONAL,
                "precision_bits": {"type": "integer", "minimum": 53},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "series_max_terms": {"type": "integer", "minimum": 2},
                "rho_guard": {"type": "integer", "minimum": 0},
            },
        },
        "limits": {
            "type": "object",
            "properties": {
                "n_max_exact": {"type": "integer", "minimum": 0},
                "n_max_numeric": {"type": "integer", "minimum": 0},
                "order_offset": {"type": "integer", "minimum": 0},
                "d_max": {"type": "integer", "minimum": 0},
                "n_brute": {"type": "integer", "minimum": 1},
            },
        },
        "contour": {
            "type": "object",
            "properties": {
                "delta": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 0.5},
                "nodes_per_unit": {"type": "integer", "minimum": 6},
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "shape": {"enum": ["rectangle", "hairpin"]},
            },
        },
        "verification": {"type": "object"},
    },
}

FRAMEWORK_SCHEMA = {
    "type": "object",
    "required": ["framework"],
    "properties": {
        "framework": {
            "type": "object",
            "properties": {
                "parallel_run": {"type": "boolean"},
                "max_parallel_jobs": {"type": "integer", "minimum": 1},
                "log_level": {"enum": ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]},
                "reports_dir": {"type": "string"},
                "schema_version": {"type": "integer"},
            },
        },
        "logging_config": {"type": "object"},
    },
}


class YAMLClient:
    def __init__(self, file_path: str = None):
        """Initialize the YAMLClient."""
        self.file_path = file_path
        self.data = {}

        if self.file_path:
            self.load(file_path)

    def load(self, file_path: str):
        """Load a YAML file into the client."""
        if not os.path.exists(file_path):
            logger.error(f"Configuration file {file_path} not found!")
            raise FileNotFoundError(f"YAML file {file_path} not found.")
        try:
            with open(file_path, 'r') as file:
                self.data = yaml.safe_load(file) or {}
        except yaml.YAMLError as e:
            logger.error(f"Error parsing YAML file {file_path}: {e}")
            raise
        logger.debug(f"Loaded YAML data from {file_path}")

    def get(self, path: str, default: Any = KeyError) -> Any:
        """Retrieve data from the YAML structure using dot notation path."""
        data = self.data
        for key in path.split("."):
            if isinstance(data, dict) and key in data:
                data = data[key]
            elif isinstance(data, list) and key.isdigit():
                data = data[int(key)]
            elif default is KeyError:
                raise KeyError(f"Path '{path}' not found in the data.")
            else:
                return default
        return data

    def validate(self, schema: Dict):
        """Validate the YAML data against a provided schema."""
        try:
            js_validate(instance=self.data, schema=schema)
        except ValidationError as e:
            location = ".".join(str(part) for part in e.absolute_path) or "<root>"
            logger.error(f"Validation error in {self.file_path} at {location}: {e.message}")
            raise UsageError(f"invalid configuration {os.path.basename(self.file_path or '')} at {location}: "
                             f"{e.message}")

