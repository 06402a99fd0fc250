import csv
import io
import json
import logging
import os

from jsonschema import validate, ValidationError

from constants import LOGGER_NAME, REPORT_SCHEMA_VERSION

logger = logging.getLogger(LOGGER_NAME)

_NULLABLE_TEXT = {"type": ["string", "null"]}

VERIFICATION_REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema", "command", "suites", "params", "calibrations", "checks", "passed", "exit_code"],
    "properties": {
        "schema": {"const": REPORT_SCHEMA_VERSION},
        "command": {"const": "verify"},
        "suites": {"type": "array", "items": {"enum": ["exact", "series", "mellin", "matrix"]}},
        "params": {"type": "object", "required": ["q", "beta", "precision_bits"]},
        "calibrations": {
            "type": "array",
            "items": {"type": "object", "required": ["name", "selected", "candidates"]},
        },
        "checks": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "suite", "status"],
                "properties": {
                    "id": {"type": "string", "pattern": "^[ESMX][0-9]{2}$"},
                    "status": {"enum": ["pass", "fail", "error"]},
                    "residual": _NULLABLE_TEXT,
                    "threshold": _NULLABLE_TEXT,
                },
            },
        },
        "passed": {"type": "boolean"},
        "exit_code": {"enum": [0, 1]},
    },
}


class SimpleJSONClient:
    """Deterministic JSON/CSV emission for command results and reports."""

    def with_schema(self, command, payload):
        """Prefix a payload with the schema version and the command name."""
        document = {"schema": REPORT_SCHEMA_VERSION, "command": command}
        document.update(payload)
        return document

    def dumps(self, json_data):
        """Stable text: insertion-ordered keys, two-space indent, trailing newline."""
        return json.dumps(json_data, indent=2, ensure_ascii=False) + "\n"

    def extract_value(self, json_data, key: str):
        """Extract value from JSON using a dotted key; list elements are addressed by index."""
        for part in key.split('.'):
            if isinstance(json_data, dict) and part in json_data:
                json_data = json_data[part]
            elif isinstance(json_data, list) and part.isdigit() and int(part) < len(json_data):
                json_data = json_data[int(part)]
            else:
                raise KeyError(f"Key '{key}' not found.")
        return json_data

    def find_item(self, json_data, condition: dict):
        """First element of a list matching every key/value in the condition."""
        for item in json_data:
            if isinstance(item, dict) and all(item.get(k) == v for k, v in condition.items()):
                return item
        raise KeyError(f"No element matches {condition}")

    def validate_json_schema(self, json_data, schema=VERIFICATION_REPORT_SCHEMA):
        try:
            validate(instance=json_data, schema=schema)
        except ValidationError as e:
            logger.error(f"JSON schema validation error: {e.message}")
            raise ValueError(f"JSON schema validation error: {e.message}")

    def to_csv(self, rows, fieldnames=None):
        """CSV text for a list of flat dicts; column order follows the first row."""
        if not rows:
            return ""
        fieldnames = fieldnames or list(rows[0])
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buffer.getvalue()

    def write_output(self, text, out_path=None):
        """Write to a file when a path is given, else to stdout."""
        if out_path is None:
            print(text, end="")
            return None
        directory = os.path.dirname(os.path.abspath(out_path))
        os.makedirs(directory, exist_ok=True)
        with open(out_path, 'w', encoding='utf-8') as file:
            file.write(text)
        logger.info(f"Output written to {out_path}")
        return out_path
