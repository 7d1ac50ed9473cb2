"""JSON schema validation for run configurations and native case files."""

from __future__ import annotations

import json
import logging
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict

import jsonschema

from lacflow.diagnostics import DiagnosticCollector, add
from lacflow.exceptions import CaseParseError, ConfigFileError

logger = logging.getLogger(__name__)

CONFIG_SCHEMA = "config_schema.json"
CASE_SCHEMA = "case_schema.json"


@lru_cache(maxsize=None)
def load_schema(name: str = CONFIG_SCHEMA) -> Dict[str, Any]:
    """Load a schema bundled with the package.

    Raises:
        ConfigFileError: If the schema file cannot be read or parsed
    """
    schema_path = Path(__file__).parent / name
    try:
        with open(schema_path, encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        logger.error("Schema file not found: %s", schema_path)
        raise ConfigFileError(f"Schema file not found: {schema_path}") from e
    except json.JSONDecodeError as e:
        logger.error("Failed to parse schema JSON: %s", e)
        raise ConfigFileError(f"Schema file is not valid JSON: {schema_path}") from e


def _error_path(error: jsonschema.ValidationError) -> str:
    return ".".join(str(p) for p in error.absolute_path) if error.absolute_path else "root"


def validate_config_schema(config_data: Dict[str, Any], diagnostics: DiagnosticCollector) -> bool:
    """Validate configuration data against the bundled config schema."""
    try:
        jsonschema.validate(instance=config_data, schema=load_schema(CONFIG_SCHEMA))
    except jsonschema.ValidationError as e:
        message = f"Invalid configuration at {_error_path(e)}: {e.message}"
        logger.error("Schema validation failed: %s", message)
        add(diagnostics, "ERROR", "CONFIG_SCHEMA_VALIDATION", message)
        return False
    except jsonschema.SchemaError as e:
        add(diagnostics, "ERROR", "CONFIG_SCHEMA_ERROR", f"Schema error: {e.message}")
        return False
    except ConfigFileError as e:
        add(diagnostics, "ERROR", "CONFIG_READ_FAIL", str(e))
        return False
    logger.debug("Configuration schema validation passed")
    return True


def validate_case_document(document: Any) -> None:
    """Validate a decoded native case document; unknown keys are rejected.

    Raises:
        CaseParseError: naming the offending field path
    """
    try:
        jsonschema.validate(instance=document, schema=load_schema(CASE_SCHEMA))
    except jsonschema.ValidationError as e:
        raise CaseParseError(f"invalid case document: {e.message}", field=_error_path(e)) from e
