"""
Configuration loader utility
"""

import hashlib
import json
import logging
import os
import re
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import yaml

from kinetics.exceptions import ConfigParseError

logger = logging.getLogger(__name__)

# ${VAR_NAME} or ${VAR_NAME:default}
_ENV_PATTERN = re.compile(r'\$\{([^}:]+)(?::([^}]*))?\}')


def load_yaml(text: str, source: str = "<config>") -> Tuple[Dict[str, Any], Dict[str, int]]:
    """
    Parse a YAML document and remember where every key was written

    Args:
        text: YAML text
        source: name used in log messages

    Returns:
        (mapping, lines) where lines maps dotted keys to 1-based line numbers

    Raises:
        ConfigParseError: malformed YAML, or a top level that is not a mapping
    """
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigParseError("<document>", f"malformed YAML: {getattr(e, 'problem', e)}", line)

    if data is None:
        return {}, {}
    if not isinstance(data, dict):
        line = node.start_mark.line + 1 if node is not None else None
        raise ConfigParseError("<document>", "top level must be a mapping of sections", line)

    lines: Dict[str, int] = {}
    _collect_lines(node, "", lines)
    logger.debug(f"Parsed {source}: {len(lines)} keys")
    return data, lines


def _collect_lines(node: Any, prefix: str, lines: Dict[str, int]):
    """Walk the composed node tree recording the line of each key"""
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key = f"{prefix}.{key_node.value}" if prefix else str(key_node.value)
            lines[key] = key_node.start_mark.line + 1
            _collect_lines(value_node, key, lines)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            key = f"{prefix}.{i}"
            lines[key] = item.start_mark.line + 1
            _collect_lines(item, key, lines)


def prepare_config(text: str, overrides: Optional[Dict[str, Any]] = None,
                   source: str = "<config>") -> Tuple[Dict[str, Any], Dict[str, int]]:
    """
    YAML text to a raw mapping with environment variables substituted

    Args:
        text: YAML document
        overrides: mapping deep-merged over the document (CLI flags)
        source: name used in log messages

    Returns:
        (configuration dictionary, key -> line number)
    """
    data, lines = load_yaml(text, source)
    data = _substitute_env_vars(data)
    if overrides:
        data = deep_merge(data, overrides)
    return data, lines


def load_config(config_path: Union[str, Path],
                overrides: Optional[Dict[str, Any]] = None) -> Tuple[Dict[str, Any], Dict[str, int]]:
    """
    Load configuration from YAML file with environment variable substitution

    Args:
        config_path: Path to configuration file
        overrides: mapping deep-merged over the file (CLI flags)

    Returns:
        (configuration dictionary, key -> line number)
    """
    path = Path(config_path)
    if not path.is_file():
        raise ConfigParseError("<file>", f"configuration file {path} not found")

    data, lines = prepare_config(path.read_text(), overrides, source=str(path))
    logger.info(f"Loaded configuration from {path}")
    return data, lines


def deep_merge(base: Dict[str, Any], overlay: Dict[str, Any]) -> Dict[str, Any]:
    """
    Deep merge two dictionaries

    Args:
        base: Base dictionary
        overlay: Dictionary to merge on top

    Returns:
        Merged dictionary
    """
    result = base.copy()

    for key, value in overlay.items():
        if key in result and isinstance(result[key], dict) and isinstance(value, dict):
            result[key] = deep_merge(result[key], value)
        else:
            result[key] = value

    return result


def _substitute_env_vars(config: Any) -> Any:
    """
    Recursively substitute environment variables in configuration

    Environment variables should be in format: ${ENV_VAR_NAME} or ${ENV_VAR_NAME:default_value}
    """
    if isinstance(config, dict):
        return {key: _substitute_env_vars(value) for key, value in config.items()}
    elif isinstance(config, list):
        return [_substitute_env_vars(item) for item in config]
    elif isinstance(config, str):
        return _substitute_env_var_string(config)
    else:
        return config


def _substitute_env_var_string(value: str) -> str:
    def replace_env_var(match):
        var_name = match.group(1)
        default_value = match.group(2) if match.group(2) is not None else ''
        return os.environ.get(var_name, default_value)

    return _ENV_PATTERN.sub(replace_env_var, value)


def canonical_json(data: Any) -> str:
    """Key-sorted compact JSON; identical content gives identical text"""
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=False)


def config_hash(data: Any) -> str:
    """sha256 of the canonical JSON form"""
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()
