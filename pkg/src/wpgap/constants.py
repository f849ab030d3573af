"""Non-explicit constants used by the expectation and gap bounds.

The defaults live in ``data/constants.json`` and are echoed in every report so
that a result can be reproduced from its output alone.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .errors import InputFileError, ParseError, PreconditionError

REQUIRED = ("beta", "beta1", "c1", "eps1", "soft_count", "K_sep", "K_cut",
            "K_nonsep_error", "K_filling", "K_filling_low")


def _validate(table: dict) -> dict:
    missing = [k for k in REQUIRED if k not in table]
    if missing:
        raise ParseError(f"constants table lacks {', '.join(missing)}")
    out = {}
    for key in REQUIRED:
        value = table[key]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"constant {key} must be a number")
        if not value > 0:
            raise PreconditionError(f"constant {key} must be positive")
        out[key] = float(value)
    return out


def default_constants() -> dict:
    text = resources.files("wpgap").joinpath("data/constants.json").read_text()
    return _validate(json.loads(text))


def load_constants(path: str | Path | None = None, overrides: dict | None = None) -> dict:
    """Default table, optionally replaced by a JSON file and then by overrides."""
    if path is None:
        table = default_constants()
    else:
        path = Path(path)
        if not path.is_file():
            raise InputFileError(f"constants file {path} does not exist")
        try:
            raw = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"constants file is not JSON: {exc.msg}", exc.lineno) from None
        if not isinstance(raw, dict):
            raise ParseError("constants file must hold a JSON object")
        table = _validate({**default_constants(), **raw})
    if overrides:
        table = _validate({**table, **{k: v for k, v in overrides.items() if v is not None}})
    return table
