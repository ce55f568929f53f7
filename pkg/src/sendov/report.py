"""JSON and CSV rendering with floats printed to 17 significant digits."""

from __future__ import annotations

import json
import math
import re
from decimal import Decimal

import numpy as np

_MARK = "\x00f:"
_MARKED = re.compile(r'"\\u0000f:([^"]*)"')


def fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x) or math.isinf(x):
        return "null"
    return format(x, ".17g")


def _mark(obj):
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return _MARK + fmt(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, Decimal):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _mark(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_mark(v) for v in obj]
    return obj


def dumps(obj, indent: int | None = 2) -> str:
    text = json.dumps(_mark(obj), indent=indent)
    return _MARKED.sub(lambda m: m.group(1), text)
