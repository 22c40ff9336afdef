"""Variational Borel-conformal resummation of divergent series."""

import json as _json

from ._core import (
    DomainError,
    ParseError,
    QuadratureError,
    SearchError,
    Series,
    auxiliary,
    builtin,
    builtin_names,
    evaluate,
    exact_sum,
    load_series,
    moment,
    parse_series,
    partial_sum,
    pv_split,
    scan,
    sequence,
    zero_and_slope,
)
from ._core import reproduce as _reproduce


def reproduce(example="all"):
    """Run a worked example (sec31 .. sec35 or all) and return the summary as a dict."""
    return _json.loads(_reproduce(example))


__all__ = [
    "DomainError",
    "ParseError",
    "QuadratureError",
    "SearchError",
    "Series",
    "auxiliary",
    "builtin",
    "builtin_names",
    "evaluate",
    "exact_sum",
    "load_series",
    "moment",
    "parse_series",
    "partial_sum",
    "pv_split",
    "reproduce",
    "scan",
    "sequence",
    "zero_and_slope",
]
