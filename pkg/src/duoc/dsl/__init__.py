"""Scripting front end: parse, run, emit."""

from .ast import Script
from .demos import DEMOS
from .emit import ResultTable, emit_results, parse_result_json, render_csv, render_json
from .interpreter import RunConfig, run_script
from .parser import parse_script, pretty_print

__all__ = [
    "DEMOS",
    "ResultTable",
    "RunConfig",
    "Script",
    "emit_results",
    "parse_result_json",
    "parse_script",
    "pretty_print",
    "render_csv",
    "render_json",
    "run_script",
]
