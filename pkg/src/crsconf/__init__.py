"""Confluence analysis for conditional rewrite systems with constructors."""

from .corpus import list_cases, load_case
from .criteria import Assumptions, Verdict, run_pipeline, search_counterexample
from .crs import CRS, Def, Eq, Neq, Rule, ValidationError, VariableSystem, validate_crs
from .depth import OMEGA, OMEGA_OMEGA, DepthIndex, fin, omega_plus, parse_depth
from .engine import Budget, Engine, TriBool
from .peaks import CriticalPeak, compute_critical_peaks
from .syntax import ParseError, parse_document, parse_term
from .terms import App, Signature, Var

__all__ = [
    "App", "Assumptions", "Budget", "CRS", "CriticalPeak", "Def", "DepthIndex", "Engine",
    "Eq", "Neq", "OMEGA", "OMEGA_OMEGA", "ParseError", "Rule", "Signature", "TriBool",
    "ValidationError", "Var", "VariableSystem", "Verdict", "compute_critical_peaks", "fin",
    "list_cases", "load_case", "omega_plus", "parse_depth", "parse_document", "parse_term",
    "run_pipeline", "search_counterexample", "validate_crs",
]
