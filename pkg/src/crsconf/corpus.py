"""Bundled example systems with their expected analysis results."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Optional

from .criteria import Assumptions
from .crs import CRS
from .engine import Budget
from .syntax import parse_document

_PACKAGE = "crsconf.data"


@dataclass
class CorpusCase:
    id: str
    text: str
    expected: dict
    crs: Optional[CRS] = None
    assumptions: Assumptions = field(default_factory=Assumptions)
    budget: Budget = field(default_factory=Budget)


def _expectations() -> Dict[str, dict]:
    return json.loads(resources.files(_PACKAGE).joinpath("expected.json").read_text())


def list_cases() -> List[str]:
    return list(_expectations())


def load_case(case_id: str) -> CorpusCase:
    """Parsed case; ``crs`` stays None for cases that are meant to be rejected."""
    exp = _expectations()
    if case_id not in exp:
        raise KeyError(f"unknown corpus case {case_id!r}; known: {', '.join(exp)}")
    e = exp[case_id]
    text = resources.files(_PACKAGE).joinpath(e.get("file", case_id) + ".crs").read_text()
    case = CorpusCase(case_id, text, e, budget=Budget(**e.get("budget", {})))
    if "rejected" not in e:
        doc = parse_document(text)
        case.crs, case.assumptions = doc.crs, doc.assumptions
    return case
