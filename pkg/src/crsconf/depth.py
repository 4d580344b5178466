"""Depth indices for the stratified rewrite relation, and the small
ordinal arithmetic used to classify critical peaks.

Indices are ordinals below omega*2 plus the limit omega*2 itself:
``0, 1, 2, ..., w, w+1, w+2, ..., w+w``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


@dataclass(frozen=True, order=True)
class DepthIndex:
    omegas: int  # 0, 1 or 2
    n: int = 0

    def __post_init__(self):
        if self.omegas not in (0, 1, 2) or self.n < 0 or (self.omegas == 2 and self.n):
            raise ValueError(f"invalid depth index ({self.omegas}, {self.n})")

    @property
    def is_limit(self) -> bool:
        return self.omegas > 0 and self.n == 0

    @property
    def is_finite(self) -> bool:
        return self.omegas == 0

    def predecessor(self) -> "DepthIndex":
        if self.n == 0:
            raise ValueError(f"{self} has no predecessor")
        return DepthIndex(self.omegas, self.n - 1)

    def successor(self) -> "DepthIndex":
        if self.omegas == 2:
            raise ValueError("w+w has no successor here")
        return DepthIndex(self.omegas, self.n + 1)

    def __str__(self):
        if self.omegas == 0:
            return str(self.n)
        if self.omegas == 2:
            return "w+w"
        return "w" if self.n == 0 else f"w+{self.n}"


def fin(n: int) -> DepthIndex:
    return DepthIndex(0, n)


def omega_plus(n: int) -> DepthIndex:
    return DepthIndex(1, n)


OMEGA = DepthIndex(1, 0)
OMEGA_OMEGA = DepthIndex(2, 0)

_DEPTH_RE = re.compile(r"^(?:(\d+)|w|w\+(\d+)|w\+w)$")


def parse_depth(text: str) -> DepthIndex:
    text = text.strip().replace(" ", "")
    m = _DEPTH_RE.match(text)
    if not m:
        raise ValueError(f"bad depth index {text!r}; use 0..n, w, w+n or w+w")
    if m.group(1) is not None:
        return fin(int(m.group(1)))
    if m.group(2) is not None:
        return omega_plus(int(m.group(2)))
    return OMEGA_OMEGA if text == "w+w" else OMEGA


def ordinal_plus(alpha: int, n0: int, n1: int) -> DepthIndex:
    """``n0 (+)alpha n1`` for alpha in {0, w} (pass 0 or 1 for alpha).

    Zero is neutral on both sides; otherwise the result is
    ``alpha + n0 + n1``.
    """
    if n0 == 0 or n1 == 0 or alpha == 0:
        return fin(n0 + n1)
    return omega_plus(n0 + n1)


def monus(a: int, b: int) -> int:
    return a - b if a >= b else 0
