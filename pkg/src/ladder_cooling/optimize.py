"""Golden-section search used for the drive optimizations."""

from __future__ import annotations

import math
from typing import Callable

INV_PHI = (math.sqrt(5) - 1) / 2


class OptimumAtBoundary(ValueError):
    """The maximizer converged onto an edge of the search interval."""


def golden_section_max(f: Callable[[float], float], a: float, b: float,
                       xtol: float) -> tuple[float, float]:
    """Maximize a unimodal ``f`` on ``[a, b]`` to an interval width ``xtol``.

    Returns ``(x, f(x))``.  Raises :class:`OptimumAtBoundary` when the
    located maximum sits within ``xtol`` of either end.
    """
    lo, hi = min(a, b), max(a, b)
    c = hi - INV_PHI * (hi - lo)
    d = lo + INV_PHI * (hi - lo)
    fc, fd = f(c), f(d)
    while hi - lo > xtol:
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - INV_PHI * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + INV_PHI * (hi - lo)
            fd = f(d)
    x = 0.5 * (lo + hi)
    if x - min(a, b) <= xtol or max(a, b) - x <= xtol:
        raise OptimumAtBoundary(f"maximum at the edge of [{min(a, b):.6g}, {max(a, b):.6g}]")
    return x, f(x)
