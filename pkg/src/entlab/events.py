"""Zero-crossing detection on sampled criteria."""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.optimize import brentq

EVENT_XTOL = 1e-8
POSITIVE_MARGIN = 1e-9


def crossings(
    grid,
    values,
    f: Callable[[float], float] | None = None,
    kind: str = "both",
    margin: float = POSITIVE_MARGIN,
    xtol: float = EVENT_XTOL,
) -> list[tuple[float, str]]:
    """Sign changes of a sampled criterion.

    A crossing is reported between consecutive grid points where the criterion
    goes from <= 0 to > margin ("up") or the reverse ("down").  When `f` is
    given the location is refined by bisection, otherwise it is linearly
    interpolated.
    """
    t = np.asarray(grid, dtype=float)
    y = np.asarray(values, dtype=float)
    out = []
    pos = y > margin
    nonpos = y <= 0.0
    # walk runs so that a criterion hovering in (0, margin] does not produce events
    state = None
    last_idx = None
    for i in range(len(t)):
        if pos[i]:
            s = True
        elif nonpos[i]:
            s = False
        else:
            continue
        if state is not None and s != state:
            a, b = t[last_idx], t[i]
            direction = "up" if s else "down"
            if kind in ("both", direction):
                out.append((_locate(f, a, b, y[last_idx], y[i], xtol), direction))
        state, last_idx = s, i
    return out


def _locate(f, a, b, ya, yb, xtol):
    if f is None:
        if yb == ya:
            return 0.5 * (a + b)
        return a + (0.0 - ya) * (b - a) / (yb - ya)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        return a + (0.0 - ya) * (b - a) / (yb - ya)
    return brentq(f, a, b, xtol=xtol, rtol=1e-15)


def positive_intervals(grid, values, margin: float = POSITIVE_MARGIN) -> list[tuple[float, float]]:
    """Maximal runs of grid points where the value exceeds `margin`."""
    t = np.asarray(grid, dtype=float)
    pos = np.asarray(values, dtype=float) > margin
    out = []
    start = None
    for i, p in enumerate(pos):
        if p and start is None:
            start = i
        elif not p and start is not None:
            out.append((t[start], t[i - 1]))
            start = None
    if start is not None:
        out.append((t[start], t[-1]))
    return out


def zero_intervals(grid, values, tol: float = 0.0) -> list[tuple[float, float]]:
    """Maximal runs of grid points where the value is <= tol."""
    t = np.asarray(grid, dtype=float)
    z = np.asarray(values, dtype=float) <= tol
    out = []
    start = None
    for i, p in enumerate(z):
        if p and start is None:
            start = i
        elif not p and start is not None:
            out.append((t[start], t[i - 1]))
            start = None
    if start is not None:
        out.append((t[start], t[-1]))
    return out
