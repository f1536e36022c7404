"""Temporal wavepackets and the orthonormal mode pair built from two events.

The elementary wavepacket is the double exponential
``psi(t) = sqrt(zeta0) * exp(-zeta0 |t - t_event|)`` with unit L2 norm.  Two
subtraction events at t1 and t2 define the symmetric/antisymmetric pair

    Psi±(t) = [psi(t - t1) ± psi(t - t2)] / sqrt(2 (1 ± I_delta)),

orthonormal thanks to the overlap ``I_delta = (1 + zeta0*delta) exp(-zeta0*delta)``
with ``delta = |t2 - t1|``.  At delta = 0 the antisymmetric mode is 0/0;
callers are directed to the single-mode model by a ``None`` in its slot.

All functions are pure and accept numpy arrays for the time argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "ModeParams",
    "ModeTaps",
    "wavepacket",
    "overlap",
    "mode_functions",
    "discretize_mode",
    "export_taps_csv",
]


@dataclass(frozen=True)
class ModeParams:
    """Angular bandwidth (rad/s) and the two event times (seconds)."""

    zeta0: float
    t1: float
    t2: float

    def __post_init__(self):
        if not self.zeta0 > 0:
            raise InvalidArgumentError(f"zeta0 must be > 0, got {self.zeta0}")

    @property
    def delta(self) -> float:
        return abs(self.t2 - self.t1)

    @property
    def i_delta(self) -> float:
        return overlap(self.delta, self.zeta0)

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.t1 + self.t2)


def wavepacket(t, t_event: float, zeta0: float):
    """Double-exponential amplitude ``sqrt(zeta0) exp(-zeta0 |t - t_event|)``."""
    if not zeta0 > 0:
        raise InvalidArgumentError(f"zeta0 must be > 0, got {zeta0}")
    t = np.asarray(t, dtype=float)
    out = math.sqrt(zeta0) * np.exp(-zeta0 * np.abs(t - t_event))
    return out if out.ndim else float(out)


def overlap(delta: float, zeta0: float) -> float:
    """Wavepacket overlap ``(1 + zeta0*delta) exp(-zeta0*delta)``, in (0, 1]."""
    if not zeta0 > 0:
        raise InvalidArgumentError(f"zeta0 must be > 0, got {zeta0}")
    if delta < 0:
        raise InvalidArgumentError(f"delta must be >= 0, got {delta}")
    z = zeta0 * delta
    return float((1.0 + z) * math.exp(-z))


def mode_functions(t, params: ModeParams) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Evaluate the orthonormal pair (Psi_plus, Psi_minus) at time(s) t.

    For delta = 0 the pair degenerates: Psi_plus reduces to the single
    wavepacket and Psi_minus is returned as ``None``, signalling callers to
    use the single-mode model.
    """
    p1 = wavepacket(t, params.t1, params.zeta0)
    p2 = wavepacket(t, params.t2, params.zeta0)
    i_d = params.i_delta
    if params.delta == 0:
        return p1, None
    psi_plus = (p1 + p2) / math.sqrt(2.0 * (1.0 + i_d))
    psi_minus = (p1 - p2) / math.sqrt(2.0 * (1.0 - i_d))
    return psi_plus, psi_minus


@dataclass(frozen=True)
class ModeTaps:
    """Discrete filter taps with their sample times."""

    times: np.ndarray
    taps: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        taps = np.asarray(self.taps, dtype=float)
        if times.shape != taps.shape or times.ndim != 1:
            raise InvalidArgumentError("times and taps must be 1-d arrays of equal length")
        times.setflags(write=False)
        taps.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "taps", taps)


def discretize_mode(params: ModeParams, sample_rate: float, window: float,
                    which: str = "plus") -> ModeTaps:
    """Unit-L2-norm taps of Psi_plus (or Psi_minus) on a uniform time grid.

    The grid is centred on the midpoint of the two events.  ``window`` must
    cover at least 10/zeta0 and the grid at least 100 points so the taps
    capture essentially all of the mode's energy.
    """
    if which not in ("plus", "minus"):
        raise InvalidArgumentError(f"which must be 'plus' or 'minus', got {which!r}")
    if window < 10.0 / params.zeta0:
        raise InvalidArgumentError(
            f"window {window:.3e}s is smaller than 10/zeta0 = {10.0 / params.zeta0:.3e}s")
    n_points = int(round(sample_rate * window))
    if n_points < 100:
        raise InvalidArgumentError(
            f"sample_rate*window gives {n_points} points, need >= 100")
    mid = params.midpoint
    times = np.linspace(mid - window / 2.0, mid + window / 2.0, n_points)
    plus, minus = mode_functions(times, params)
    if which == "minus":
        if minus is None:
            raise InvalidArgumentError(
                "Psi_minus is undefined at delta = 0; use the single-mode path")
        vals = minus
    else:
        vals = plus
    taps = vals / np.linalg.norm(vals)
    return ModeTaps(times, taps)


def export_taps_csv(taps: ModeTaps, path) -> None:
    """Write taps as a two-column CSV (time_s, amplitude)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("time_s,amplitude\n")
        for t, v in zip(taps.times, taps.taps):
            fh.write(f"{float(t)!r},{float(v)!r}\n")
