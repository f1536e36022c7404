"""State characterization: Wigner function, photon statistics, fidelities.

The Wigner function uses the convention ``x = (a + a†)/sqrt(2)``,
``W_vacuum(0,0) = 1/pi`` and ``∫∫ W dx dp = 1``.  Evaluation runs on the
displaced-number recurrence, which is numerically stable far past n = 40;
naive factorial-ratio formulas are not used anywhere.

Cat fits scan real alpha >= 0 against even or odd superpositions with lobes
on the x axis, the orientation fixed by the package's squeezing convention.
Grid points of a Wigner evaluation and alpha-scan points are independent,
so callers may evaluate them concurrently; everything here is pure.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.linalg import sqrtm

from . import fock
from .errors import CutoffTooSmallError, InvalidArgumentError, ZeroStateError
from .fock import DensityMatrix, PureState

__all__ = [
    "WignerGrid",
    "CatFit",
    "wigner",
    "photon_distribution",
    "mean_photon",
    "fidelity",
    "fidelity_mixed",
    "purity",
    "best_cat_fit",
    "min_wigner",
    "wigner_to_csv",
    "wigner_to_document",
    "photon_distribution_to_csv",
]


@dataclass(frozen=True)
class WignerGrid:
    """Wigner values on a rectangular grid; ``values[i, j] = W(x_i, p_j)``."""

    x_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray
    convention: str = "x=(a+adag)/sqrt2, int W dx dp = 1"

    def __post_init__(self):
        x = np.asarray(self.x_axis, dtype=float)
        p = np.asarray(self.p_axis, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.shape != (x.size, p.size):
            raise InvalidArgumentError(
                f"values shape {v.shape} does not match axes ({x.size}, {p.size})")
        for arr in (x, p, v):
            arr.setflags(write=False)
        object.__setattr__(self, "x_axis", x)
        object.__setattr__(self, "p_axis", p)
        object.__setattr__(self, "values", v)

    def integral(self) -> float:
        """Trapezoid quadrature of W over the grid."""
        return float(np.trapezoid(np.trapezoid(self.values, self.p_axis, axis=1),
                                  self.x_axis))


@dataclass(frozen=True)
class CatFit:
    """Best-fit cat amplitude and the fidelity achieved there."""

    alpha_star: float
    fidelity_star: float
    parity: str

    @property
    def size(self) -> float:
        """Cat size |alpha|²."""
        return self.alpha_star ** 2


def _as_density(state: Union[DensityMatrix, PureState]) -> DensityMatrix:
    if isinstance(state, PureState):
        return state.to_density()
    return state


def wigner(rho: Union[DensityMatrix, PureState], x_axis: Sequence[float],
           p_axis: Sequence[float]) -> WignerGrid:
    """Wigner function of a single-mode state on a rectangular grid.

    Displaced-number recurrence over the upper triangle of rho; each Fock
    pair contributes ``W_{mn}(x, p)`` built iteratively from the Gaussian
    ``W_{00} = exp(-x² - p²)/pi``.
    """
    rho = _as_density(rho)
    if rho.n_modes != 1:
        raise InvalidArgumentError("wigner expects a single-mode state")
    x = np.asarray(x_axis, dtype=float)
    p = np.asarray(p_axis, dtype=float)
    if x.ndim != 1 or p.ndim != 1 or x.size == 0 or p.size == 0:
        raise InvalidArgumentError("x_axis and p_axis must be non-empty 1-d grids")
    dim = rho.cutoff + 1
    r = rho.entries
    X, P = np.meshgrid(x, p, indexing="ij")
    grid = (X + 1j * P) / math.sqrt(2.0)
    b = 2.0 * grid
    prev = np.zeros((dim,) + grid.shape, dtype=complex)
    cur = np.zeros_like(prev)
    prev[0] = np.exp(-2.0 * np.abs(grid) ** 2) / math.pi
    w = np.real(r[0, 0]) * np.real(prev[0])
    for n in range(1, dim):
        prev[n] = (b * prev[n - 1]) / math.sqrt(n)
        w += 2.0 * np.real(r[0, n] * prev[n])
    for m in range(1, dim):
        cur[m] = (b.conj() * prev[m] - math.sqrt(m) * prev[m - 1]) / math.sqrt(m)
        w += np.real(r[m, m] * cur[m])
        for n in range(m + 1, dim):
            cur[n] = (b * cur[n - 1] - math.sqrt(m) * prev[n - 1]) / math.sqrt(n)
            w += 2.0 * np.real(r[m, n] * cur[n])
        prev, cur = cur, prev
    return WignerGrid(x, p, w)


def photon_distribution(rho: Union[DensityMatrix, PureState]) -> np.ndarray:
    """Diagonal photon-number probabilities p(n) = rho_nn."""
    rho = _as_density(rho)
    return np.real(np.diag(rho.entries)).copy()


def mean_photon(rho: Union[DensityMatrix, PureState]) -> float:
    """Mean photon number ``sum_n n rho_nn``."""
    p = photon_distribution(rho)
    return float(np.sum(np.arange(p.size) * p))


def fidelity(rho: Union[DensityMatrix, PureState], target: PureState) -> float:
    """Pure-target fidelity ``<target|rho|target>``, clamped to [0, 1]."""
    rho = _as_density(rho)
    if rho.cutoff != target.cutoff or rho.n_modes != target.n_modes:
        raise InvalidArgumentError("state and target live on different spaces")
    f = float(np.real(target.amplitudes.conj() @ rho.entries @ target.amplitudes))
    return min(1.0, max(0.0, f))


def fidelity_mixed(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))²``.

    Reduces to :func:`fidelity` when either argument is pure; needed to
    score reconstructions of lossy (mixed) truth states.
    """
    if rho.cutoff != sigma.cutoff or rho.n_modes != sigma.n_modes:
        raise InvalidArgumentError("density matrices live on different spaces")
    s = sqrtm(rho.entries)
    inner = sqrtm(s @ sigma.entries @ s)
    f = float(np.real(np.trace(inner)) ** 2)
    return min(1.0, max(0.0, f))


def purity(rho: Union[DensityMatrix, PureState]) -> float:
    """``tr(rho²)``; 1 for pure states."""
    rho = _as_density(rho)
    return float(np.real(np.trace(rho.entries @ rho.entries)))


def _cat_fidelity(rho: DensityMatrix, alpha: float, parity: str) -> float:
    if alpha == 0.0 and parity == "odd":
        return -1.0  # degenerate point, excluded from the scan
    try:
        cat = fock.cat_state(alpha, parity, rho.cutoff)
    except CutoffTooSmallError:
        return -1.0  # cat does not fit the cutoff, excluded from the scan
    return fidelity(rho, cat)


def best_cat_fit(rho: Union[DensityMatrix, PureState], parity: str,
                 alpha_grid: Sequence[float]) -> CatFit:
    """Best-fit cat over an ascending alpha grid, refined once.

    The coarse argmax (ties broken toward smaller alpha) is refined on a
    local grid of resolution <= 0.005.  Grid points whose cat state does
    not fit the cutoff are skipped, as is alpha = 0 for odd parity (the
    odd cat degenerates to the zero vector there); if no grid point is
    admissible the fit raises.
    """
    rho = _as_density(rho)
    grid = np.asarray(alpha_grid, dtype=float)
    if grid.size == 0:
        raise InvalidArgumentError("alpha_grid must be non-empty")
    if np.any(np.diff(grid) < 0):
        raise InvalidArgumentError("alpha_grid must be ascending")
    if np.any(grid < 0):
        raise InvalidArgumentError("alpha values must be >= 0")

    def scan(values: np.ndarray) -> Tuple[float, float]:
        best_a, best_f = None, -np.inf
        for a in values:
            f = _cat_fidelity(rho, float(a), parity)
            if f > best_f:  # strict: ties keep the earlier (smaller) alpha
                best_a, best_f = float(a), f
        return best_a, best_f

    coarse_a, coarse_f = scan(grid)
    if coarse_a is None or coarse_f < 0:
        raise ZeroStateError("no admissible alpha in the grid")
    step = float(np.max(np.diff(grid))) if grid.size > 1 else 0.1
    lo = max(0.0 if parity == "even" else 1e-3, coarse_a - step)
    hi = coarse_a + step
    fine = np.arange(lo, hi + 1e-12, 0.005)
    fine_a, fine_f = scan(fine)
    if fine_f >= coarse_f:
        return CatFit(alpha_star=fine_a, fidelity_star=fine_f, parity=parity)
    return CatFit(alpha_star=coarse_a, fidelity_star=coarse_f, parity=parity)


def min_wigner(grid: WignerGrid) -> Tuple[float, float, float]:
    """Grid minimum of W and its location.

    Exact ties are broken toward smaller |x|, then smaller |p|, then by
    signed coordinates for determinism.
    """
    v = grid.values
    vmin = float(v.min())
    idx = np.argwhere(v == vmin)
    xs = grid.x_axis[idx[:, 0]]
    ps = grid.p_axis[idx[:, 1]]
    order = np.lexsort((ps, xs, np.abs(ps), np.abs(xs)))
    i = order[0]
    return float(xs[i]), float(ps[i]), vmin


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def wigner_to_csv(grid: WignerGrid, path) -> None:
    """Write rows (x, p, W), x-major."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,p,w\n")
        for i, x in enumerate(grid.x_axis):
            for j, p in enumerate(grid.p_axis):
                fh.write(f"{float(x)!r},{float(p)!r},{float(grid.values[i, j])!r}\n")


def wigner_to_document(grid: WignerGrid) -> dict:
    return {
        "convention": grid.convention,
        "x_axis": [float(v) for v in grid.x_axis],
        "p_axis": [float(v) for v in grid.p_axis],
        "values": [[float(v) for v in row] for row in grid.values],
    }


def photon_distribution_to_csv(probs: np.ndarray, path) -> None:
    """Write rows (n, p)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("n,p\n")
        for n, p in enumerate(np.asarray(probs, dtype=float)):
            fh.write(f"{n},{float(p)!r}\n")


def wigner_json(grid: WignerGrid, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(wigner_to_document(grid), fh)
        fh.write("\n")
