"""Truncated-Fock-space linear algebra for one and two bosonic modes.

Conventions used throughout the package:

* Quadratures: ``x = (a + a†)/sqrt(2)``, ``p = (a - a†)/(i sqrt(2))``; the
  vacuum has variance 1/2 in both and a Wigner peak of ``1/pi``.
* Squeezing: ``eps = tanh(r)`` and ``S(eps) = exp[(r/2)(a†² - a²)]``.  For
  ``eps > 0`` the even Fock amplitudes of ``S(eps)|0>`` are positive
  (``c2/c0 = eps/sqrt(2)``), the p-quadrature is squeezed and the
  x-quadrature anti-squeezed, so cat-like superpositions built from this
  state have their lobes on the x axis.
* Two-mode states use mode-major ordering: index ``n_plus*(cutoff+1) + n_minus``.

Generator functions ("normalized" constructors) validate that the weight of
the discarded Fock tail is below 1e-8 and raise :class:`CutoffTooSmallError`
instead of silently truncating.  Where a construction is sensitive to the
truncation boundary (squeeze operator, photon subtraction) the computation
runs with internal headroom so the returned object is the projection of the
untruncated one, not the result of truncated-operator arithmetic.

All values are immutable after construction and all operations are pure
functions; they are safe to call from concurrent tasks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import CutoffTooSmallError, InvalidArgumentError, ZeroStateError

TAIL_TOL = 1e-8

__all__ = [
    "TAIL_TOL",
    "PureState",
    "OperatorMatrix",
    "DensityMatrix",
    "SqueezeParam",
    "ladder",
    "fock_state",
    "vacuum",
    "squeezed_vacuum",
    "squeeze_operator",
    "coherent_state",
    "cat_state",
    "tensor",
    "partial_trace",
    "apply_loss",
    "squeezing_db",
    "to_document",
    "from_document",
    "save_state",
    "load_state",
]


def _frozen_array(values, shape=None) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    if shape is not None and arr.shape != shape:
        raise InvalidArgumentError(f"expected array of shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


def _check_cutoff(cutoff: int, minimum: int = 2) -> int:
    if not isinstance(cutoff, (int, np.integer)) or cutoff < minimum:
        raise InvalidArgumentError(f"cutoff must be an integer >= {minimum}, got {cutoff!r}")
    return int(cutoff)


@dataclass(frozen=True)
class PureState:
    """Complex amplitude vector over the truncated Fock basis.

    ``amplitudes`` has length ``(cutoff+1)**n_modes``; two-mode states use
    mode-major ordering ``|n_plus> ⊗ |n_minus>``.
    """

    amplitudes: np.ndarray
    cutoff: int
    n_modes: int = 1

    def __post_init__(self):
        cutoff = _check_cutoff(self.cutoff)
        if self.n_modes not in (1, 2):
            raise InvalidArgumentError("n_modes must be 1 or 2")
        dim = (cutoff + 1) ** self.n_modes
        object.__setattr__(self, "cutoff", cutoff)
        object.__setattr__(self, "amplitudes", _frozen_array(self.amplitudes, (dim,)))

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** self.n_modes

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "PureState":
        n = self.norm()
        if n < 1e-300:
            raise ZeroStateError("cannot normalize a zero state")
        return PureState(self.amplitudes / n, self.cutoff, self.n_modes)

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()),
                             self.cutoff, self.n_modes)


@dataclass(frozen=True)
class OperatorMatrix:
    """Complex matrix acting on the truncated Fock basis."""

    entries: np.ndarray
    cutoff: int
    n_modes: int = 1

    def __post_init__(self):
        cutoff = _check_cutoff(self.cutoff)
        if self.n_modes not in (1, 2):
            raise InvalidArgumentError("n_modes must be 1 or 2")
        dim = (cutoff + 1) ** self.n_modes
        object.__setattr__(self, "cutoff", cutoff)
        object.__setattr__(self, "entries", _frozen_array(self.entries, (dim, dim)))

    @property
    def dagger(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.cutoff, self.n_modes)

    def apply(self, state: PureState) -> PureState:
        if state.cutoff != self.cutoff or state.n_modes != self.n_modes:
            raise InvalidArgumentError("operator and state live on different spaces")
        return PureState(self.entries @ state.amplitudes, self.cutoff, self.n_modes)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian positive-semidefinite matrix with unit trace (to tolerance)."""

    entries: np.ndarray
    cutoff: int
    n_modes: int = 1

    def __post_init__(self):
        cutoff = _check_cutoff(self.cutoff)
        if self.n_modes not in (1, 2):
            raise InvalidArgumentError("n_modes must be 1 or 2")
        dim = (cutoff + 1) ** self.n_modes
        object.__setattr__(self, "cutoff", cutoff)
        object.__setattr__(self, "entries", _frozen_array(self.entries, (dim, dim)))

    @property
    def dim(self) -> int:
        return (self.cutoff + 1) ** self.n_modes

    def trace(self) -> float:
        return float(np.trace(self.entries).real)

    def validate(self, trace_tol: float = 1e-10, herm_tol: float = 1e-10,
                 psd_tol: float = 1e-8) -> None:
        """Raise if the matrix is not a density matrix within tolerances."""
        if abs(self.trace() - 1.0) > trace_tol:
            raise InvalidArgumentError(f"trace deviates from 1 by {abs(self.trace() - 1.0):.3e}")
        herm = np.max(np.abs(self.entries - self.entries.conj().T))
        if herm > herm_tol:
            raise InvalidArgumentError(f"Hermiticity defect {herm:.3e}")
        min_eig = float(np.linalg.eigvalsh(self.entries)[0])
        if min_eig < -psd_tol:
            raise InvalidArgumentError(f"minimum eigenvalue {min_eig:.3e}")


@dataclass(frozen=True)
class SqueezeParam:
    """Squeezing strength ``eps = tanh(r)`` with ``|eps| < 1``."""

    eps: float

    def __post_init__(self):
        eps = float(self.eps)
        if not abs(eps) < 1.0:
            raise InvalidArgumentError(f"|eps| must be < 1, got {eps}")
        object.__setattr__(self, "eps", eps)

    @property
    def r(self) -> float:
        return math.atanh(self.eps)

    @property
    def db(self) -> float:
        return squeezing_db(self.eps)


def _as_eps(eps: Union[float, SqueezeParam]) -> float:
    if isinstance(eps, SqueezeParam):
        return eps.eps
    eps = float(eps)
    if not abs(eps) < 1.0:
        raise InvalidArgumentError(f"|eps| must be < 1, got {eps}")
    return eps


def squeezing_db(eps: Union[float, SqueezeParam]) -> float:
    """Squeezed-quadrature noise reduction in dB: ``-10 log10(exp(-2r))``.

    Documentation convenience only; for eps = 0.3 this is about 2.7 dB.
    """
    r = math.atanh(_as_eps(eps))
    return -10.0 * math.log10(math.exp(-2.0 * r))


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------

def _ladder_matrix(dim: int) -> np.ndarray:
    a = np.zeros((dim, dim), dtype=complex)
    ns = np.arange(1, dim)
    a[ns - 1, ns] = np.sqrt(ns)
    return a


def ladder(cutoff: int, kind: str = "annihilate") -> OperatorMatrix:
    """Single-mode ladder operator: ``annihilate[n-1, n] = sqrt(n)``."""
    cutoff = _check_cutoff(cutoff)
    a = _ladder_matrix(cutoff + 1)
    if kind == "annihilate":
        return OperatorMatrix(a, cutoff)
    if kind == "create":
        return OperatorMatrix(a.conj().T, cutoff)
    raise InvalidArgumentError(f"kind must be 'annihilate' or 'create', got {kind!r}")


def fock_state(n: int, cutoff: int) -> PureState:
    """Number state |n>."""
    cutoff = _check_cutoff(cutoff)
    if not 0 <= n <= cutoff:
        raise InvalidArgumentError(f"n must be in [0, {cutoff}], got {n}")
    amps = np.zeros(cutoff + 1, dtype=complex)
    amps[n] = 1.0
    return PureState(amps, cutoff)


def vacuum(cutoff: int) -> PureState:
    return fock_state(0, cutoff)


# ---------------------------------------------------------------------------
# Gaussian and cat-state generators
# ---------------------------------------------------------------------------

def _squeezed_vacuum_amps(eps: float, top: int) -> np.ndarray:
    """Exact amplitudes of S(eps)|0> for n = 0..top (no renormalization)."""
    r = math.atanh(eps)
    c = np.zeros(top + 1, dtype=complex)
    c[0] = 1.0 / math.sqrt(math.cosh(r))
    t = math.tanh(r)
    k = 0
    while 2 * (k + 1) <= top:
        c[2 * k + 2] = t * math.sqrt((2 * k + 1) * (2 * k + 2)) / (2 * (k + 1)) * c[2 * k]
        k += 1
    return c


def _check_tail(kept_weight: float, what: str) -> None:
    tail = max(0.0, 1.0 - kept_weight)
    if tail > TAIL_TOL:
        raise CutoffTooSmallError(
            f"{what}: truncated tail weight {tail:.3e} exceeds {TAIL_TOL:.0e}; "
            "increase the cutoff")


def squeezed_vacuum(eps: Union[float, SqueezeParam], cutoff: int) -> PureState:
    """Squeezed vacuum ``S(eps)|0>`` with only even Fock amplitudes.

    The amplitudes are the exact infinite-dimensional ones restricted to
    ``n <= cutoff`` and renormalized; the discarded tail must weigh < 1e-8.
    """
    eps = _as_eps(eps)
    cutoff = _check_cutoff(cutoff)
    c = _squeezed_vacuum_amps(eps, cutoff)
    kept = float(np.sum(np.abs(c) ** 2))
    _check_tail(kept, f"squeezed_vacuum(eps={eps})")
    return PureState(c / math.sqrt(kept), cutoff)


def squeeze_operator(eps: Union[float, SqueezeParam], cutoff: int) -> OperatorMatrix:
    """Matrix of ``S(eps) = exp[(r/2)(a†² - a²)]`` on the truncated basis.

    Computed as ``expm`` of the generator on a padded space and projected
    back, so the returned block matches the infinite-dimensional operator;
    a same-size ``expm`` would differ near the truncation boundary.  A
    column is orthonormal to the others exactly to the extent its squeezed
    image fits under the cutoff; higher columns lose the weight that the
    untruncated operator genuinely sends above it.
    """
    eps = _as_eps(eps)
    cutoff = _check_cutoff(cutoff, minimum=4)
    kept = float(np.sum(np.abs(_squeezed_vacuum_amps(eps, cutoff)) ** 2))
    _check_tail(kept, f"squeeze_operator(eps={eps})")
    r = math.atanh(eps)
    pad = max(16, cutoff)
    dim = cutoff + 1 + pad
    a = _ladder_matrix(dim)
    gen = 0.5 * r * (a.conj().T @ a.conj().T - a @ a)
    full = expm(gen)
    return OperatorMatrix(full[: cutoff + 1, : cutoff + 1], cutoff)


def _coherent_amps(alpha: complex, top: int) -> np.ndarray:
    """Exact amplitudes of |alpha> for n = 0..top (no renormalization)."""
    if alpha == 0:
        c = np.zeros(top + 1, dtype=complex)
        c[0] = 1.0
        return c
    n = np.arange(top + 1)
    mag = np.exp(-abs(alpha) ** 2 / 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1))
    return mag * np.exp(1j * np.angle(alpha) * n)


def coherent_state(alpha: complex, cutoff: int) -> PureState:
    """Coherent state with ``c_n = exp(-|a|²/2) a^n / sqrt(n!)``, renormalized."""
    cutoff = _check_cutoff(cutoff)
    alpha = complex(alpha)
    if abs(alpha) ** 2 > cutoff / 4:
        raise CutoffTooSmallError(
            f"coherent_state: |alpha|^2 = {abs(alpha)**2:.3f} exceeds cutoff/4 = {cutoff / 4}")
    c = _coherent_amps(alpha, cutoff)
    kept = float(np.sum(np.abs(c) ** 2))
    _check_tail(kept, f"coherent_state(alpha={alpha})")
    return PureState(c / math.sqrt(kept), cutoff)


def cat_state(alpha: complex, parity: str, cutoff: int) -> PureState:
    """Even/odd coherent-state superposition ``(|a> ± |-a>)/sqrt(N±)``.

    ``N± = 2(1 ± exp(-2|a|²))``; the wrong-parity amplitudes are exactly
    zero.  An odd cat with alpha = 0 is the zero vector and raises.
    """
    cutoff = _check_cutoff(cutoff)
    alpha = complex(alpha)
    if parity not in ("even", "odd"):
        raise InvalidArgumentError(f"parity must be 'even' or 'odd', got {parity!r}")
    if alpha == 0 and parity == "odd":
        raise ZeroStateError("odd cat with alpha = 0 is the zero state")
    if abs(alpha) ** 2 > cutoff / 4:
        raise CutoffTooSmallError(
            f"cat_state: |alpha|^2 = {abs(alpha)**2:.3f} exceeds cutoff/4 = {cutoff / 4}")
    c = _coherent_amps(alpha, cutoff).copy()
    if parity == "even":
        c[1::2] = 0.0
    else:
        c[0::2] = 0.0
    # Exact normalization: |c_n|^2 summed over the matching parity of the
    # infinite series equals N±/4 * exp(|a|^2) poisson weights; rather than
    # a closed form, compare kept weight against the analytic total.
    sign = 1.0 if parity == "even" else -1.0
    n_pm = 2.0 * (1.0 + sign * math.exp(-2.0 * abs(alpha) ** 2))
    total = n_pm / 4.0  # squared norm of the projected-parity coherent part
    kept = float(np.sum(np.abs(c) ** 2))
    _check_tail(kept / total, f"cat_state(alpha={alpha}, parity={parity})")
    return PureState(c / math.sqrt(kept), cutoff)


# ---------------------------------------------------------------------------
# Composition, reduction, loss
# ---------------------------------------------------------------------------

def tensor(a: PureState, b: PureState) -> PureState:
    """Two-mode product state in mode-major ordering (a = plus, b = minus)."""
    if a.n_modes != 1 or b.n_modes != 1:
        raise InvalidArgumentError("tensor expects two single-mode states")
    if a.cutoff != b.cutoff:
        raise InvalidArgumentError(
            f"cutoff mismatch: {a.cutoff} vs {b.cutoff}")
    return PureState(np.kron(a.amplitudes, b.amplitudes), a.cutoff, n_modes=2)


def partial_trace(rho: DensityMatrix, keep: str) -> DensityMatrix:
    """Trace out one mode of a two-mode density matrix."""
    if rho.n_modes != 2:
        raise InvalidArgumentError("partial_trace expects a two-mode density matrix")
    if keep not in ("plus", "minus"):
        raise InvalidArgumentError(f"keep must be 'plus' or 'minus', got {keep!r}")
    d = rho.cutoff + 1
    four = rho.entries.reshape(d, d, d, d)  # [n+, n-, m+, m-]
    if keep == "plus":
        reduced = np.einsum("abcb->ac", four)
    else:
        reduced = np.einsum("abac->bc", four)
    return DensityMatrix(reduced, rho.cutoff, n_modes=1)


def _loss_kraus(cutoff: int, eta: float, k: int) -> np.ndarray:
    """Kraus operator removing k photons: K_k[n-k, n] = sqrt(C(n,k) eta^{n-k} (1-eta)^k)."""
    K = np.zeros((cutoff + 1, cutoff + 1))
    ns = np.arange(k, cutoff + 1)
    logc = 0.5 * (gammaln(ns + 1) - gammaln(k + 1) - gammaln(ns - k + 1))
    K[ns - k, ns] = np.exp(logc) * eta ** ((ns - k) / 2.0) * (1.0 - eta) ** (k / 2.0)
    return K


def apply_loss(rho: DensityMatrix, eta: float) -> DensityMatrix:
    """Pure-loss channel with transmission eta (beam splitter to vacuum)."""
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise InvalidArgumentError(f"eta must be in [0, 1], got {eta}")
    if rho.n_modes != 1:
        raise InvalidArgumentError("apply_loss expects a single-mode density matrix")
    out = np.zeros_like(rho.entries)
    for k in range(rho.cutoff + 1):
        K = _loss_kraus(rho.cutoff, eta, k)
        out += K @ rho.entries @ K.T
    return DensityMatrix(out, rho.cutoff, n_modes=1)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def to_document(obj: Union[PureState, DensityMatrix]) -> dict:
    """Structured document ``{kind, n_modes, cutoff, data}``.

    ``data`` is ``[[re, im], ...]`` row-major; round-trips bit-exactly
    through JSON because Python float repr is exact for binary64.
    """
    if isinstance(obj, PureState):
        kind, flat = "pure", obj.amplitudes
    elif isinstance(obj, DensityMatrix):
        kind, flat = "density", obj.entries.reshape(-1)
    else:
        raise InvalidArgumentError(f"cannot serialize {type(obj).__name__}")
    data = [[float(z.real), float(z.imag)] for z in flat]
    return {"kind": kind, "n_modes": obj.n_modes, "cutoff": obj.cutoff, "data": data}


def from_document(doc: dict) -> Union[PureState, DensityMatrix]:
    """Inverse of :func:`to_document`."""
    try:
        kind = doc["kind"]
        n_modes = int(doc["n_modes"])
        cutoff = int(doc["cutoff"])
        data = doc["data"]
    except (KeyError, TypeError) as exc:
        raise InvalidArgumentError(f"malformed state document: {exc}") from exc
    flat = np.array([complex(re, im) for re, im in data], dtype=complex)
    dim = (cutoff + 1) ** n_modes
    if kind == "pure":
        return PureState(flat, cutoff, n_modes)
    if kind == "density":
        if flat.size != dim * dim:
            raise InvalidArgumentError(
                f"density document has {flat.size} entries, expected {dim * dim}")
        return DensityMatrix(flat.reshape(dim, dim), cutoff, n_modes)
    raise InvalidArgumentError(f"unknown document kind {kind!r}")


def save_state(obj: Union[PureState, DensityMatrix], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_document(obj), fh)
        fh.write("\n")


def load_state(path) -> Union[PureState, DensityMatrix]:
    with open(path, "r", encoding="utf-8") as fh:
        return from_document(json.load(fh))
