"""Conditional-state generation by two-photon subtraction with an ancilla.

The pipeline builds, in a truncated Fock space:

* the single-mode two-photon-subtracted squeezed vacuum
  ``a² S(eps0)|0> = beta0 S(eps0)(eps0 a†² + 1)|0>`` with
  ``beta0 = eps0/(1 - eps0²)``;
* the exact two-mode conditional state ``(a+² - a-²) S+(e+) S-(e-)|00>``
  and its reduction to the main mode;
* the approximate main-mode ket
  ``|Phi> ∝ S+(e+)(e+ a†² + 1 - e-/beta+)|0>`` valid to first order in e-;
* the coherent-ancilla variant ``(a² - alpha²) S(eps)|0> ⊗ |alpha>``,
  which stays an exact product;
* the lossy pipeline applying a transmission-eta loss channel after
  reduction to the main mode.

Subtractions are evaluated with two extra Fock levels of internal headroom
so that the returned vectors are projections of the untruncated results;
applying a truncated ``a²`` matrix to an already-truncated state would lose
the feed-down from just above the cutoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from . import fock
from .errors import InvalidArgumentError, ZeroStateError
from .fock import DensityMatrix, PureState, SqueezeParam

__all__ = [
    "SchemeParams",
    "GenerationResult",
    "SubtractionResult",
    "DeltaTableRow",
    "two_photon_subtract_single",
    "ancilla_subtract_exact",
    "reduce_to_main",
    "approx_phi",
    "mixture_weight_c0",
    "coherent_ancilla_subtract",
    "lossy_state",
    "load_delta_table",
]


def _eps_value(eps: Union[float, SqueezeParam]) -> float:
    return eps.eps if isinstance(eps, SqueezeParam) else float(eps)


def beta_of(eps: float) -> float:
    """``beta = eps/(1 - eps²)``, the subtraction prefactor."""
    return eps / (1.0 - eps * eps)


@dataclass(frozen=True)
class SchemeParams:
    """Inputs of the ancilla-assisted scheme.

    ``eps_plus``/``eps_minus`` are the effective squeezing of the main and
    ancillary modes (direct inputs here; the mapping from a time separation
    is outside this package's scope), ``eta`` the overall efficiency, and
    ``cutoff`` the per-mode Fock cutoff.
    """

    eps_plus: float
    eps_minus: float
    eta: float = 1.0
    cutoff: int = 20

    def __post_init__(self):
        ep = _eps_value(self.eps_plus)
        em = _eps_value(self.eps_minus)
        if not abs(ep) < 1 or not abs(em) < 1:
            raise InvalidArgumentError("|eps_plus| and |eps_minus| must be < 1")
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidArgumentError(f"eta must be in [0, 1], got {self.eta}")
        if int(self.cutoff) < 4:
            raise InvalidArgumentError(f"cutoff must be >= 4, got {self.cutoff}")
        object.__setattr__(self, "eps_plus", ep)
        object.__setattr__(self, "eps_minus", em)
        object.__setattr__(self, "eta", float(self.eta))
        object.__setattr__(self, "cutoff", int(self.cutoff))

    @property
    def beta_plus(self) -> float:
        return beta_of(self.eps_plus)


@dataclass(frozen=True)
class SubtractionResult:
    """Normalized conditional state plus its success metadata."""

    state: PureState
    beta0: float
    success_weight: float


@dataclass(frozen=True)
class GenerationResult:
    """Main-mode state after the full pipeline.

    ``success_weight`` is the squared norm of the unnormalized conditional
    two-mode vector (a relative coincidence probability) and ``c0`` the
    mixture weight ``1 - <Phi|rho_plus|Phi>``, both evaluated before loss.
    """

    rho_plus: DensityMatrix
    success_weight: float
    c0: float


def _subtracted_amps(eps: float, cutoff: int) -> np.ndarray:
    """Exact amplitudes of a² S(eps)|0> for n <= cutoff (unnormalized).

    Uses amplitudes up to cutoff+2 so the top of the returned vector keeps
    the feed-down from the two levels above the cutoff.
    """
    c = fock._squeezed_vacuum_amps(eps, cutoff + 2)
    n = np.arange(cutoff + 1)
    return np.sqrt((n + 1.0) * (n + 2.0)) * c[n + 2]


def two_photon_subtract_single(eps0: Union[float, SqueezeParam], cutoff: int) -> SubtractionResult:
    """Normalized ``a² S(eps0)|0>``, equal to ``S(eps0)(|0> + sqrt(2) eps0 |2>)/sqrt(1+2 eps0²)``.

    Returns ``beta0 = eps0/(1-eps0²)`` and the squared norm of the
    unnormalized subtracted vector as success metadata.
    """
    eps0 = _eps_value(eps0)
    if eps0 == 0.0:
        raise ZeroStateError("a²|0> = 0: two-photon subtraction needs eps0 != 0")
    if not abs(eps0) < 1:
        raise InvalidArgumentError(f"|eps0| must be < 1, got {eps0}")
    # Tail validation via the underlying squeezed vacuum.
    fock.squeezed_vacuum(eps0, cutoff)
    amps = _subtracted_amps(eps0, cutoff)
    weight = float(np.sum(np.abs(amps) ** 2))
    state = PureState(amps / math.sqrt(weight), cutoff)
    return SubtractionResult(state=state, beta0=beta_of(eps0), success_weight=weight)


def ancilla_subtract_exact(params: SchemeParams) -> Tuple[PureState, float]:
    """Exact two-mode conditional state ``(a+² - a-²) S+ S- |00>``.

    Returns the normalized two-mode state (mode-major ordering) and the
    squared norm of the unnormalized vector.  No small-``eps_minus``
    expansion is involved; the construction is exact matrix application
    with two levels of headroom per mode.
    """
    ep, em, n = params.eps_plus, params.eps_minus, params.cutoff
    if ep == 0.0 and em == 0.0:
        raise ZeroStateError("both squeezings vanish: (a+² - a-²)|00> = 0")
    top = n + 2
    cp = fock._squeezed_vacuum_amps(ep, top)
    cm = fock._squeezed_vacuum_amps(em, top)
    if ep != 0.0:
        fock.squeezed_vacuum(ep, n)
    if em != 0.0:
        fock.squeezed_vacuum(em, n)
    psi = np.outer(cp, cm)  # psi[n_plus, n_minus]
    a2 = fock._ladder_matrix(top + 1)
    a2 = a2 @ a2
    w = a2 @ psi - psi @ a2.T
    w = w[: n + 1, : n + 1]
    weight = float(np.sum(np.abs(w) ** 2))
    if weight < 1e-300:
        raise ZeroStateError("conditional two-mode state has zero norm")
    state = PureState(w.reshape(-1) / math.sqrt(weight), n, n_modes=2)
    return state, weight


def reduce_to_main(two_mode: PureState) -> DensityMatrix:
    """Main-mode density matrix: partial trace of |psi><psi| over the ancilla."""
    if two_mode.n_modes != 2:
        raise InvalidArgumentError("reduce_to_main expects a two-mode state")
    return fock.partial_trace(two_mode.to_density(), keep="plus")


def approx_phi(params: SchemeParams) -> PureState:
    """Normalized ``|Phi> = S+(e+)(e+ a†² + 1 - e-/beta+)|0>``.

    First-order-in-``eps_minus`` approximation of the main-mode ket; exact
    when ``eps_minus = 0`` and equal to ``S|2>`` when ``eps_minus = beta_plus``.
    """
    ep, em, n = params.eps_plus, params.eps_minus, params.cutoff
    if ep == 0.0:
        raise ZeroStateError("approx_phi needs eps_plus != 0")
    coeff0 = 1.0 - em / params.beta_plus
    v = np.zeros(n + 1, dtype=complex)
    v[0] = coeff0
    v[2] = math.sqrt(2.0) * ep
    nrm = np.linalg.norm(v)
    if nrm < 1e-12:
        raise ZeroStateError("both superposition coefficients vanish")
    s_op = fock.squeeze_operator(ep, n)
    w = s_op.entries @ v
    return PureState(w / np.linalg.norm(w), n)


def mixture_weight_c0(rho_plus: DensityMatrix, phi: PureState) -> float:
    """Mixture weight ``C0 = 1 - <Phi|rho_plus|Phi>``, clamped to [0, 1].

    Reproduces C0 = 0 for the pure (eps_minus = 0) case and C0 = 1/2 for
    the completely mixed large-separation limit.
    """
    if rho_plus.cutoff != phi.cutoff or rho_plus.n_modes != 1 or phi.n_modes != 1:
        raise InvalidArgumentError("rho_plus and phi must share a single-mode space")
    f = float(np.real(phi.amplitudes.conj() @ rho_plus.entries @ phi.amplitudes))
    return min(1.0, max(0.0, 1.0 - f))


def coherent_ancilla_subtract(eps: Union[float, SqueezeParam], alpha: complex,
                              cutoff: int) -> Tuple[PureState, PureState]:
    """Coherent-ancilla scheme: ``(a² - alpha²) S(eps)|0>`` in mode A.

    Because the coherent state is an eigenstate of ``a``, the two-mode
    output is exactly ``state_a ⊗ |alpha>`` with no entanglement; alpha
    plays the role the ancilla squeezing has in the squeezed scheme.
    """
    eps = _eps_value(eps)
    alpha = complex(alpha)
    if eps == 0.0 and alpha == 0:
        raise ZeroStateError("(a² - 0)|0> = 0: need eps != 0 or alpha != 0")
    c = fock._squeezed_vacuum_amps(eps, cutoff + 2)
    if eps != 0.0:
        fock.squeezed_vacuum(eps, cutoff)
    n = np.arange(cutoff + 1)
    w = np.sqrt((n + 1.0) * (n + 2.0)) * c[n + 2] - (alpha ** 2) * c[: cutoff + 1]
    nrm = np.linalg.norm(w)
    if nrm < 1e-300:
        raise ZeroStateError("coherent-ancilla subtraction produced the zero state")
    state_a = PureState(w / nrm, cutoff)
    two_mode = fock.tensor(state_a, fock.coherent_state(alpha, cutoff))
    return state_a, two_mode


def lossy_state(params: SchemeParams) -> GenerationResult:
    """Full pipeline: exact subtraction, reduction, then transmission-eta loss.

    ``success_weight`` and ``c0`` are evaluated before the loss channel.
    """
    two_mode, weight = ancilla_subtract_exact(params)
    rho = reduce_to_main(two_mode)
    if params.eps_plus != 0.0:
        phi = approx_phi(params)
        c0 = mixture_weight_c0(rho, phi)
    else:
        # No main-mode squeezing: |Phi> is undefined, the mixture picture
        # does not apply.  Report the degenerate value 1.
        c0 = 1.0
    rho_lossy = fock.apply_loss(rho, params.eta)
    return GenerationResult(rho_plus=rho_lossy, success_weight=weight, c0=c0)


@dataclass(frozen=True)
class DeltaTableRow:
    """One user-supplied operating point: time separation and squeezings."""

    delta_ns: float
    eps_plus: float
    eps_minus: float


def load_delta_table(path) -> list:
    """Read a CSV table mapping time separations to effective squeezings.

    Expected header: ``delta_ns,eps_plus,eps_minus``.  The mapping itself
    comes from outside (a multimode calculation or measurement); this
    package only consumes it.
    """
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "delta_ns,eps_plus,eps_minus":
            raise InvalidArgumentError(
                "delta table must start with header 'delta_ns,eps_plus,eps_minus', "
                f"got {header!r}")
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise InvalidArgumentError(
                    f"delta table row {line_no}: expected 3 columns, got {len(parts)}")
            try:
                delta_ns, ep, em = (float(p) for p in parts)
            except ValueError as exc:
                raise InvalidArgumentError(f"delta table row {line_no}: {exc}") from exc
            if delta_ns < 0:
                raise InvalidArgumentError(f"delta table row {line_no}: delta_ns < 0")
            if not (abs(ep) < 1 and abs(em) < 1):
                raise InvalidArgumentError(
                    f"delta table row {line_no}: squeezings must satisfy |eps| < 1")
            rows.append(DeltaTableRow(delta_ns, ep, em))
    if not rows:
        raise InvalidArgumentError("delta table contains no rows")
    return rows
