"""Conditional-state generation: subtraction identities, reduction, mixing."""

import math

import numpy as np
import pytest

import catforge as cf
from catforge.errors import InvalidArgumentError, ZeroStateError
from catforge.generate import beta_of, load_delta_table


def trace_distance(a, b):
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a - b))))


def purity_of(rho):
    return float(np.trace(rho.entries @ rho.entries).real)


# ---------------------------------------------------------------------------
# single-mode two-photon subtraction
# ---------------------------------------------------------------------------

def test_single_subtraction_rejects_zero_eps():
    with pytest.raises(ZeroStateError):
        cf.two_photon_subtract_single(0.0, 20)


def test_single_subtraction_state_content():
    # a^2 S|0> is S applied to (|0> + sqrt(2) eps |2>)/sqrt(1 + 2 eps^2)
    res = cf.two_photon_subtract_single(0.3, 30)
    s = cf.squeeze_operator(0.3, 30).entries
    v = np.zeros(31, dtype=complex)
    v[0] = 1.0
    v[2] = math.sqrt(2.0) * 0.3
    expected = s @ v / math.sqrt(1.0 + 2.0 * 0.3 ** 2)
    assert np.linalg.norm(res.state.amplitudes - expected) < 1e-9


def test_single_subtraction_beta0():
    res = cf.two_photon_subtract_single(0.3, 30)
    assert res.beta0 == pytest.approx(0.3 / 0.91, rel=1e-12)
    assert res.beta0 == pytest.approx(0.32967, abs=5e-6)


def test_single_subtraction_operator_identity_cutoff_40():
    # || a^2 S|0>  -  beta0 S (eps a†^2 + 1)|0> || at cutoff 40
    for eps in (0.1, 0.3, 0.6):
        res = cf.two_photon_subtract_single(eps, 40)
        lhs = res.state.amplitudes * math.sqrt(res.success_weight)
        s = cf.squeeze_operator(eps, 40).entries
        v = np.zeros(41, dtype=complex)
        v[0] = 1.0
        v[2] = math.sqrt(2.0) * eps
        rhs = res.beta0 * (s @ v)
        assert np.linalg.norm(lhs - rhs) < 1e-9


def test_single_subtraction_success_weight_closed_form():
    # ||a^2 S|0>||^2 = beta0^2 (1 + 2 eps^2)
    for eps in (0.1, 0.3, 0.5):
        res = cf.two_photon_subtract_single(eps, 40)
        assert res.success_weight == pytest.approx(
            beta_of(eps) ** 2 * (1 + 2 * eps ** 2), rel=1e-9)


# ---------------------------------------------------------------------------
# exact two-mode subtraction
# ---------------------------------------------------------------------------

def test_ancilla_exact_rejects_double_zero():
    with pytest.raises(ZeroStateError):
        cf.ancilla_subtract_exact(cf.SchemeParams(eps_plus=0.0, eps_minus=0.0))


def test_ancilla_exact_unentangled_when_ancilla_unsqueezed():
    params = cf.SchemeParams(eps_plus=0.3, eps_minus=0.0, cutoff=20)
    two_mode, weight = cf.ancilla_subtract_exact(params)
    single = cf.two_photon_subtract_single(0.3, 20)
    expected = cf.tensor(single.state, cf.vacuum(20))
    assert np.linalg.norm(two_mode.amplitudes - expected.amplitudes) < 1e-10
    assert weight == pytest.approx(single.success_weight, rel=1e-10)


def test_ancilla_exact_equal_squeezing_structure():
    # (a+^2 - a-^2) S S |00>  is proportional to  S+S- (|2,0> - |0,2>)/sqrt(2)
    n = 24
    params = cf.SchemeParams(eps_plus=0.3, eps_minus=0.3, cutoff=n)
    two_mode, _ = cf.ancilla_subtract_exact(params)
    s = cf.squeeze_operator(0.3, n).entries
    mat = (np.outer(s[:, 2], s[:, 0]) - np.outer(s[:, 0], s[:, 2])) / math.sqrt(2)
    expected = mat.reshape(-1)
    phase = np.vdot(expected, two_mode.amplitudes)
    phase /= abs(phase)
    assert np.linalg.norm(two_mode.amplitudes - phase * expected) < 1e-9


def test_ancilla_exact_success_weight_frozen_and_symmetric():
    # matrix-norm oracle value at (0.3, 0): beta0^2 (1 + 2 eps^2) = 0.12824538
    _, w = cf.ancilla_subtract_exact(cf.SchemeParams(eps_plus=0.3, eps_minus=0.0, cutoff=24))
    assert w == pytest.approx(0.1282453809923, abs=1e-10)
    for a, b in ((0.3, 0.0), (0.25, 0.1), (0.2, 0.15)):
        _, w1 = cf.ancilla_subtract_exact(cf.SchemeParams(eps_plus=a, eps_minus=b, cutoff=24))
        _, w2 = cf.ancilla_subtract_exact(cf.SchemeParams(eps_plus=b, eps_minus=a, cutoff=24))
        assert w1 == pytest.approx(w2, rel=1e-10)


# ---------------------------------------------------------------------------
# reduction to the main mode
# ---------------------------------------------------------------------------

def test_reduction_pure_when_unentangled():
    params = cf.SchemeParams(eps_plus=0.3, eps_minus=0.0, cutoff=20)
    two_mode, _ = cf.ancilla_subtract_exact(params)
    rho = cf.reduce_to_main(two_mode)
    assert purity_of(rho) == pytest.approx(1.0, abs=1e-9)


def test_reduction_completely_mixed_limit():
    n = 24
    params = cf.SchemeParams(eps_plus=0.3, eps_minus=0.3, cutoff=n)
    rho = cf.reduce_to_main(cf.ancilla_subtract_exact(params)[0])
    s = cf.squeeze_operator(0.3, n).entries
    target = 0.5 * (np.outer(s[:, 2], s[:, 2].conj()) + np.outer(s[:, 0], s[:, 0].conj()))
    assert trace_distance(rho.entries, target) < 1e-9


def test_reduction_purity_monotone_in_ancilla_squeezing():
    purities = []
    for em in np.linspace(0.0, 0.3, 10):
        params = cf.SchemeParams(eps_plus=0.3, eps_minus=float(em), cutoff=20)
        rho = cf.reduce_to_main(cf.ancilla_subtract_exact(params)[0])
        purities.append(purity_of(rho))
    assert all(a >= b - 1e-12 for a, b in zip(purities, purities[1:]))
    assert purities[0] == pytest.approx(1.0, abs=1e-9)
    assert purities[-1] == pytest.approx(0.5, abs=1e-6)


def test_reduce_rejects_single_mode():
    with pytest.raises(InvalidArgumentError):
        cf.reduce_to_main(cf.vacuum(10))


# ---------------------------------------------------------------------------
# approximate |Phi> and mixture weight
# ---------------------------------------------------------------------------

def test_phi_reduces_to_single_subtraction():
    params = cf.SchemeParams(eps_plus=0.3, eps_minus=0.0, cutoff=24)
    phi = cf.approx_phi(params)
    single = cf.two_photon_subtract_single(0.3, 24).state
    assert np.linalg.norm(phi.amplitudes - single.amplitudes) < 1e-10


def test_phi_at_full_suppression_is_squeezed_two():
    params = cf.SchemeParams(eps_plus=0.3, eps_minus=beta_of(0.3), cutoff=24)
    phi = cf.approx_phi(params)
    s2 = cf.squeeze_operator(0.3, 24).entries[:, 2]
    assert np.linalg.norm(phi.amplitudes - s2 / np.linalg.norm(s2)) < 1e-9


def test_phi_requires_main_squeezing():
    with pytest.raises(ZeroStateError):
        cf.approx_phi(cf.SchemeParams(eps_plus=0.0, eps_minus=0.1))


def test_phi_overlaps_exact_state():
    params = cf.SchemeParams(eps_plus=0.3, eps_minus=0.1, cutoff=24)
    rho = cf.reduce_to_main(cf.ancilla_subtract_exact(params)[0])
    phi = cf.approx_phi(params)
    f = float(np.real(phi.amplitudes.conj() @ rho.entries @ phi.amplitudes))
    assert f >= 0.99


def test_phi_error_vanishes_at_least_quadratically():
    # The neglected terms are second order in the ancilla squeezing, so the
    # trace distance to the exact reduced state must obey d <= K eps_minus^2
    # on [0, 0.15].  Measured ratios d/eps^2 peak at 0.35 (the scaling is in
    # fact cubic for small eps_minus); K = 0.5 leaves margin while still
    # catching any first-order error.
    ems = np.array([0.01, 0.03, 0.06, 0.09, 0.12, 0.15])
    dists = []
    for em in ems:
        params = cf.SchemeParams(eps_plus=0.3, eps_minus=float(em), cutoff=24)
        rho = cf.reduce_to_main(cf.ancilla_subtract_exact(params)[0])
        phi = cf.approx_phi(params)
        dists.append(trace_distance(rho.entries, phi.to_density().entries))
    dists = np.array(dists)
    assert np.all(dists <= 0.5 * ems ** 2)
    assert np.all(np.diff(dists) > 0)


def test_c0_pure_case_zero():
    params = cf.SchemeParams(eps_plus=0.3, eps_minus=0.0, cutoff=20)
    rho = cf.reduce_to_main(cf.ancilla_subtract_exact(params)[0])
    phi = cf.approx_phi(params)
    assert cf.mixture_weight_c0(rho, phi) == pytest.approx(0.0, abs=1e-9)


def test_c0_half_in_mixed_limit():
    n = 24
    params = cf.SchemeParams(eps_plus=0.3, eps_minus=0.3, cutoff=n)
    rho = cf.reduce_to_main(cf.ancilla_subtract_exact(params)[0])
    s2 = cf.squeeze_operator(0.3, n).entries[:, 2]
    phi = cf.PureState(s2 / np.linalg.norm(s2), n)
    assert cf.mixture_weight_c0(rho, phi) == pytest.approx(0.5, abs=1e-6)


def test_c0_monotone_in_ancilla_squeezing():
    vals = []
    for em in np.linspace(0.0, 0.3, 10):
        params = cf.SchemeParams(eps_plus=0.3, eps_minus=float(em), cutoff=20)
        rho = cf.reduce_to_main(cf.ancilla_subtract_exact(params)[0])
        vals.append(cf.mixture_weight_c0(rho, cf.approx_phi(params)))
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------------
# coherent-ancilla scheme
# ---------------------------------------------------------------------------

def test_coherent_ancilla_reduces_to_single_subtraction():
    state_a, _ = cf.coherent_ancilla_subtract(0.3, 0.0, 24)
    single = cf.two_photon_subtract_single(0.3, 24).state
    assert np.linalg.norm(state_a.amplitudes - single.amplitudes) < 1e-10


def test_coherent_ancilla_no_squeezing_gives_vacuum():
    state_a, _ = cf.coherent_ancilla_subtract(0.0, 0.5, 20)
    # (a^2 - alpha^2)|0> = -alpha^2 |0>
    assert abs(abs(state_a.amplitudes[0]) - 1.0) < 1e-12


def test_coherent_ancilla_rejects_trivial_case():
    with pytest.raises(ZeroStateError):
        cf.coherent_ancilla_subtract(0.0, 0.0, 20)


def test_coherent_ancilla_exact_application_stays_product():
    # oracle: apply the exact (a_A^2 - a_B^2) matrix to S|0> ⊗ |alpha> with
    # headroom and check the reduced state is pure, unlike the squeezed case
    n, eps, alpha = 24, 0.3, 0.5
    top = n + 2
    a = np.diag(np.sqrt(np.arange(1.0, top + 1)), 1)
    a2 = a @ a
    sv = np.zeros(top + 1, dtype=complex)
    sv[: n + 3] = cf.fock._squeezed_vacuum_amps(eps, n + 2)
    coh = cf.fock._coherent_amps(alpha, top)
    psi = np.outer(sv, coh)
    w = a2 @ psi - psi @ a2.T
    w = w[: n + 1, : n + 1]
    w /= np.linalg.norm(w)
    rho_a = w @ w.conj().T
    assert float(np.trace(rho_a @ rho_a).real) == pytest.approx(1.0, abs=1e-9)
    # and the packaged product matches the exact two-mode application
    state_a, two_mode = cf.coherent_ancilla_subtract(eps, alpha, n)
    exact = cf.PureState(w.reshape(-1), n, n_modes=2)
    overlap = abs(np.vdot(exact.amplitudes, two_mode.amplitudes))
    assert overlap == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------------------
# lossy pipeline
# ---------------------------------------------------------------------------

def test_lossy_state_eta_one_matches_lossless():
    params = cf.SchemeParams(eps_plus=0.3, eps_minus=0.1, eta=1.0, cutoff=20)
    res = cf.lossy_state(params)
    rho = cf.reduce_to_main(cf.ancilla_subtract_exact(params)[0])
    assert np.max(np.abs(res.rho_plus.entries - rho.entries)) < 1e-12


def test_lossy_state_eta_zero_gives_vacuum():
    params = cf.SchemeParams(eps_plus=0.3, eps_minus=0.1, eta=0.0, cutoff=20)
    res = cf.lossy_state(params)
    assert res.rho_plus.entries[0, 0].real == pytest.approx(1.0, abs=1e-10)


def test_lossy_state_keeps_negativity_at_paper_efficiency():
    params = cf.SchemeParams(eps_plus=0.3, eps_minus=0.0, eta=0.85, cutoff=24)
    res = cf.lossy_state(params)
    axis = np.linspace(-4, 4, 81)
    _, _, w_min = cf.min_wigner(cf.wigner(res.rho_plus, axis, axis))
    assert w_min < 0.0


# ---------------------------------------------------------------------------
# delta table loader
# ---------------------------------------------------------------------------

def test_delta_table_round_trip(tmp_path):
    path = tmp_path / "table.csv"
    path.write_text("delta_ns,eps_plus,eps_minus\n0.0,0.33,0.0\n32.0,0.3,0.1\n")
    rows = load_delta_table(path)
    assert len(rows) == 2
    assert rows[1].delta_ns == 32.0
    assert rows[1].eps_minus == 0.1


def test_delta_table_reports_bad_row(tmp_path):
    path = tmp_path / "table.csv"
    path.write_text("delta_ns,eps_plus,eps_minus\n0.0,0.33,0.0\n32.0,oops,0.1\n")
    with pytest.raises(InvalidArgumentError, match="row 3"):
        load_delta_table(path)


def test_delta_table_rejects_bad_header(tmp_path):
    path = tmp_path / "table.csv"
    path.write_text("delta,ep,em\n0.0,0.33,0.0\n")
    with pytest.raises(InvalidArgumentError, match="header"):
        load_delta_table(path)
