"""Wigner maps, photon statistics, fidelities and cat fitting."""

import json
import math

import numpy as np
import pytest

import catforge as cf
from catforge.analysis import wigner_to_csv, wigner_to_document, photon_distribution_to_csv
from catforge.errors import InvalidArgumentError
from catforge.generate import beta_of


def random_density(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return cf.DensityMatrix(rho / np.trace(rho).real, dim - 1)


def eq1_state(eps, cutoff):
    return cf.two_photon_subtract_single(eps, cutoff).state


# ---------------------------------------------------------------------------
# wigner
# ---------------------------------------------------------------------------

def test_wigner_vacuum_origin():
    g = cf.wigner(cf.vacuum(12), np.array([0.0]), np.array([0.0]))
    assert g.values[0, 0] == pytest.approx(1.0 / math.pi, rel=1e-12)


def test_wigner_single_photon_origin():
    g = cf.wigner(cf.fock_state(1, 12), np.array([0.0]), np.array([0.0]))
    assert g.values[0, 0] == pytest.approx(-1.0 / math.pi, rel=1e-12)


def test_wigner_parity_identity_random_states():
    rng = np.random.default_rng(42)
    for _ in range(100):
        rho = random_density(13, rng)
        w00 = cf.wigner(rho, np.array([0.0]), np.array([0.0])).values[0, 0]
        parity = np.sum((-1.0) ** np.arange(13) * np.diag(rho.entries).real) / math.pi
        assert abs(w00 - parity) < 1e-8


def test_wigner_grid_normalization():
    axis = np.arange(-6.0, 6.0 + 0.025, 0.05)
    rho = eq1_state(0.3, 30)
    grid = cf.wigner(rho, axis, axis)
    assert grid.integral() == pytest.approx(1.0, abs=1e-3)


def test_wigner_bounded_by_one_over_pi():
    axis = np.linspace(-5, 5, 101)
    for state in (cf.vacuum(15), cf.fock_state(3, 15), eq1_state(0.4, 30)):
        grid = cf.wigner(state, axis, axis)
        assert np.max(np.abs(grid.values)) <= 1.0 / math.pi + 1e-6


def test_wigner_gaussian_profile_of_vacuum():
    xs = np.linspace(-3, 3, 61)
    grid = cf.wigner(cf.vacuum(10), xs, np.array([0.0]))
    expected = np.exp(-xs ** 2) / math.pi
    assert np.max(np.abs(grid.values[:, 0] - expected)) < 1e-12


def test_wigner_rejects_two_mode():
    rho = cf.tensor(cf.vacuum(5), cf.vacuum(5)).to_density()
    with pytest.raises(InvalidArgumentError):
        cf.wigner(rho, np.array([0.0]), np.array([0.0]))


# ---------------------------------------------------------------------------
# photon statistics
# ---------------------------------------------------------------------------

def test_photon_distribution_even_parity_of_subtracted_state():
    p = cf.photon_distribution(eq1_state(0.3, 30))
    assert np.all(np.abs(p[1::2]) < 1e-10)
    assert np.sum(p) == pytest.approx(1.0, abs=1e-10)


def test_photon_distribution_small_n_suppression():
    base = cf.SchemeParams(eps_plus=0.3, eps_minus=0.0, cutoff=24)
    full = cf.SchemeParams(eps_plus=0.3, eps_minus=beta_of(0.3), cutoff=24)
    p_base = cf.photon_distribution(cf.approx_phi(base))
    p_full = cf.photon_distribution(cf.approx_phi(full))
    assert p_full[0] < p_base[0]


def test_photon_distribution_extends_to_four():
    p = cf.photon_distribution(eq1_state(0.3, 30))
    assert p[4] > 1e-3


def test_mean_photon_vacuum():
    assert cf.mean_photon(cf.vacuum(10)) == 0.0


def test_mean_photon_squeezed_vacuum_closed_form():
    r = math.atanh(0.3)
    assert cf.mean_photon(cf.squeezed_vacuum(0.3, 30)) == pytest.approx(
        math.sinh(r) ** 2, abs=1e-9)
    assert math.sinh(r) ** 2 == pytest.approx(0.0989, abs=1e-4)


def test_mean_photon_trends_with_ancilla_squeezing():
    n_plus, n_minus = [], []
    for em in np.linspace(0.0, 0.25, 6):
        params = cf.SchemeParams(eps_plus=0.3, eps_minus=float(em), cutoff=20)
        two_mode, _ = cf.ancilla_subtract_exact(params)
        rho = two_mode.to_density()
        n_plus.append(cf.mean_photon(cf.partial_trace(rho, "plus")))
        n_minus.append(cf.mean_photon(cf.partial_trace(rho, "minus")))
    # main mode accumulates photons first; the ancilla occupation then rises
    assert all(b > a for a, b in zip(n_plus, n_plus[1:]))
    assert all(b > a for a, b in zip(n_minus[1:], n_minus[2:]))
    assert all(np - nm > 0 for np_, nm in zip(n_plus, n_minus) for np in [np_])


# ---------------------------------------------------------------------------
# fidelity / purity
# ---------------------------------------------------------------------------

def test_fidelity_pure_self():
    st = eq1_state(0.3, 20)
    assert cf.fidelity(st.to_density(), st) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_orthogonal():
    assert cf.fidelity(cf.vacuum(10).to_density(), cf.fock_state(1, 10)) == 0.0


def test_fidelity_half_mixture():
    rho = 0.5 * (cf.fock_state(0, 10).to_density().entries
                 + cf.fock_state(2, 10).to_density().entries)
    rho = cf.DensityMatrix(rho, 10)
    assert cf.fidelity(rho, cf.vacuum(10)) == pytest.approx(0.5, abs=1e-12)


def test_fidelity_symmetric_and_phase_invariant():
    rng = np.random.default_rng(9)
    a = cf.PureState(rng.standard_normal(9) + 1j * rng.standard_normal(9), 8).normalized()
    b = cf.PureState(rng.standard_normal(9) + 1j * rng.standard_normal(9), 8).normalized()
    f_ab = cf.fidelity(a.to_density(), b)
    f_ba = cf.fidelity(b.to_density(), a)
    assert f_ab == pytest.approx(f_ba, rel=1e-12)
    phased = cf.PureState(np.exp(1j * 0.73) * b.amplitudes, 8)
    assert cf.fidelity(a.to_density(), phased) == pytest.approx(f_ab, rel=1e-12)


def test_fidelity_cutoff_mismatch():
    with pytest.raises(InvalidArgumentError):
        cf.fidelity(cf.vacuum(10).to_density(), cf.vacuum(11))


def test_fidelity_mixed_agrees_with_pure_case():
    rng = np.random.default_rng(17)
    rho = random_density(9, rng)
    target = cf.PureState(rng.standard_normal(9) + 1j * rng.standard_normal(9), 8).normalized()
    f_pure = cf.fidelity(rho, target)
    f_mixed = cf.fidelity_mixed(rho, target.to_density())
    # agreement limited by sqrtm accuracy on near-singular products
    assert f_mixed == pytest.approx(f_pure, abs=1e-7)


def test_purity_values():
    st = eq1_state(0.3, 20)
    assert cf.purity(st.to_density()) == pytest.approx(1.0, abs=1e-10)
    rho = 0.5 * (cf.fock_state(0, 10).to_density().entries
                 + cf.fock_state(2, 10).to_density().entries)
    assert cf.purity(cf.DensityMatrix(rho, 10)) == pytest.approx(0.5, abs=1e-12)


def test_purity_monotone_under_loss():
    st = eq1_state(0.3, 24)
    rho = st.to_density()
    purities = [cf.purity(cf.apply_loss(rho, eta))
                for eta in np.linspace(1.0, 0.5, 6)]
    assert all(a > b for a, b in zip(purities, purities[1:]))


# ---------------------------------------------------------------------------
# cat fitting
# ---------------------------------------------------------------------------

def test_best_cat_fit_self_fit():
    alpha = math.sqrt(1.2)
    rho = cf.cat_state(alpha, "even", 30).to_density()
    fit = cf.best_cat_fit(rho, "even", np.arange(0.2, 2.0, 0.05))
    assert fit.size == pytest.approx(1.2, abs=0.01)
    assert fit.fidelity_star == pytest.approx(1.0, abs=1e-6)


def test_best_cat_fit_refinement_resolution():
    rho = cf.cat_state(1.03, "even", 30).to_density()
    fit = cf.best_cat_fit(rho, "even", np.arange(0.2, 2.0, 0.1))
    assert abs(fit.alpha_star - 1.03) <= 0.005 + 1e-12


def test_best_cat_fit_odd_parity():
    rho = cf.cat_state(0.9, "odd", 30).to_density()
    fit = cf.best_cat_fit(rho, "odd", np.arange(0.0, 2.0, 0.05))
    assert fit.parity == "odd"
    assert fit.alpha_star == pytest.approx(0.9, abs=0.01)


def test_best_cat_fit_empty_grid():
    with pytest.raises(InvalidArgumentError):
        cf.best_cat_fit(cf.vacuum(10).to_density(), "even", [])


def test_best_cat_fit_invariant_under_target_phase():
    # the fit depends on the state only through fidelities, which are
    # phase-invariant; feeding the same rho must reproduce the same fit
    st = eq1_state(0.35, 30)
    rho1 = st.to_density()
    rho2 = cf.PureState(np.exp(1j * 1.1) * st.amplitudes, 30).to_density()
    grid = np.arange(0.2, 2.0, 0.05)
    f1 = cf.best_cat_fit(rho1, "even", grid)
    f2 = cf.best_cat_fit(rho2, "even", grid)
    assert f1.alpha_star == f2.alpha_star
    assert f1.fidelity_star == pytest.approx(f2.fidelity_star, rel=1e-12)


def test_loss_monotonicity_of_cat_fidelity():
    st = eq1_state(0.35, 30)
    fit = cf.best_cat_fit(st.to_density(), "even", np.arange(0.2, 2.0, 0.05))
    cat = cf.cat_state(fit.alpha_star, "even", 30)
    fids = [cf.fidelity(cf.apply_loss(st.to_density(), eta), cat)
            for eta in np.linspace(1.0, 0.7, 7)]
    assert all(a >= b - 1e-12 for a, b in zip(fids, fids[1:]))


# ---------------------------------------------------------------------------
# min wigner
# ---------------------------------------------------------------------------

def test_min_wigner_vacuum_nonnegative():
    axis = np.linspace(-4, 4, 81)
    _, _, val = cf.min_wigner(cf.wigner(cf.vacuum(15), axis, axis))
    assert val >= -1e-12


def test_min_wigner_subtracted_state_negative_off_origin():
    axis = np.arange(-5.0, 5.0 + 0.025, 0.05)
    grid = cf.wigner(eq1_state(0.3, 30), axis, axis)
    x, p, val = cf.min_wigner(grid)
    assert val < 0
    # lobes lie on the x axis; the interference dips sit on the p axis
    assert abs(x) < 0.06
    assert abs(p) > 0.2
    assert val >= -1.0 / math.pi - 1e-6


def test_min_wigner_tie_breaking():
    vals = np.zeros((3, 3))
    vals[0, 1] = -1.0  # x = -1, p = 0
    vals[2, 1] = -1.0  # x = +1, p = 0  (same |x|: signed order decides)
    grid = cf.WignerGrid(np.array([-1.0, 0.0, 1.0]), np.array([-1.0, 0.0, 1.0]), vals)
    x, p, val = cf.min_wigner(grid)
    assert val == -1.0
    assert (x, p) == (-1.0, 0.0)


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------

def test_wigner_csv_and_document(tmp_path):
    axis = np.linspace(-1, 1, 5)
    grid = cf.wigner(cf.vacuum(8), axis, axis)
    path = tmp_path / "w.csv"
    wigner_to_csv(grid, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "x,p,w"
    assert len(lines) == 1 + 25
    x0, p0, w0 = (float(v) for v in lines[1].split(","))
    assert (x0, p0) == (-1.0, -1.0)
    assert w0 == grid.values[0, 0]

    doc = json.loads(json.dumps(wigner_to_document(grid)))
    assert doc["x_axis"] == list(axis)
    assert np.array_equal(np.array(doc["values"]), grid.values)


def test_photon_distribution_csv(tmp_path):
    p = cf.photon_distribution(eq1_state(0.3, 14))
    path = tmp_path / "pn.csv"
    photon_distribution_to_csv(p, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "n,p"
    assert len(lines) == 16
    n1 = lines[2].split(",")
    assert n1[0] == "1" and float(n1[1]) == 0.0
