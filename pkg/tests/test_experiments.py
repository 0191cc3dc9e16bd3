import numpy as np
import pytest

from qsot.algebra import AlgebraElement, eigenvalues, identity, is_selfadjoint, trace
from qsot.experiments import (
    EPR_DENSITY,
    LS_EFFECTS,
    AnomalyError,
    depolarize_map,
    depolarize_state,
    diag_state,
    epr_example,
    grid,
    lambda_exact,
    lambda_formula,
    ls_density,
    ls_tangency_scan,
    maximally_mixed,
    mixture_star_density,
    monotonicity_violations,
    noise_cube_density_closed_form,
    noise_sweep,
    noised_star_density,
    prob_ls,
    prob_star,
    psd_sqrt,
    secant_deviation,
    tangency_derivatives,
)
from qsot.linmap import density_of, evaluate, functional_of, identity_map
from qsot.sampling import random_element, random_map, random_state, rng_from
from qsot.sot import star_density


def test_depolarize_edges():
    rng = rng_from(0)
    omega = random_state((3,), rng)
    assert depolarize_state(omega, 0.0).distance(omega) == 0
    assert (density_of(depolarize_state(omega, 1.0)) - identity((3,)) / 3).norm() < 1e-15
    f = random_map((2,), (2,), rng)
    assert depolarize_map(f, 0.0).distance(f) == 0
    b = random_element((2,), rng)
    assert (depolarize_map(f, 1.0).apply(b) - 0.5 * trace(b) * identity((2,))).norm() < 1e-15
    for bad in (-0.1, 1.5, float("nan")):
        with pytest.raises(ValueError):
            depolarize_state(omega, bad)
        with pytest.raises(ValueError):
            depolarize_map(f, bad)


def test_depolarized_state_stays_normalized():
    omega = depolarize_state(diag_state(0.2), 0.4)
    assert abs(evaluate(omega, identity((2,))) - 1) < 1e-15


@pytest.mark.parametrize("p", [0.0, 0.25, 0.7, 1.0])
def test_lambda_at_no_noise(p):
    assert lambda_formula(p, 0.0, 0.0) == -0.5
    assert lambda_exact(p, 0.0, 0.0) == -0.5
    dens = noised_star_density(p, 0.0, 0.0)
    expected = np.array([[p, 0, 0, 0], [0, 0, 0.5, 0], [0, 0.5, 0, 0], [0, 0, 0, 1 - p]])
    assert np.abs(dens.matrix - expected).max() < 1e-15


def test_full_noise_corner():
    assert lambda_formula(0.5, 1.0, 1.0) == 0.0
    dens = noised_star_density(0.5, 1.0, 1.0)
    assert np.abs(dens.matrix - 0.25 * np.eye(4)).max() < 1e-15
    assert eigenvalues(dens).min() > 0


def test_closed_form_matrix_on_small_grid():
    g = np.linspace(0, 1, 5)
    for p in g:
        for d in g:
            for e in g:
                dens = noised_star_density(p, d, e)
                assert np.abs(dens.matrix - noise_cube_density_closed_form(p, d, e)).max() < 1e-14
                assert (dens - mixture_star_density(p, d, e)).norm() < 1e-14
                # middle block eigenvalue oracle
                assert abs(eigenvalues(dens).min() - min(lambda_exact(p, d, e), dens.matrix[0, 0].real, dens.matrix[3, 3].real)) < 1e-14


def test_published_lambda_matches_when_one_noise_vanishes():
    for p in np.linspace(0, 1, 7):
        for x in np.linspace(0, 1, 7):
            assert abs(lambda_formula(p, x, 0.0) - lambda_exact(p, x, 0.0)) < 1e-14
            assert abs(lambda_formula(p, 0.0, x) - lambda_exact(p, 0.0, x)) < 1e-14


def test_noise_sweep_records_sorted_and_consistent():
    recs = noise_sweep(grid(3), grid(3), grid(3))
    assert len(recs) == 27
    assert [(r.p, r.delta, r.epsilon) for r in recs] == sorted((r.p, r.delta, r.epsilon) for r in recs)
    for r in recs:
        assert r.positive == (r.min_eigenvalue >= -1e-10)
    assert monotonicity_violations(recs) == []
    with pytest.raises(ValueError):
        grid(1)


def test_star_density_of_ls_at_maximally_mixed():
    rng = rng_from(1)
    f = random_map((2,), (2,), rng)
    assert (ls_density(f, maximally_mixed(2)) - star_density(f, maximally_mixed(2))).norm() < 1e-15


@pytest.mark.parametrize("p", [0.1, 0.5, 0.8])
def test_ls_density_identity_channel(p):
    d = ls_density(identity_map((2,)), diag_state(p))
    assert abs(d.matrix[1, 2] - np.sqrt(p * (1 - p))) < 1e-15
    assert abs(d.matrix[0, 0] - p) < 1e-15 and abs(d.matrix[3, 3] - (1 - p)) < 1e-15
    assert is_selfadjoint(d)


def test_psd_sqrt_rejects_negative():
    with pytest.raises(ValueError):
        psd_sqrt(AlgebraElement.from_matrix(np.diag([1.0, -0.5])))
    bad = functional_of(AlgebraElement.from_matrix(np.diag([1.5, -0.5])))
    with pytest.raises(ValueError):
        ls_density(identity_map((2,)), bad)


def test_case_a_tangency_point():
    m, n = LS_EFFECTS["a"]
    half_tr = 0.5 * np.trace(m @ n).real
    assert abs(half_tr - 0.38) < 1e-15
    assert abs(prob_star(0.5, m, n) - 0.38) < 1e-12
    assert abs(prob_ls(0.5, m, n) - 0.38) < 1e-12
    d_star, d_ls = tangency_derivatives(m, n)
    assert abs(d_star - d_ls) < 1e-6


@pytest.mark.parametrize("case", ["a", "b"])
def test_ls_curve_is_curved_star_is_linear(case):
    m, n = LS_EFFECTS[case]
    recs = ls_tangency_scan(np.linspace(0, 1, 21), m, n, case)
    ps = [r.p for r in recs]
    assert secant_deviation(ps, [r.prob_star for r in recs]) < 1e-14
    assert secant_deviation(ps, [r.prob_ls for r in recs]) > 1e-6
    assert all(r.case == case for r in recs)


def test_epr_example():
    sot = epr_example()
    assert np.abs(sot.density.matrix - EPR_DENSITY).max() < 1e-15
    assert np.abs(eigenvalues(sot.density) - [0, 0, 0, 1]).max() < 1e-14
    assert (sot.marginal_left() - 0.5 * identity((2,))).norm() < 1e-15


def test_anomaly_on_nan_radicand():
    with pytest.raises(AnomalyError):
        lambda_formula(0.5, float("nan"), 0.0)
    # the radicand is bounded below by 4(1-δ)², even off the unit cube
    assert np.isfinite(lambda_formula(0.5, 3.0, -2.0))
