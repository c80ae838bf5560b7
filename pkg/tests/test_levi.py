import json
import math

import numpy as np
import pytest

from cuspdisc import (FiniteType, FunctionPair, Holomorphic, ParameterError, RePart, TubeFailure, Zero,
                      build_bump, finite_type_thresholds, laplacian_grid)
from cuspdisc.levi import (ConeBumpSpec, check_cone_comparability, check_condition_2_2, compare_bump,
                           cone_samples, cutoff_derivative_bounds, max_admissible_eta, sector_negative,
                           subharmonic_on_disc, write_threshold_csv)

TUBE = TubeFailure(a=0.4, b=0.8)
EXP08 = FunctionPair.exp(0.8)
CONE = ConeBumpSpec(EXP08, 0.5, 0.8)
REGION = (0.0015, 0.0615, -0.03, 0.03)
PAPER_REGION = (0.05, 0.3, -0.05, 0.05)
HARMONIC = RePart(g=Holomorphic.of_pair(FunctionPair.power(1)))  # Re z^2


def test_laplacian_of_abs_z_squared():
    rep = laplacian_grid(FiniteType(m=1, p=1, c=0.0), (0.1, 0.5, -0.2, 0.2), n=51)
    assert rep.min_laplacian == pytest.approx(4.0, rel=0.01)
    assert rep.holds() and not rep.violation_points


def test_laplacian_of_harmonic():
    rep = laplacian_grid(HARMONIC, (0.1, 0.5, -0.2, 0.2), n=51)
    assert abs(rep.min_laplacian) < 1e-9
    assert abs(rep.min_exact) < 1e-12


@pytest.mark.parametrize("method", ["stencil", "stencil9", "exact"])
def test_stencils_match_closed_form_on_smooth_region(method):
    m = FiniteType(m=2, p=1, c=0.5)
    rep = laplacian_grid(m, (0.2, 0.6, -0.2, 0.2), n=101, method=method)
    assert rep.stencil_vs_exact <= 0.01 * rep.scale
    assert rep.method == method


def test_region_guards():
    with pytest.raises(ValueError):
        laplacian_grid(TUBE, (0.0, 0.1, -0.05, 0.05), n=51)
    with pytest.raises(ValueError):
        laplacian_grid(TUBE, (0.1, 0.2, -0.02, 0.02), n=51, method="stencil9")
    with pytest.raises(ValueError):
        laplacian_grid(TUBE, (0.1, 0.2, 0.05, -0.05))
    with pytest.raises(ValueError):
        laplacian_grid(TUBE, (0.1, 0.2, -0.05, 0.05), method="spectral")


def test_tube_failure_subharmonic_near_vertex():
    ex = laplacian_grid(TUBE, REGION, n=201, method="exact")
    assert ex.min_exact >= 0
    s9 = laplacian_grid(TUBE, REGION, n=401, method="stencil9")
    assert s9.holds(1e-8)


def test_tube_failure_five_point_stencil_sees_its_own_error():
    # O(h^2) error on the harmonic part along y = 0 dips just below the 1e-8 bar
    rep = laplacian_grid(TUBE, REGION, n=401, method="stencil")
    assert not rep.holds(1e-8) and rep.holds(1e-6)
    assert rep.min_exact >= 0


@pytest.mark.xfail(strict=True, reason="the cut-off transition makes h strongly superharmonic on this rectangle")
def test_tube_failure_paper_region():
    assert laplacian_grid(TUBE, PAPER_REGION, n=201).holds(1e-8)


def test_tube_failure_paper_region_violations_located():
    rep = laplacian_grid(TUBE, PAPER_REGION, n=201, method="exact")
    assert rep.min_laplacian < -0.1 * rep.scale
    pts = np.array(rep.violation_points)
    assert len(pts) > 0 and np.all(np.abs(pts.imag) > 0)


def test_levi_report_json(tmp_path):
    rep = laplacian_grid(FiniteType(m=1, p=1, c=0.0), (0.1, 0.5, -0.2, 0.2), n=11)
    path = tmp_path / "levi.json"
    rep.to_json(path)
    data = json.loads(path.read_text())
    assert data["n"] == 11 and data["method"] == "stencil"


def test_cone_spec_guards():
    for a, a1 in ((0.8, 0.5), (0.5, 1.0), (0.0, 0.5)):
        with pytest.raises(ParameterError):
            ConeBumpSpec(EXP08, a, a1)
    with pytest.raises(ParameterError):
        ConeBumpSpec(EXP08, 0.5, 0.8, eta=-1)


@pytest.mark.parametrize("pair", [EXP08, FunctionPair.power(2)], ids=["exp", "power"])
def test_conical_cutoff_plateau_and_support(pair):
    cone = ConeBumpSpec(pair, 0.5, 0.8)
    inner = cone_samples(pair, 0.5 - 1e-3, 0.5 - 1e-3 + 1e-6, include_inner=True)
    assert np.all(cone.chi(inner) == 1)
    psi = np.linspace(0.8 * math.pi / 2 + 1e-6, 0.99 * math.pi / 2, 20)
    outer = pair.Fstar(np.outer(np.geomspace(1e-30, 1e-3, 10), np.exp(1j * np.concatenate([psi, -psi]))).ravel())
    assert np.all(cone.chi(outer) == 0)
    mid = cone_samples(pair, 0.5, 0.8)
    chi = cone.chi(mid)
    assert chi.min() >= 0 and chi.max() <= 1 and 0 < chi.mean() < 1


def test_cone_comparability_examples():
    p = FunctionPair.power(2)
    samples = cone_samples(p, 0.0 + 1e-9, 0.5, include_inner=True)
    assert check_cone_comparability(p, 0.5, samples) >= math.cos(math.pi / 4) - 0.01
    assert check_cone_comparability(p, 0.5, np.geomspace(1e-4, 0.1, 10)) == pytest.approx(1.0, abs=1e-15)
    edge = cone_samples(p, 0.99, 0.999)
    assert 0 < check_cone_comparability(p, 0.999, edge) < 0.02


def test_condition_2_2_tube_failure():
    assert check_condition_2_2(TUBE, EXP08, 0.5, 0.8) > 0


def test_condition_2_2_fails_farther_out():
    # the Levi lower bound only holds close enough to the vertex
    far = cone_samples(EXP08, 0.5, 0.8, rho_range=(1e-60, 1e-2))
    assert check_condition_2_2(TUBE, EXP08, 0.5, 0.8, far) < 0


def test_condition_2_2_abs_z_squared():
    p = FunctionPair.power(1)
    # d d-bar |z|^2 = 1, |F| = |z|^2, |F'|^2 = 4 |z|^2: ratio 1/4
    assert check_condition_2_2(FiniteType(m=1, p=1, c=0.0), p, 0.3, 0.6) == pytest.approx(0.25, rel=1e-12)


def test_condition_2_2_harmonic_fails():
    assert check_condition_2_2(HARMONIC, FunctionPair.power(2), 0.3, 0.6) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ParameterError, match="Levi lower bound"):
        build_bump(HARMONIC, ConeBumpSpec(FunctionPair.power(2), 0.3, 0.6, eta=1.0))


def test_build_bump_zero_eta_identity():
    assert build_bump(Zero(), ConeBumpSpec(EXP08, 0.5, 0.8)) == Zero()


def test_cutoff_derivative_bounds():
    b = cutoff_derivative_bounds(CONE, cone_samples(EXP08, 0.5, 0.8))
    assert 0 < b["first"] < 20 and 0 < b["second"] < 20


@pytest.fixture(scope="module")
def bumped():
    eta = max_admissible_eta(TUBE, CONE, REGION, n=201, method="exact")
    return build_bump(TUBE, CONE.with_eta(eta / 2))


def test_bumped_model_bounds_recorded(bumped):
    assert bumped.bounds["levi_lower_constant"] > 0
    assert bumped.bounds["cone_comparability"] >= math.cos(0.8 * math.pi / 2) - 1e-12


def test_bumped_model_comparison(bumped):
    rng = np.random.default_rng(0)
    x = rng.uniform(-0.3, 0.3, 5000)
    y = rng.uniform(-0.3, 0.3, 5000)
    everywhere = x + 1j * y
    inner = cone_samples(EXP08, 0.0, 0.5, n_angle=50, n_radius=100, include_inner=True)
    cmp = compare_bump(bumped, everywhere, inner)
    assert cmp.n_samples >= 10**4
    assert cmp.holds


def test_bumped_real_axis(bumped):
    x = np.array([0.01, 0.05, 0.1]) + 0j
    expected = TUBE(x) - bumped.cone.eta * np.real(EXP08.F(x))
    assert bumped(x) == pytest.approx(expected, rel=1e-14)


def test_bumped_subharmonic(bumped):
    assert laplacian_grid(bumped, REGION, n=201, method="exact").holds(1e-8)
    assert laplacian_grid(bumped, REGION, n=401, method="stencil9").holds(1e-8)


def test_bumped_derivatives_match_differences(bumped):
    z = CONE.pair.Fstar(1e-6 * np.exp(0.6j * math.pi / 2))
    J = bumped.jet(np.array([z]))
    h = 1e-5 * abs(z)
    f = lambda d: bumped(np.array([z + d]))[0]
    assert (f(h) - f(-h)) / (2 * h) == pytest.approx(J.x[0], rel=1e-5)
    assert (f(1j * h) - f(-1j * h)) / (2 * h) == pytest.approx(J.y[0], rel=1e-5)


def test_max_admissible_eta_positive_and_grid_stable():
    e1 = max_admissible_eta(TUBE, CONE, REGION, n=201, method="exact")
    e2 = max_admissible_eta(TUBE, CONE, REGION, n=401, method="exact")
    assert e1 > 0 and e2 > 0
    assert abs(e2 - e1) / e1 < 0.2


def test_max_admissible_eta_harmonic_zero():
    cone = ConeBumpSpec(FunctionPair.power(2), 0.3, 0.6)
    assert max_admissible_eta(HARMONIC, cone, (0.1, 0.5, -0.2, 0.2), n=51, method="exact") == 0.0


def _eta_vs_alpha1():
    return [max_admissible_eta(TUBE, ConeBumpSpec(EXP08, 0.5, a1), REGION, n=201, method="exact")
            for a1 in (0.6, 0.7, 0.8, 0.9)]


def test_max_admissible_eta_grows_with_alpha1():
    etas = _eta_vs_alpha1()
    assert all(b > a for a, b in zip(etas, etas[1:]))


@pytest.mark.xfail(strict=True, reason="measured eta* increases as the cone widens")
def test_max_admissible_eta_non_increasing_in_alpha1():
    etas = _eta_vs_alpha1()
    assert all(b <= a for a, b in zip(etas, etas[1:]))


def test_thresholds_m1_anchor():
    r = finite_type_thresholds(1, 1)
    assert r.c_subharmonic == pytest.approx(-2.0, abs=1e-4)
    # sector: (1 + c) cos^2 + sin^2 < 0 on the cone edge alpha pi / 4
    assert r.c_sector == pytest.approx(-1 / math.cos(1.01 * math.pi / 4) ** 2, abs=1e-5)


def test_thresholds_m2_p1():
    r = finite_type_thresholds(2, 1)
    assert r.c_sector == pytest.approx(-1 / math.cos(1.01 * math.pi / 8) ** 2, abs=1e-5)
    assert r.c_subharmonic == pytest.approx(-8 / 7, abs=1e-5)
    assert r.paper_c_sector == pytest.approx(math.sqrt(2)) and r.paper_c_subharmonic == pytest.approx(4 / 3)
    assert r.sector_flag == "mismatch" and r.subharmonic_flag == "mismatch"


def test_thresholds_predicate_flips():
    r = finite_type_thresholds(2, 1)
    assert sector_negative(2, 1, r.c_sector - 1e-4, 1.01)
    assert not sector_negative(2, 1, r.c_sector + 1e-4, 1.01)
    assert subharmonic_on_disc(2, 1, r.c_subharmonic + 1e-4)
    assert not subharmonic_on_disc(2, 1, r.c_subharmonic - 1e-4)


def test_thresholds_guard_and_csv(tmp_path):
    with pytest.raises(ParameterError):
        finite_type_thresholds(2, 3)
    path = tmp_path / "t.csv"
    write_threshold_csv([finite_type_thresholds(2, 1)], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "m,p,alpha,c_sector,c_subharmonic,paper_c_sector,paper_c_subharmonic"
    assert lines[1].startswith("2,1,1.01,")
