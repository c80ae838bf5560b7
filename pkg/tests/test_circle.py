import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuspdisc import BoundarySamples, CircleGrid, RegularityError, hilbert_T1, poisson_eval, radial_derivative_at_1
from cuspdisc.circle import analyticity_defect, dtn_quadrature_at_1, holder_slope, tail_energy

G = CircleGrid(4096)


def samples(f, grid=G):
    return BoundarySamples.from_function(grid, f)


def trig_poly(rng, degree, grid=G):
    k = np.arange(1, degree + 1)
    a, b = rng.normal(size=degree) / k, rng.normal(size=degree) / k
    c0 = rng.normal()

    def v(th):
        th = np.asarray(th, dtype=float)
        return c0 + np.cos(np.outer(th, k)) @ a + np.sin(np.outer(th, k)) @ b

    def conj(th):  # harmonic conjugate normalized at theta = 0
        th = np.asarray(th, dtype=float)
        return -np.sin(np.outer(th, k)) @ a + np.cos(np.outer(th, k)) @ b - b.sum()

    return v, conj


def test_grid_validation():
    for n in (4, 12, 1000):
        with pytest.raises(ValueError):
            CircleGrid(n)
    g = CircleGrid(8)
    assert not np.any(g.thetas == 0)
    assert g.thetas[0] == pytest.approx(math.pi / 8)


def test_samples_shape_checked():
    with pytest.raises(ValueError):
        BoundarySamples(G, np.zeros(10))


def test_round_trip_and_symmetry():
    rng = np.random.default_rng(1)
    vals = rng.normal(size=G.n)
    c = G.analyze(vals)
    assert np.max(np.abs(G.synthesize(c).real - vals)) < 1e-12 * np.max(np.abs(vals))
    k = G.wavenumbers
    idx = {kk: i for i, kk in enumerate(k)}
    for kk in (1, 5, 100, 2047):
        assert abs(c[idx[kk]] - np.conj(c[idx[-kk]])) < 1e-12


@pytest.mark.parametrize("k", [1, 2, 7, 100, 1024])
def test_T1_sin_and_cos(k):
    th = G.signed_thetas
    u = hilbert_T1(samples(lambda t: np.sin(k * t)))
    assert np.max(np.abs(u.values - (np.cos(k * th) - 1))) < 1e-12
    u = hilbert_T1(samples(lambda t: np.cos(k * t)))
    assert np.max(np.abs(u.values + np.sin(k * th))) < 1e-12


def test_T1_constant():
    assert np.max(np.abs(hilbert_T1(samples(lambda t: np.ones_like(t))).values)) < 1e-15


def test_T1_vanishes_at_vertex():
    rng = np.random.default_rng(3)
    v, _ = trig_poly(rng, 200)
    assert abs(hilbert_T1(samples(v)).value_at(0.0)) < 1e-12


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), degree=st.integers(1, 1024))
def test_T1_random_trig_poly_closed_form(seed, degree):
    v, conj = trig_poly(np.random.default_rng(seed), degree)
    u = hilbert_T1(samples(v))
    assert np.max(np.abs(u.values - conj(G.signed_thetas))) < 1e-12


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), degree=st.integers(1, 1024))
def test_T1_twice_is_minus_identity_up_to_constant(seed, degree):
    v, _ = trig_poly(np.random.default_rng(seed), degree)
    s = samples(v)
    s = s - s.values.mean()
    twice = hilbert_T1(hilbert_T1(s)).values
    diff = twice + s.values
    assert np.max(np.abs(diff - diff.mean())) < 1e-10


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), degree=st.integers(1, 1024))
def test_T1_defining_property(seed, degree):
    v, _ = trig_poly(np.random.default_rng(seed), degree)
    s = samples(v)
    s1 = s - s.value_at(0.0)
    assert analyticity_defect(hilbert_T1(s), s1) < 1e-10


def test_poisson_examples():
    assert poisson_eval(samples(np.cos), 0.5, 0.0) == pytest.approx(0.5, abs=1e-14)
    c = samples(lambda t: np.full_like(t, 3.25))
    for t, th in ((0.0, 0.0), (0.7, 2.0), (0.99, -1.0)):
        assert poisson_eval(c, t, th) == pytest.approx(3.25, abs=1e-13)
    assert poisson_eval(samples(lambda t: np.sin(3 * t)), 0.9, math.pi / 6) == pytest.approx(0.729, abs=1e-13)


def test_poisson_rejects_t_one():
    with pytest.raises(ValueError):
        poisson_eval(samples(np.cos), 1.0, 0.0)


def test_poisson_matches_kernel_quadrature():
    # standard kernel (1 - t^2) / (1 + t^2 - 2 t cos(theta - phi)) / 2 pi
    from scipy.integrate import quad
    f = lambda t: np.exp(np.cos(t)) * np.sin(2 * t + 0.3)
    t, th = 0.6, 0.8
    val, _ = quad(lambda p: f(p) * (1 - t**2) / (1 + t**2 - 2 * t * math.cos(th - p)), -math.pi, math.pi,
                  epsabs=1e-13)
    assert poisson_eval(samples(f), t, th) == pytest.approx(val / (2 * math.pi), abs=1e-12)


def test_poisson_near_boundary():
    rng = np.random.default_rng(11)
    v, _ = trig_poly(rng, 32)
    s = samples(v)
    th = np.linspace(-3, 3, 17)
    assert np.max(np.abs(poisson_eval(s, 1 - 1e-9, th) - v(th))) < 1e-6


@pytest.mark.parametrize("k", [1, 3, 10])
def test_radial_derivative_cos(k):
    assert radial_derivative_at_1(samples(lambda t: np.cos(k * t))).value == pytest.approx(k, abs=1e-10)


def test_radial_derivative_examples():
    assert radial_derivative_at_1(samples(lambda t: 1 - np.cos(t))).value == pytest.approx(-1, abs=1e-12)
    rd = radial_derivative_at_1(samples(lambda t: np.zeros_like(t)))
    assert rd.value == 0 and rd.tail_bound == 0


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), degree=st.integers(1, 6))
def test_radial_derivative_matches_richardson(seed, degree):
    # Richardson over t in {0.9, 0.95, 0.975} only resolves low degrees; the 1% is
    # relative to the derivative scale sum |k c_k| so near-zero values are fair
    v, _ = trig_poly(np.random.default_rng(seed), degree)
    s = samples(v)
    v1 = v(np.array([0.0]))[0]
    d = {t: (v1 - poisson_eval(s, t, 0.0)) / (1 - t) for t in (0.9, 0.95, 0.975)}
    r1 = 2 * d[0.95] - d[0.9]
    r2 = 2 * d[0.975] - d[0.95]
    extrap = (4 * r2 - r1) / 3
    exact = radial_derivative_at_1(s).value
    k = np.abs(G.wavenumbers)
    scale = max(abs(exact), float(np.sum(k * np.abs(s.fourier))))
    assert abs(extrap - exact) <= 0.01 * scale


def test_radial_derivative_regularity_gate():
    rough = samples(lambda t: np.abs(t) ** 0.5)
    assert tail_energy(rough) > 1e-8
    with pytest.raises(RegularityError):
        radial_derivative_at_1(rough)


def test_dtn_quadrature_examples():
    assert dtn_quadrature_at_1(lambda t: 2 * math.sin(t / 2) ** 2) == pytest.approx(-1, abs=1e-10)
    assert dtn_quadrature_at_1(lambda t: math.cos(3 * t)) == pytest.approx(3, abs=1e-8)
    val, err = dtn_quadrature_at_1(lambda t: math.cos(2 * t), with_error=True)
    assert val == pytest.approx(2, abs=1e-8) and err < 1e-8


def test_dtn_quadrature_agrees_with_spectral_on_cusp():
    f = lambda t: -np.abs(2 * np.sin(np.asarray(t) / 2)) ** 1.5
    spectral = radial_derivative_at_1(samples(f, CircleGrid(2**14)))
    quad_val = dtn_quadrature_at_1(lambda t: float(f(t)))
    assert abs(spectral.value - quad_val) <= spectral.tail_bound + 1e-9


def test_holder_slope_synthetic_power():
    s = samples(lambda t: np.abs(t) ** 1.5)
    hs = holder_slope(s, (0.01, 0.1))
    assert hs.slope1 == pytest.approx(0.5, abs=0.05)
    assert hs.slope2 == pytest.approx(-0.5, abs=0.1)


def test_holder_slope_constant_and_narrow_window():
    hs = holder_slope(samples(lambda t: np.full_like(t, 2.0)), (0.01, 0.1))
    assert hs.slope1 == math.inf and hs.slope2 == math.inf
    with pytest.raises(ValueError):
        holder_slope(samples(np.cos), (0.01, 0.011))


def test_analyticity_defect_examples():
    assert analyticity_defect(samples(np.cos), samples(np.sin)) < 1e-12
    assert analyticity_defect(samples(np.cos), samples(lambda t: -np.sin(t))) == pytest.approx(1, abs=1e-12)
    z = samples(np.zeros_like)
    assert analyticity_defect(z, z) == 0
