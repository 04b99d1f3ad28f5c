import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize

from twistpol import (
    AtomPosition,
    Beam,
    DensityMatrix,
    NodePointError,
    TransitionSpec,
    alignment,
    amplitude_set,
    cartesian_polarizations,
    clebsch_gordan,
    density_from_amplitudes,
    mean_lz,
    photon_atom_relations,
    polarization_report,
    tensor_polarization,
)
from twistpol.polarization import (
    CARTESIAN_FIELDS,
    alignment_closed_form,
    cartesian_from_density,
    density_from_cartesian,
)

R = math.sqrt


def random_pure(rng, dim):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def diag(w):
    return np.diag(np.asarray(w, complex))


complex_vec3 = st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                        min_size=3, max_size=3).filter(lambda v: sum(abs(z) ** 2 for z in v) > 1e-6)


# --- density matrices -------------------------------------------------------

def test_density_examples():
    assert np.allclose(density_from_amplitudes([1, 0, 0]).entries, np.diag([1, 0, 0]))
    rho = density_from_amplitudes(np.array([1, 1, 0]) / R(2)).entries
    expected = np.zeros((3, 3))
    expected[:2, :2] = 0.5
    assert np.allclose(rho, expected, atol=1e-15)


def test_density_superposition_by_hand():
    beam = Beam.superposition([(-2, 1), (3, -1)])
    s = amplitude_set(beam, TransitionSpec(2), AtomPosition(1.3, 0.7))
    a = s.vector()
    by_hand = np.array([[a[i] * np.conj(a[k]) for k in range(5)] for i in range(5)]) / sum(abs(a) ** 2)
    assert np.allclose(density_from_amplitudes(s).entries, by_hand, atol=1e-15)


def test_density_node():
    with pytest.raises(NodePointError):
        density_from_amplitudes([0, 0, 0])


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 1j], [0, 0.5]]))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.5, 0.5, 0.5]))
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 0.1j, 0], [0.1j, 0.5, 0], [0, 0, 0]]))


# --- multipoles -------------------------------------------------------------

@settings(max_examples=50, deadline=None)
@given(ell=st.integers(1, 3), seed=st.integers(0, 2 ** 31))
def test_t00_is_one(ell, seed):
    rho = density_from_amplitudes(random_pure(np.random.default_rng(seed), 2 * ell + 1))
    assert tensor_polarization(rho, 0, 0) == pytest.approx(1.0, abs=1e-14)


def test_plane_wave_t20_constants():
    for m in (1, -1):
        w1 = np.zeros(3)
        w1[1 - m] = 1
        assert tensor_polarization(diag(w1), 2, 0).real == pytest.approx(1 / R(2), abs=1e-15)
        w2 = np.zeros(5)
        w2[2 - m] = 1
        assert tensor_polarization(diag(w2), 2, 0).real == pytest.approx(-R(5 / 14), abs=1e-15)


def test_alignment_examples():
    assert alignment(diag([1, 0, 0]), 1) == pytest.approx(R(3 / 2), abs=1e-15)
    assert alignment(diag([1, 0, 0]), 2) == pytest.approx(1 / R(2), abs=1e-15)
    iso = diag([1 / 3] * 3)
    assert abs(alignment(iso, 1)) < 1e-15 and abs(alignment(iso, 2)) < 1e-15
    m0 = diag([0, 0, 1, 0, 0])
    assert alignment(m0, 4) == pytest.approx(6 / R(14), abs=1e-15)
    assert alignment(m0, 2) == pytest.approx(-2 * R(5 / 14), abs=1e-15)
    assert abs(alignment(m0, 1)) < 1e-15 and abs(alignment(m0, 3)) < 1e-15


def test_tensor_range_errors():
    with pytest.raises(ValueError):
        tensor_polarization(diag([1, 0, 0]), 3, 0)
    with pytest.raises(ValueError):
        tensor_polarization(diag([1, 0, 0]), 1, 2)
    with pytest.raises(ValueError):
        alignment(diag([1, 0, 0]), 0)


@pytest.mark.parametrize("dim", [3, 5])
def test_closed_forms_random_diagonals(dim):
    rng = np.random.default_rng(dim)
    for _ in range(100):
        w = rng.dirichlet(np.ones(dim))
        for K in range(1, dim):
            assert abs(alignment(diag(w), K) - alignment_closed_form(w, K)) < 1e-12
            assert alignment(diag(w), K) == tensor_polarization(diag(w), K, 0).real


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_alignment_phase_formula(ell):
    # B_K = sqrt(2l+1) sum_m (-1)^(l-m) <l m; l -m | K 0> w(m)
    rng = np.random.default_rng(ell)
    ms = range(ell, -ell - 1, -1)
    for _ in range(20):
        w = rng.dirichlet(np.ones(2 * ell + 1))
        for K in range(1, 2 * ell + 1):
            alt = R(2 * ell + 1) * sum((-1) ** (ell - m) * clebsch_gordan(ell, m, ell, -m, K, 0) * wm
                                        for m, wm in zip(ms, w))
            assert abs(alignment(diag(w), K) - alt) < 1e-12


def test_b1_is_scaled_lz():
    rng = np.random.default_rng(2)
    for _ in range(30):
        rho = density_from_amplitudes(random_pure(rng, 3))
        assert alignment(rho, 1) == pytest.approx(R(3 / 2) * mean_lz(rho), abs=1e-13)
        rho2 = density_from_amplitudes(random_pure(rng, 5))
        w = rho2.populations
        assert mean_lz(rho2) == pytest.approx(sum(m * wm for m, wm in zip((2, 1, 0, -1, -2), w)), abs=1e-14)


def test_mean_lz_examples():
    assert mean_lz(diag([1, 0, 0])) == 1.0
    s = amplitude_set(Beam.single(2, 1), TransitionSpec(2), AtomPosition(0.0))
    assert mean_lz(density_from_amplitudes(s)) == 2.0


def test_mean_lz_paraxial_far():
    s = amplitude_set(Beam.single(3, 1, 1e-6), TransitionSpec(1), AtomPosition(1e5, 0.3))
    assert mean_lz(density_from_amplitudes(s)) == pytest.approx(1.0, abs=1e-9)


def _b2_of(x):
    v = x[:3] + 1j * x[3:]
    return alignment(density_from_amplitudes(v / np.linalg.norm(v)), 2)


def test_b2_bound_attainment():
    rng = np.random.default_rng(4)
    hi = max(-minimize(lambda x: -_b2_of(x), rng.normal(size=6)).fun for _ in range(3))
    lo = min(minimize(_b2_of, rng.normal(size=6)).fun for _ in range(3))
    assert hi == pytest.approx(1 / R(2), abs=1e-6)
    assert lo == pytest.approx(-R(2), abs=1e-6)


def test_plane_wave_constancy_over_positions():
    rng = np.random.default_rng(6)
    for hel in (1, -1):
        beam = Beam.single(hel, hel, 1e-6)
        for _ in range(10):
            pos = AtomPosition(rng.uniform(0, 10), rng.uniform(0, 2 * math.pi))
            r1 = density_from_amplitudes(amplitude_set(beam, TransitionSpec(1), pos))
            r2 = density_from_amplitudes(amplitude_set(beam, TransitionSpec(2), pos))
            assert alignment(r1, 2) == pytest.approx(1 / R(2), abs=1e-6)
            assert alignment(r2, 2) == pytest.approx(-R(5 / 14), abs=1e-6)


# --- Cartesian --------------------------------------------------------------

def test_cartesian_examples():
    p = cartesian_polarizations([1, 0, 0])
    assert p.p_z == pytest.approx(1, abs=1e-15) and p.p_zz == pytest.approx(1, abs=1e-15)
    for k in ("p_x", "p_y", "p_xy", "p_xz", "p_yz", "p_xx_minus_yy"):
        assert abs(getattr(p, k)) < 1e-15
    p = cartesian_polarizations([0, 1, 0])
    assert p.p_zz == pytest.approx(-2, abs=1e-15) and abs(p.p_z) < 1e-15
    p = cartesian_polarizations(np.array([1, 0, 1]) / R(2))
    assert p.p_xx_minus_yy == pytest.approx(3, abs=1e-14) and abs(p.p_z) < 1e-15


@settings(max_examples=100, deadline=None)
@given(v=complex_vec3)
def test_cartesian_matches_displayed_spherical_forms(v):
    a = np.asarray(v, complex)
    a = a / np.linalg.norm(a)
    ap, a0, am = a
    c = np.conj
    p = cartesian_polarizations(a)
    assert p.p_xx_minus_yy == pytest.approx((3 * (ap * c(am) + am * c(ap))).real, abs=1e-12)
    assert p.p_zz == pytest.approx(abs(ap) ** 2 + abs(am) ** 2 - 2 * abs(a0) ** 2, abs=1e-12)
    assert p.p_xy == pytest.approx((1.5j * (ap * c(am) - am * c(ap))).real, abs=1e-12)
    k = 3 / (2 * R(2))
    assert p.p_xz == pytest.approx((k * (ap * c(a0) + a0 * c(ap) - am * c(a0) - a0 * c(am))).real, abs=1e-12)
    assert p.p_yz == pytest.approx((1j * k * (ap * c(a0) - a0 * c(ap) + am * c(a0) - a0 * c(am))).real, abs=1e-12)
    # vector part from the Cartesian amplitudes: p_i = i sum eps_ijk a_j a_k*
    ax, ay, az = (-ap + am) / R(2), (ap + am) / (1j * R(2)), a0
    assert p.p_z == pytest.approx((1j * (ax * c(ay) - ay * c(ax))).real, abs=1e-12)
    assert p.p_x == pytest.approx((1j * (ay * c(az) - az * c(ay))).real, abs=1e-12)
    assert p.p_y == pytest.approx((1j * (az * c(ax) - ax * c(az))).real, abs=1e-12)


def test_cartesian_rejects_other_spins():
    s = amplitude_set(Beam.single(1, 1), TransitionSpec(2), AtomPosition(0.2))
    with pytest.raises(ValueError):
        cartesian_polarizations(s)


@settings(max_examples=100, deadline=None)
@given(v=complex_vec3)
def test_cartesian_round_trip(v):
    rho = density_from_amplitudes(np.asarray(v, complex))
    back = density_from_cartesian(cartesian_from_density(rho))
    assert np.abs(back.entries - rho.entries).max() < 1e-12


def test_cartesian_round_trip_mixed():
    rng = np.random.default_rng(9)
    for _ in range(30):
        vs = [random_pure(rng, 3) for _ in range(3)]
        w = rng.dirichlet(np.ones(3))
        rho = sum(wi * np.outer(v, v.conj()) for wi, v in zip(w, vs))
        back = density_from_cartesian(cartesian_from_density(rho))
        assert np.abs(back.entries - rho).max() < 1e-12


def test_bounds_on_random_pure_states():
    rng = np.random.default_rng(10)
    v = rng.normal(size=(10 ** 4, 3)) + 1j * rng.normal(size=(10 ** 4, 3))
    rho = density_from_amplitudes(v).entries
    p = cartesian_from_density(rho)
    b2 = alignment(rho, 2)
    eps = 1e-12
    assert np.all((b2 >= -R(2) - eps) & (b2 <= 1 / R(2) + eps))
    assert np.all((p.p_zz >= -2 - eps) & (p.p_zz <= 1 + eps))
    for k in ("p_x", "p_y", "p_z"):
        assert np.all(np.abs(getattr(p, k)) <= 1 + eps)
    for k in ("p_xy", "p_xz", "p_yz"):
        assert np.all(np.abs(getattr(p, k)) <= 1.5 + eps)
    assert np.all(np.abs(p.p_xx_minus_yy) <= 3 + eps)


# --- relations ----------------------------------------------------------------

def test_relations_single_modes():
    rng = np.random.default_rng(12)
    for _ in range(50):
        beam = Beam.single(int(rng.integers(-3, 4)), int(rng.choice([-1, 1])), float(rng.uniform(0.05, 1.4)))
        rep = photon_atom_relations(beam, AtomPosition(rng.uniform(0.1, 5), rng.uniform(0, 2 * math.pi)))
        assert rep.max_discrepancy < 1e-12
        assert set(rep.pairs) == set(CARTESIAN_FIELDS)


def test_relations_paraxial_helicity():
    rep = photon_atom_relations(Beam.single(2, 1, 1e-6), AtomPosition(3.0, 0.4))
    assert rep.photon.p_z == pytest.approx(1, abs=1e-9)
    assert rep.atom.p_z == pytest.approx(1, abs=1e-9)
    assert rep.photon.p_zz == pytest.approx(1, abs=1e-9)
    assert rep.atom.p_zz == pytest.approx(1, abs=1e-9)


def test_relations_same_parity_superposition():
    beam = Beam.superposition([(-2, 1, 1.0), (2, -1, 0.6j), (0, 1, 0.3)])
    rng = np.random.default_rng(13)
    rep = photon_atom_relations(beam, AtomPosition(rng.uniform(0.1, 4, 100), rng.uniform(0, 6.3, 100)))
    assert np.nanmax(rep.max_discrepancy) < 1e-12


def test_relations_mixed_parity_use_mirrored_field():
    # Modes of different m_gamma parity: the displayed relations fail at (b, phi_b)
    # but the atomic state still matches the field at (b, phi_b + pi).
    beam = Beam.superposition([(-2, 1), (3, -1)])
    rep = photon_atom_relations(beam, AtomPosition(0.7, 0.4))
    assert rep.max_discrepancy > 1e-2
    assert rep.mirror_discrepancy < 1e-13


def test_report_contents():
    s = amplitude_set(Beam.superposition([(-2, 1), (3, -1)]), TransitionSpec(1), AtomPosition(0.8, 0.1))
    rep = polarization_report(density_from_amplitudes(s))
    assert len(rep.multipoles) == 9
    assert set(rep.alignment) == {1, 2}
    assert rep.alignment[2] == rep.multipoles[(2, 0)].real
    assert rep.cartesian is not None
    s2 = amplitude_set(Beam.single(1, 1), TransitionSpec(2), AtomPosition(0.8))
    rep2 = polarization_report(density_from_amplitudes(s2))
    assert rep2.cartesian is None and len(rep2.multipoles) == 25
