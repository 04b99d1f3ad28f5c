import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
import scipy.linalg
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import S
from sympy.physics.wigner import clebsch_gordan as sympy_cg

from twistpol.angular import (
    AngMomentum,
    AngularMomentumError,
    bessel_j,
    bessel_j_table,
    clebsch_gordan,
    wigner_small_d,
)


def projections(tj):
    return [Fraction(t, 2) for t in range(-tj, tj + 1, 2)]


def d_by_expm(tj, theta):
    """d^j(theta) = exp(-i theta J_y) in the |j m> basis, m descending."""
    j = Fraction(tj, 2)
    ms = projections(tj)[::-1]
    n = len(ms)
    jp = np.zeros((n, n))
    for col, m in enumerate(ms):
        if m + 1 <= j:
            jp[col - 1, col] = math.sqrt((j - m) * (j + m + 1))
    jy = (jp - jp.T) / 2j
    return np.real(scipy.linalg.expm(-1j * theta * jy)), ms


# --- Wigner d ---------------------------------------------------------------

def test_wigner_d1_entries():
    t = 0.3
    assert wigner_small_d(1, 0, 0, t) == pytest.approx(math.cos(t), abs=1e-15)
    assert wigner_small_d(1, 1, 1, 0.0) == 1.0
    assert wigner_small_d(1, 1, 1, t) == pytest.approx(math.cos(t / 2) ** 2, abs=1e-15)
    assert wigner_small_d(1, 1, 0, t) == pytest.approx(-math.sin(t) / math.sqrt(2), abs=1e-15)
    assert wigner_small_d(1, 1, -1, t) == pytest.approx(math.sin(t / 2) ** 2, abs=1e-15)


def test_wigner_d2_20_against_matrix_exponential():
    d, ms = d_by_expm(4, 0.7)
    expected = d[ms.index(2), ms.index(0)]
    assert expected == pytest.approx(math.sqrt(3 / 8) * math.sin(0.7) ** 2, abs=1e-14)
    assert wigner_small_d(2, 2, 0, 0.7) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("tj", range(0, 9))
def test_wigner_matches_expm_all_entries(tj):
    theta = 1.234
    d, ms = d_by_expm(tj, theta)
    ours = np.array([[wigner_small_d(Fraction(tj, 2), a, b, theta) for b in ms] for a in ms])
    assert np.allclose(ours, d, atol=1e-13)


@settings(max_examples=60, deadline=None)
@given(tj=st.integers(0, 6), theta=st.floats(0, math.pi))
def test_wigner_orthogonality(tj, theta):
    ms = projections(tj)
    d = np.array([[wigner_small_d(Fraction(tj, 2), a, b, theta) for b in ms] for a in ms])
    assert np.abs(d @ d.T - np.eye(len(ms))).max() < 1e-12


@settings(max_examples=60, deadline=None)
@given(tj=st.integers(0, 8), i=st.integers(0, 8), k=st.integers(0, 8), theta=st.floats(0, math.pi))
def test_wigner_symmetry(tj, i, k, theta):
    ms = projections(tj)
    a, b = ms[i % len(ms)], ms[k % len(ms)]
    j = Fraction(tj, 2)
    lhs = wigner_small_d(j, a, b, theta)
    rhs = (-1) ** int(a - b) * wigner_small_d(j, b, a, theta)
    assert abs(lhs - rhs) < 1e-13
    assert wigner_small_d(j, a, b, 0.0) == (1.0 if a == b else 0.0)


def test_wigner_array_theta():
    th = np.linspace(0, math.pi, 7)
    out = wigner_small_d(1, 0, 0, th)
    assert out.shape == th.shape
    assert np.allclose(out, np.cos(th), atol=1e-15)


@pytest.mark.parametrize("args", [(1, 2, 0), (1, 0.5, 0), (0.5, 1, 0.5), (1, 0.3, 0)])
def test_wigner_invalid(args):
    with pytest.raises(AngularMomentumError):
        wigner_small_d(*args, 0.2)


# --- Clebsch-Gordan -----------------------------------------------------------

def test_cg_half_integer_example():
    assert clebsch_gordan(2, 0, 0.5, -0.5, 2.5, -0.5) == pytest.approx(math.sqrt(3 / 5), abs=1e-15)
    assert clebsch_gordan(2, 2, Fraction(1, 2), Fraction(-1, 2), Fraction(5, 2), Fraction(3, 2)) \
        == pytest.approx(math.sqrt(1 / 5), abs=1e-15)


def test_cg_trivial_coupling():
    assert clebsch_gordan(0, 0, 1, 1, 1, 1) == 1.0


def test_cg_singlet_by_diagonalisation():
    # Build J^2 on 1 x 1 and pick its J=0 eigenvector; sign fixed by <1 1; 1 -1|0 0> > 0.
    n = 3
    jz = np.diag([1.0, 0.0, -1.0])
    jp = np.zeros((3, 3))
    jp[0, 1] = jp[1, 2] = math.sqrt(2)
    jm = jp.T
    eye = np.eye(n)
    Jz = np.kron(jz, eye) + np.kron(eye, jz)
    Jp = np.kron(jp, eye) + np.kron(eye, jp)
    Jm = np.kron(jm, eye) + np.kron(eye, jm)
    J2 = Jm @ Jp + Jz @ Jz + Jz
    vals, vecs = np.linalg.eigh(J2)
    singlet = vecs[:, np.argmin(np.abs(vals))]
    idx = 0 * 3 + 2  # |m1 = +1> |m2 = -1>
    singlet *= np.sign(singlet[idx])
    assert singlet[idx] == pytest.approx(1 / math.sqrt(3), abs=1e-14)
    assert clebsch_gordan(1, 1, 1, -1, 0, 0) == pytest.approx(singlet[idx], abs=1e-14)
    assert clebsch_gordan(1, 0, 1, 0, 0, 0) == pytest.approx(singlet[4], abs=1e-14)


def _all_couplings(max_twice):
    for tj1 in range(max_twice + 1):
        for tj2 in range(max_twice + 1):
            for tJ in range(abs(tj1 - tj2), tj1 + tj2 + 1, 2):
                for tm1 in range(-tj1, tj1 + 1, 2):
                    for tm2 in range(-tj2, tj2 + 1, 2):
                        if abs(tm1 + tm2) <= tJ:
                            yield tj1, tm1, tj2, tm2, tJ, tm1 + tm2


def test_cg_against_sympy():
    worst = 0.0
    for t in _all_couplings(5):
        ours = clebsch_gordan(*(Fraction(v, 2) for v in t))
        j1, m1, j2, m2, J, M = (S(v) / 2 for v in t)
        ref = float(sympy_cg(j1, j2, J, m1, m2, M))
        worst = max(worst, abs(ours - ref))
    assert worst < 1e-14


def test_cg_orthonormality():
    for tj1 in range(6):
        for tj2 in range(6):
            states = [(tJ, tM) for tJ in range(abs(tj1 - tj2), tj1 + tj2 + 1, 2)
                      for tM in range(-tJ, tJ + 1, 2)]
            prods = [(a, b) for a in range(-tj1, tj1 + 1, 2) for b in range(-tj2, tj2 + 1, 2)]
            c = np.array([[clebsch_gordan(tj1 / 2, a / 2, tj2 / 2, b / 2, tJ / 2, tM / 2)
                           for a, b in prods] for tJ, tM in states])
            assert np.abs(c @ c.T - np.eye(len(states))).max() < 1e-12


@settings(max_examples=100)
@given(st.lists(st.integers(-5, 5), min_size=6, max_size=6))
def test_cg_zero_when_rules_fail(vals):
    tj1, tm1, tj2, tm2, tJ, tM = [abs(vals[0]), vals[1], abs(vals[2]), vals[3], abs(vals[4]), vals[5]]
    pairs = [(tj1, tm1), (tj2, tm2), (tJ, tM)]
    if any((a - b) % 2 for a, b in pairs):
        with pytest.raises(AngularMomentumError):
            clebsch_gordan(*(Fraction(v, 2) for v in (tj1, tm1, tj2, tm2, tJ, tM)))
        return
    value = clebsch_gordan(*(Fraction(v, 2) for v in (tj1, tm1, tj2, tm2, tJ, tM)))
    if tM != tm1 + tm2 or not abs(tj1 - tj2) <= tJ <= tj1 + tj2 or abs(tm1) > tj1:
        assert value == 0.0


def test_cg_rejects_non_half_integers():
    with pytest.raises(AngularMomentumError):
        clebsch_gordan(1, 0.25, 1, 0, 1, 0)


def test_angmomentum_type():
    a = AngMomentum.of(Fraction(5, 2), Fraction(-1, 2))
    assert (a.twice_j, a.twice_m) == (5, -1)
    assert a.j == Fraction(5, 2)
    with pytest.raises(AngularMomentumError):
        AngMomentum(2, 1)
    with pytest.raises(AngularMomentumError):
        AngMomentum(2, 4)


# --- Bessel -------------------------------------------------------------------

def series_oracle(n, x, dps=40):
    mpmath.mp.dps = dps
    x = mpmath.mpf(x)
    total = mpmath.mpf(0)
    k = 0
    while True:
        term = (-1) ** k * (x / 2) ** (2 * k + n) / (mpmath.factorial(k) * mpmath.factorial(k + n))
        total += term
        if abs(term) < mpmath.mpf(10) ** (-dps + 5) and k > x:
            break
        k += 1
    return float(total)


def test_bessel_examples():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0
    assert bessel_j(-1, 1.5) == -bessel_j(1, 1.5)
    assert series_oracle(1, 1.0) == pytest.approx(0.4400505857449335, abs=1e-16)
    assert bessel_j(1, 1.0) == pytest.approx(0.4400505857449335, abs=1e-15)


@pytest.mark.parametrize("x", [0.0, 1e-9, 0.3, 0.999, 1.0, 1.7, 4.4, 9.0, 17.3, 33.0])
@pytest.mark.parametrize("n", [0, 1, 2, 3, 5, 8])
def test_bessel_power_series_oracle(n, x):
    assert bessel_j(n, x) == pytest.approx(series_oracle(n, x), abs=2e-15)


def test_bessel_against_scipy_wide_range():
    x = np.concatenate([np.linspace(0, 60, 3001), [120.0, 500.0, 999.0]])
    table = bessel_j_table(15, x)
    for n in range(16):
        assert np.abs(table[n] - scipy.special.jv(n, x)).max() < 5e-14


@settings(max_examples=200)
@given(n=st.integers(-8, 8), x=st.floats(0.1, 50))
def test_bessel_recurrence(n, x):
    a, b, c = bessel_j(n - 1, x), bessel_j(n + 1, x), bessel_j(n, x)
    scale = max(abs(a), abs(b), abs(2 * n / x * c))
    assert abs(a + b - 2 * n / x * c) <= 1e-10 * scale


def test_bessel_parity_in_x():
    assert bessel_j(3, -2.0) == pytest.approx(-bessel_j(3, 2.0), abs=0)
    assert bessel_j(2, -2.0) == bessel_j(2, 2.0)


def test_bessel_array_elementwise_independent():
    # A value must not depend on what else shares the array.
    x = np.array([0.5, 2.0, 400.0])
    alone = [bessel_j(2, v) for v in x]
    assert np.array_equal(bessel_j(2, x), alone)


@pytest.mark.parametrize("bad", [math.inf, math.nan])
def test_bessel_non_finite(bad):
    with pytest.raises(ValueError):
        bessel_j(0, bad)
