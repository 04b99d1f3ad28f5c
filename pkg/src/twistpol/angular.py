"""Angular-momentum algebra and cylindrical Bessel functions.

Conventions
-----------
* Angular momenta are carried internally as doubled integers, so
  half-integer couplings (e.g. ``j = 5/2``) are exact.
* Wigner small-d follows the standard (Wick / Rose / Edmonds) convention
  for active rotations ``R_z(alpha) R_y(beta) R_z(gamma)``::

      d^1_{1,1} = cos^2(b/2),  d^1_{1,0} = -sin(b)/sqrt(2),  d^1_{1,-1} = sin^2(b/2)

* Clebsch-Gordan coefficients carry Condon-Shortley phases.

Public functions accept plain numbers (``int``, ``float`` or
``fractions.Fraction``) for ``j`` and ``m``; anything that is not an exact
multiple of 1/2 raises :class:`AngularMomentumError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "AngMomentum",
    "AngularMomentumError",
    "bessel_j",
    "bessel_j_table",
    "clebsch_gordan",
    "wigner_small_d",
]


class AngularMomentumError(ValueError):
    """Quantum numbers that do not describe a valid angular momentum."""


def twice(value) -> int:
    """Return ``2 * value`` as an int, insisting that it is exact."""
    if isinstance(value, AngMomentum):
        raise TypeError("pass j or m separately, not an AngMomentum")
    two = 2 * Fraction(value)
    if two.denominator != 1:
        raise AngularMomentumError(f"{value!r} is not a multiple of 1/2")
    return int(two)


@dataclass(frozen=True)
class AngMomentum:
    """A state ``|j m>`` stored as ``(2j, 2m)``."""

    twice_j: int
    twice_m: int

    def __post_init__(self):
        if self.twice_j < 0:
            raise AngularMomentumError(f"negative j: 2j = {self.twice_j}")
        if abs(self.twice_m) > self.twice_j:
            raise AngularMomentumError(
                f"|m| > j: 2j = {self.twice_j}, 2m = {self.twice_m}")
        if (self.twice_j - self.twice_m) % 2:
            raise AngularMomentumError(
                f"j and m differ in parity: 2j = {self.twice_j}, 2m = {self.twice_m}")

    @classmethod
    def of(cls, j, m) -> "AngMomentum":
        return cls(twice(j), twice(m))

    @property
    def j(self) -> Fraction:
        return Fraction(self.twice_j, 2)

    @property
    def m(self) -> Fraction:
        return Fraction(self.twice_m, 2)


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return math.factorial(n)


def _check_pair(tj: int, tm: int, what: str) -> None:
    if tj < 0:
        raise AngularMomentumError(f"{what}: negative angular momentum")
    if (tj - tm) % 2:
        raise AngularMomentumError(f"{what}: j and m differ in parity")


# ---------------------------------------------------------------------------
# Wigner small-d
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _wigner_terms(tj: int, tm1: int, tm2: int) -> tuple[tuple[float, int, int], ...]:
    """Coefficients and (cos, sin) half-angle powers of the factorial sum."""
    jp1, jm1 = (tj + tm1) // 2, (tj - tm1) // 2
    jp2, jm2 = (tj + tm2) // 2, (tj - tm2) // 2
    dm = (tm1 - tm2) // 2
    root = _fact(jp1) * _fact(jm1) * _fact(jp2) * _fact(jm2)
    terms = []
    for s in range(max(0, -dm), min(jp2, jm1) + 1):
        den = _fact(jp2 - s) * _fact(s) * _fact(dm + s) * _fact(jm1 - s)
        coef = math.sqrt(Fraction(root, den * den))
        if (dm + s) % 2:
            coef = -coef
        terms.append((coef, tj - dm - 2 * s, dm + 2 * s))
    return tuple(terms)


def wigner_small_d(j, m1, m2, theta):
    """Wigner ``d^j_{m1 m2}(theta)``.

    ``theta`` may be a scalar or an array; the result has the same shape.
    """
    tj, tm1, tm2 = twice(j), twice(m1), twice(m2)
    _check_pair(tj, tm1, "wigner_small_d m1")
    _check_pair(tj, tm2, "wigner_small_d m2")
    if abs(tm1) > tj or abs(tm2) > tj:
        raise AngularMomentumError(
            f"projection out of range: j={j}, m1={m1}, m2={m2}")
    half = np.asarray(theta, dtype=float) / 2.0
    c, s = np.cos(half), np.sin(half)
    out = np.zeros_like(half)
    for coef, pc, ps in _wigner_terms(tj, tm1, tm2):
        out = out + coef * c**pc * s**ps
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Clebsch-Gordan
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _cg_twice(tj1: int, tm1: int, tj2: int, tm2: int, tJ: int, tM: int) -> float:
    if tM != tm1 + tm2:
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tM) > tJ:
        return 0.0
    if (tj1 + tj2 + tJ) % 2 or not abs(tj1 - tj2) <= tJ <= tj1 + tj2:
        return 0.0
    # Racah's closed form; all arguments below are integers.
    a = (tj1 + tj2 - tJ) // 2
    b = (tj1 - tm1) // 2
    c = (tj2 + tm2) // 2
    d = (tJ - tj2 + tm1) // 2
    e = (tJ - tj1 - tm2) // 2
    kmin = max(0, -d, -e)
    kmax = min(a, b, c)
    total = 0
    for k in range(kmin, kmax + 1):
        term = Fraction(1, _fact(k) * _fact(a - k) * _fact(b - k)
                        * _fact(c - k) * _fact(d + k) * _fact(e + k))
        total += -term if k % 2 else term
    if total == 0:
        return 0.0
    pref = Fraction(
        (tJ + 1) * _fact((tJ + tj1 - tj2) // 2) * _fact((tJ - tj1 + tj2) // 2) * _fact(a),
        _fact((tj1 + tj2 + tJ) // 2 + 1))
    pref *= (_fact((tJ + tM) // 2) * _fact((tJ - tM) // 2)
             * _fact((tj1 - tm1) // 2) * _fact((tj1 + tm1) // 2)
             * _fact((tj2 - tm2) // 2) * _fact((tj2 + tm2) // 2))
    value = math.sqrt(pref * total * total)
    return value if total > 0 else -value


def clebsch_gordan(j1, m1, j2, m2, J, M) -> float:
    """``<j1 m1; j2 m2 | J M>`` with Condon-Shortley phases.

    Returns 0.0 whenever a selection rule fails (``M != m1 + m2``, triangle
    rule, projection out of range).  Raises only for inputs that are not
    angular momenta at all (wrong parity of ``j`` vs ``m``).
    """
    t = [twice(v) for v in (j1, m1, j2, m2, J, M)]
    _check_pair(t[0], t[1], "clebsch_gordan (j1, m1)")
    _check_pair(t[2], t[3], "clebsch_gordan (j2, m2)")
    _check_pair(t[4], t[5], "clebsch_gordan (J, M)")
    return _cg_twice(*t)


# ---------------------------------------------------------------------------
# Cylindrical Bessel functions of integer order
# ---------------------------------------------------------------------------

_SERIES_LIMIT = 1.0
_SERIES_TERMS = 24
_RESCALE_AT = 1e200


def _series_table(n_max: int, x: np.ndarray) -> np.ndarray:
    # Power series; for x < 1 the terms fall monotonically, no cancellation.
    out = np.empty((n_max + 1,) + x.shape)
    h = x / 2.0
    q = -h * h
    lead = np.ones_like(x)
    for n in range(n_max + 1):
        if n:
            lead = lead * h / n
        term = lead.copy()
        acc = lead.copy()
        for k in range(1, _SERIES_TERMS):
            term = term * q / (k * (n + k))
            acc = acc + term
        out[n] = acc
    return out


def _miller_table(n_max: int, x: np.ndarray) -> np.ndarray:
    """Backward recurrence normalised by ``J_0 + 2 sum_k J_2k = 1``.

    Every element starts from its own index, so the value for a given ``x``
    does not depend on which other points share the array.
    """
    big = np.maximum(x, n_max)
    start = 2 * np.ceil((big + 25.0 + 10.0 * np.cbrt(big)) / 2.0).astype(int)
    out = np.zeros((n_max + 1,) + x.shape)
    j_k = np.zeros_like(x)
    j_k1 = np.zeros_like(x)
    norm = np.zeros_like(x)
    for k in range(int(start.max()), 0, -1):
        seed = start == k
        if seed.any():
            j_k = np.where(seed, 1e-30, j_k)
        if k <= n_max:
            out[k] = j_k
        if k % 2 == 0:
            norm = norm + 2.0 * j_k
        j_km1 = (2.0 * k / x) * j_k - j_k1
        j_k1, j_k = j_k, j_km1
        over = np.abs(j_k) > _RESCALE_AT
        if over.any():
            scale = np.where(over, 1.0 / _RESCALE_AT, 1.0)
            j_k = j_k * scale
            j_k1 = j_k1 * scale
            norm = norm * scale
            out *= scale
    out[0] = j_k
    norm = norm + j_k
    return out / norm


def bessel_j_table(n_max: int, x):
    """``J_n(x)`` for ``n = 0 .. n_max``; shape ``(n_max + 1,) + shape(x)``."""
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("bessel_j: non-finite argument")
    flat = x.ravel()
    ax = np.abs(flat)
    out = np.empty((n_max + 1, flat.size))
    small = ax < _SERIES_LIMIT
    if small.any():
        out[:, small] = _series_table(n_max, ax[small])
    if (~small).any():
        out[:, ~small] = _miller_table(n_max, ax[~small])
    neg = flat < 0
    if neg.any():
        out[1::2, neg] *= -1.0
    return out.reshape((n_max + 1,) + x.shape)


def bessel_j(n: int, x):
    """Cylindrical Bessel function of the first kind, integer order ``n``."""
    if int(n) != n:
        raise ValueError(f"integer order required, got {n!r}")
    n = int(n)
    vals = bessel_j_table(abs(n), x)[abs(n)]
    if n < 0 and n % 2:
        vals = -vals
    return vals if np.ndim(vals) else float(vals)
