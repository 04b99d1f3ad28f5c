"""Photoexcitation amplitudes S -> l_f for twisted photons.

Only electric multipoles are treated and only the lowest partial wave
``L = l_f - 1`` is kept.  The species-dependent plane-wave partial amplitude
(the radial integral) and the mode normalisation are both set to one, so
absolute values are in arbitrary units; every observable derived from them
here is a ratio or a normalised matrix.

Amplitudes are split by field component ``lam``::

    M(m_f) = sum_modes w  sum_{lam in mask}  g(m_f, lam) d^1_{lam, Lambda}(theta_k)

    g(m_f, lam) = i^(m_f - 2 m_gamma) exp(-i (m_f - m_gamma) phi_b) J_{m_gamma - m_f}(kappa b)
                  d^{l_f - 1}_{m_f - lam, 0}(theta_k) <l_f-1, m_f-lam; 1, lam | l_f, m_f>

``lam = 0`` is the longitudinal (``A_z``) part, ``lam = +-1`` the transverse.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .angular import bessel_j_table, clebsch_gordan, twice, wigner_small_d
from .beam import SPHERICAL, Beam, TwistedMode, i_power
from .density import NodePointError, projections

__all__ = [
    "AmplitudeSet",
    "AtomPosition",
    "TransitionSpec",
    "amplitude",
    "amplitude_jm",
    "amplitude_set",
    "angular_factor",
    "g_factor",
    "quintiero_ratio",
]

FULL_MASK = frozenset(SPHERICAL)
TRANSVERSE = frozenset({-1, 1})


@dataclass(frozen=True)
class TransitionSpec:
    """Final orbital angular momentum and the field components kept."""

    l_f: int = 1
    field_mask: frozenset[int] = FULL_MASK

    def __post_init__(self):
        if int(self.l_f) != self.l_f or self.l_f < 1:
            raise ValueError(f"l_f must be a positive integer, got {self.l_f!r}")
        mask = frozenset(int(v) for v in self.field_mask)
        if not mask:
            raise ValueError("field_mask must not be empty")
        if not mask <= FULL_MASK:
            raise ValueError(f"field_mask entries must be in (-1, 0, 1), got {sorted(mask)}")
        object.__setattr__(self, "l_f", int(self.l_f))
        object.__setattr__(self, "field_mask", mask)

    @property
    def longitudinal(self) -> bool:
        return 0 in self.field_mask

    def without_longitudinal(self) -> "TransitionSpec":
        return TransitionSpec(self.l_f, self.field_mask - {0} or TRANSVERSE)


@dataclass(frozen=True)
class AtomPosition:
    """Impact parameter of the atom relative to the vortex line (polar form).

    ``b`` and ``phi_b`` may be arrays of a common (broadcastable) shape.
    """

    b: float | np.ndarray
    phi_b: float | np.ndarray = 0.0

    def __post_init__(self):
        if np.any(np.asarray(self.b) < 0):
            raise ValueError("impact parameter b must be non-negative")

    @classmethod
    def from_cartesian(cls, b_x, b_y) -> "AtomPosition":
        b_x = np.asarray(b_x, float)
        b_y = np.asarray(b_y, float)
        return cls(np.hypot(b_x, b_y), np.arctan2(b_y, b_x))

    @property
    def shape(self) -> tuple[int, ...]:
        return np.broadcast(np.asarray(self.b), np.asarray(self.phi_b)).shape


@dataclass(frozen=True)
class AmplitudeSet:
    """Excitation amplitudes keyed by final ``m_f``.

    ``by_lambda[(m_f, lam)]`` holds the part driven by field component
    ``lam`` for every ``lam`` of the mask.
    """

    l_f: int
    amps: Mapping[int, complex | np.ndarray]
    by_lambda: Mapping[tuple[int, int], complex | np.ndarray] | None = field(default=None, repr=False)

    @property
    def m_values(self) -> np.ndarray:
        return projections(self.l_f)

    def vector(self) -> np.ndarray:
        """Amplitudes stacked on the last axis, descending ``m_f``."""
        cols = np.broadcast_arrays(*(np.asarray(self.amps[int(m)]) for m in self.m_values))
        return np.stack(cols, axis=-1)

    def intensity(self):
        return np.sum(np.abs(self.vector()) ** 2, axis=-1)


def angular_factor(l_f: int, m_f: int, lam: int, theta_k: float) -> float:
    """``d^{l_f-1}_{m_f-lam,0}(theta) <l_f-1, m_f-lam; 1 lam | l_f m_f>``; 0 if forbidden."""
    low = l_f - 1
    if abs(m_f - lam) > low or abs(m_f) > l_f:
        return 0.0
    cg = clebsch_gordan(low, m_f - lam, 1, lam, l_f, m_f)
    if cg == 0.0:
        return 0.0
    return wigner_small_d(low, m_f - lam, 0, theta_k) * cg


def _bessel(table: np.ndarray, n: int) -> np.ndarray:
    v = table[abs(n)]
    return -v if n < 0 and n % 2 else v


def _position_arrays(pos: AtomPosition):
    b, phi = np.broadcast_arrays(np.asarray(pos.b, float), np.asarray(pos.phi_b, float))
    return b, phi


def _mode_prefactor(mode: TwistedMode, m_f: int, b, phi, table=None):
    """``i^(m_f - 2m) exp(-i(m_f - m) phi_b) J_{m - m_f}(kappa b)``."""
    n = mode.m_gamma - m_f
    if table is None:
        table = bessel_j_table(abs(n), mode.kappa * b)
    return i_power(m_f - 2 * mode.m_gamma) * _bessel(table, n) * np.exp(1j * n * phi)


def _scalarize(v):
    return complex(v) if np.ndim(v) == 0 else v


def g_factor(mode: TwistedMode, spec: TransitionSpec, m_f: int, lam: int, pos: AtomPosition):
    """Atomic form factor for field component ``lam`` and final ``m_f``."""
    if lam not in FULL_MASK:
        raise ValueError(f"lam must be -1, 0 or 1, got {lam!r}")
    b, phi = _position_arrays(pos)
    ang = angular_factor(spec.l_f, m_f, lam, mode.theta_k)
    if ang == 0.0:
        return _scalarize(np.zeros(b.shape, complex))
    return _scalarize(ang * _mode_prefactor(mode, m_f, b, phi))


def amplitude_set(beam: Beam, spec: TransitionSpec, pos: AtomPosition) -> AmplitudeSet:
    """All ``m_f`` amplitudes at once, with their per-component split.

    The total is assembled as ``longitudinal + transverse`` so that the
    full-mask result equals the sum of the two partial-mask results exactly.
    """
    b, phi = _position_arrays(pos)
    l_f = spec.l_f
    m_vals = [int(m) for m in projections(l_f)]
    parts = {(m, lam): np.zeros(b.shape, complex) for m in m_vals for lam in spec.field_mask}
    for mode in beam.modes:
        n_max = max(abs(mode.m_gamma - m) for m in m_vals)
        table = bessel_j_table(n_max, mode.kappa * b)
        dvals = mode.polarization_weights()
        for m in m_vals:
            coefs = {lam: angular_factor(l_f, m, lam, mode.theta_k) * dvals[lam]
                     for lam in spec.field_mask}
            if not any(coefs.values()):
                continue
            pre = mode.weight * _mode_prefactor(mode, m, b, phi, table)
            for lam, c in coefs.items():
                if c:
                    parts[(m, lam)] = parts[(m, lam)] + c * pre
    amps = {}
    for m in m_vals:
        longitudinal = parts.get((m, 0), 0.0)
        transverse = parts.get((m, -1), 0.0) + parts.get((m, 1), 0.0)
        amps[m] = _scalarize(longitudinal + transverse)
    by_lambda = {key: _scalarize(v) for key, v in parts.items()}
    return AmplitudeSet(l_f, amps, by_lambda)


def amplitude(beam: Beam, spec: TransitionSpec, m_f: int, pos: AtomPosition):
    """Twisted-photon excitation amplitude into ``|l_f, m_f>``."""
    if abs(m_f) > spec.l_f:
        raise ValueError(f"|m_f| must not exceed l_f = {spec.l_f}, got {m_f}")
    return amplitude_set(beam, spec, pos).amps[int(m_f)]


def amplitude_jm(beam: Beam, spec: TransitionSpec, j, m_j, pos: AtomPosition, m_s=Fraction(-1, 2)):
    """Amplitude into ``|(l_f, 1/2) j, m_j>`` from an S state with spin ``m_s``.

    The electron spin is a spectator, so the orbital amplitude for
    ``m_f = m_j - m_s`` is projected with one Clebsch-Gordan coefficient.
    """
    tj, tmj, tms = twice(j), twice(m_j), twice(m_s)
    if abs(tms) != 1:
        raise ValueError(f"m_s must be +-1/2, got {m_s!r}")
    if tj not in (2 * spec.l_f - 1, 2 * spec.l_f + 1):
        raise ValueError(f"j must be l_f +- 1/2, got {j!r}")
    b, _ = _position_arrays(pos)
    tmf = tmj - tms
    if abs(tmf) > 2 * spec.l_f or abs(tmj) > tj:
        return _scalarize(np.zeros(b.shape, complex))
    m_f = tmf // 2
    cg = clebsch_gordan(spec.l_f, m_f, Fraction(1, 2), Fraction(tms, 2), Fraction(tj, 2), Fraction(tmj, 2))
    return _scalarize(cg * np.asarray(amplitude(beam, spec, m_f, pos)))


def quintiero_ratio(theta_k: float, b: float = 0.0, with_longitudinal: bool = True,
                    phi_b: float = 0.0) -> float:
    """``|M(m_gamma=0, m_j=-1/2)| / |M(m_gamma=2, m_j=3/2)|`` for S_1/2 -> D_5/2.

    Numerator: ``m_gamma = 0``, helicity -1; denominator: ``m_gamma = 2``,
    helicity +1; both from ``m_s = -1/2``.  With ``with_longitudinal=False`` the
    ``A_z`` component is dropped from both amplitudes.
    """
    mask = FULL_MASK if with_longitudinal else TRANSVERSE
    spec = TransitionSpec(2, mask)
    half = Fraction(1, 2)
    pos = AtomPosition(b, phi_b)
    num = amplitude_jm(Beam.single(0, -1, theta_k), spec, 5 * half, -half, pos)
    den_beam = Beam.single(2, 1, theta_k)
    den = amplitude_jm(den_beam, spec, 5 * half, 3 * half, pos)
    ref = amplitude_jm(den_beam, spec, 5 * half, 3 * half, AtomPosition(0.0))
    if abs(den) <= 1e-12 * abs(ref):
        raise NodePointError("denominator amplitude vanishes (Bessel zero)", (b, phi_b))
    return abs(num) / abs(den)
