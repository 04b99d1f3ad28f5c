"""Bessel-beam (twisted) photon modes and their vector potential.

Lengths are in units of the wavelength, so ``k = 2*pi``.  The normalisation
constant of a mode is set to one and the field is evaluated in the plane
``z = 0`` at ``t = 0``; both only contribute factors that cancel in the
normalised quantities computed by this package.

For a single mode the spherical components of the vector potential at
transverse position ``(rho, phi)`` are::

    a_lam = i^(-lam) d^1_{lam, Lambda}(theta_k) J_{m - lam}(kappa rho) exp(i (m - lam) phi)

with ``lam`` in (+1, 0, -1) selecting the basis vectors
``eta_{+-1} = (-+x - i y)/sqrt(2)`` and ``eta_0 = z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .angular import bessel_j_table, wigner_small_d
from .density import DensityMatrix, pure_density

__all__ = [
    "Beam",
    "FieldComponents",
    "TwistedMode",
    "field_components",
    "photon_density_matrix",
    "WAVENUMBER",
]

WAVENUMBER = 2.0 * math.pi
SPHERICAL = (1, 0, -1)

_I_POW = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


def i_power(n: int) -> complex:
    """``i**n`` without rounding for integer ``n``."""
    return _I_POW[n % 4]


@dataclass(frozen=True)
class TwistedMode:
    """One Bessel mode: cone angle, total angular momentum projection, helicity."""

    m_gamma: int
    helicity: int
    theta_k: float = 0.1
    weight: complex = 1.0

    def __post_init__(self):
        if self.helicity not in (-1, 1):
            raise ValueError(f"helicity must be +1 or -1, got {self.helicity!r}")
        if int(self.m_gamma) != self.m_gamma:
            raise ValueError(f"m_gamma must be an integer, got {self.m_gamma!r}")
        if not 0.0 < self.theta_k < math.pi / 2:
            raise ValueError(f"theta_k must lie in (0, pi/2), got {self.theta_k!r}")
        object.__setattr__(self, "m_gamma", int(self.m_gamma))
        object.__setattr__(self, "weight", complex(self.weight))

    @property
    def kappa(self) -> float:
        """Transverse wavenumber ``k sin(theta_k)``."""
        return WAVENUMBER * math.sin(self.theta_k)

    @property
    def k_z(self) -> float:
        return WAVENUMBER * math.cos(self.theta_k)

    def polarization_weights(self) -> dict[int, float]:
        """``d^1_{lam, Lambda}(theta_k)`` for each spherical component."""
        return {lam: wigner_small_d(1, lam, self.helicity, self.theta_k) for lam in SPHERICAL}


@dataclass(frozen=True)
class Beam:
    """Coherent superposition of modes sharing one Bessel cone."""

    modes: tuple[TwistedMode, ...]
    wavelength: float = field(default=1.0, repr=False)

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes:
            raise ValueError("a beam needs at least one mode")
        if any(not isinstance(m, TwistedMode) for m in modes):
            raise TypeError("beam modes must be TwistedMode instances")
        if len({m.theta_k for m in modes}) != 1:
            raise ValueError("all modes of a beam must share theta_k")
        if self.wavelength != 1.0:
            raise ValueError("lengths are measured in wavelengths; wavelength is fixed to 1")
        object.__setattr__(self, "modes", modes)

    @classmethod
    def single(cls, m_gamma: int, helicity: int, theta_k: float = 0.1) -> "Beam":
        return cls((TwistedMode(m_gamma, helicity, theta_k),))

    @classmethod
    def superposition(cls, specs: Iterable[Sequence], theta_k: float = 0.1) -> "Beam":
        """Build from ``(m_gamma, helicity[, weight])`` tuples."""
        modes = []
        for s in specs:
            weight = s[2] if len(s) > 2 else 1.0
            modes.append(TwistedMode(s[0], s[1], theta_k, weight))
        return cls(tuple(modes))

    @property
    def theta_k(self) -> float:
        return self.modes[0].theta_k

    @property
    def kappa(self) -> float:
        return self.modes[0].kappa


@dataclass(frozen=True)
class FieldComponents:
    """Spherical components of the vector potential at a point (or grid)."""

    a_plus: complex | np.ndarray
    a_zero: complex | np.ndarray
    a_minus: complex | np.ndarray

    def vector(self) -> np.ndarray:
        """Components stacked along the last axis in (+1, 0, -1) order."""
        return np.stack(np.broadcast_arrays(self.a_plus, self.a_zero, self.a_minus), axis=-1)

    def __getitem__(self, lam: int):
        return {1: self.a_plus, 0: self.a_zero, -1: self.a_minus}[lam]

    def intensity(self):
        return np.abs(self.a_plus) ** 2 + np.abs(self.a_zero) ** 2 + np.abs(self.a_minus) ** 2


def field_components(beam: Beam, rho, phi_rho) -> FieldComponents:
    """Vector potential components of ``beam`` at ``(rho, phi_rho)``.

    ``rho`` and ``phi_rho`` broadcast against each other.
    """
    if not isinstance(beam, Beam) or not beam.modes:
        raise ValueError("field_components needs a non-empty Beam")
    rho, phi = np.broadcast_arrays(np.asarray(rho, float), np.asarray(phi_rho, float))
    if np.any(rho < 0):
        raise ValueError("rho must be non-negative")
    comps = {lam: np.zeros(rho.shape, complex) for lam in SPHERICAL}
    x = beam.kappa * rho
    for mode in beam.modes:
        orders = [mode.m_gamma - lam for lam in SPHERICAL]
        table = bessel_j_table(max(abs(n) for n in orders), x)
        dvals = mode.polarization_weights()
        for lam, n in zip(SPHERICAL, orders):
            jn = table[abs(n)] * (-1.0 if n < 0 and n % 2 else 1.0)
            coef = mode.weight * i_power(-lam) * dvals[lam]
            comps[lam] = comps[lam] + coef * jn * np.exp(1j * n * phi)
    if rho.ndim == 0:
        comps = {lam: complex(v) for lam, v in comps.items()}
    return FieldComponents(comps[1], comps[0], comps[-1])


def photon_density_matrix(beam: Beam, rho, phi_rho) -> DensityMatrix:
    """Spin-density matrix ``a_lam a*_lam' / sum |a|^2`` of the field.

    Ordered (+1, 0, -1).  At a single point where the field vanishes a
    :class:`NodePointError` is raised; for arrays the node cells are NaN.
    """
    vec = field_components(beam, rho, phi_rho).vector()
    entries, _ = pure_density(vec, location=(rho, phi_rho) if vec.ndim == 1 else None)
    return DensityMatrix(entries)
