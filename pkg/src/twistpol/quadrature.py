"""Field of a Bessel mode by direct summation over its plane-wave cone.

Independent of the Wigner/Bessel closed form in :mod:`twistpol.beam`: each
plane wave's polarization is the rotated helicity vector
``R_z(phi_k) R_y(theta_k) eta_Lambda`` built from 3x3 rotation matrices, and
the azimuthal integral is done with the trapezoid rule (spectrally accurate
for a periodic integrand).
"""

from __future__ import annotations

import math

import numpy as np

from .beam import WAVENUMBER, TwistedMode

SQRT_HALF = math.sqrt(0.5)
ETA = {
    1: np.array([-SQRT_HALF, -1j * SQRT_HALF, 0.0]),
    0: np.array([0.0, 0.0, 1.0 + 0j]),
    -1: np.array([SQRT_HALF, -1j * SQRT_HALF, 0.0]),
}


def _rot_y(t):
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rot_z(p):
    c, s = np.cos(p), np.sin(p)
    z, o = np.zeros_like(p), np.ones_like(p)
    return np.stack([np.stack([c, -s, z], -1), np.stack([s, c, z], -1), np.stack([z, z, o], -1)], -2)


def field_by_quadrature(mode: TwistedMode, rho: float, phi_rho: float, n_points: int | None = None):
    """Spherical components (+1, 0, -1) of one mode at ``(rho, phi_rho)``, z = 0."""
    k = WAVENUMBER
    kperp = k * math.sin(mode.theta_k)
    if n_points is None:
        n_points = 64 + 4 * int(math.ceil(kperp * rho + abs(mode.m_gamma) + 2))
    phi_k = 2 * math.pi * np.arange(n_points) / n_points
    pol = _rot_z(phi_k) @ (_rot_y(mode.theta_k) @ ETA[mode.helicity])
    phase = (1j ** (-mode.m_gamma)) * np.exp(1j * mode.m_gamma * phi_k) \
        * np.exp(1j * kperp * rho * np.cos(phi_k - phi_rho))
    vec = (phase[:, None] * pol).mean(axis=0)
    return np.array([np.vdot(ETA[lam], vec) for lam in (1, 0, -1)])
