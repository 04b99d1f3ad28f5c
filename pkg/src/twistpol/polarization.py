"""Polarization observables of the excited atom and of the photon field.

State multipoles use the normalisation

    T_KM(l) = sqrt(2K+1) sum_{m, m'} rho_{m' m} <l m; K M | l m'>

so that ``T_00 = 1``; ``B_K = T_K0`` are the orientation (odd K) and
alignment (even K) parameters.  For spin 1 the Cartesian vector and
quadrupole polarizations are

    p_i  = tr(rho S_i),                       (S_i)_{jk} = -i eps_{ijk}
    p_ij = tr(rho P_ij),  P_ij = 3/2 (S_i S_j + S_j S_i) - 2 delta_ij

in the Cartesian basis reached through ``a^+- = (-+a_x + i a_y)/sqrt(2)``,
``a^0 = a_z``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from .angular import clebsch_gordan
from .beam import Beam, FieldComponents, field_components
from .density import NODE_FLOOR, DensityMatrix, projections, pure_density
from .transition import AmplitudeSet, AtomPosition, TransitionSpec, amplitude_set

__all__ = [
    "CartesianPolarization",
    "PolarizationReport",
    "RelationReport",
    "alignment",
    "alignment_closed_form",
    "cartesian_from_density",
    "cartesian_polarizations",
    "density_from_amplitudes",
    "density_from_cartesian",
    "mean_lz",
    "photon_atom_relations",
    "polarization_report",
    "tensor_polarization",
]


def _entries(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.entries
    return np.asarray(rho, dtype=complex)


def _ell(entries: np.ndarray) -> int:
    return (entries.shape[-1] - 1) // 2


def _vector(a) -> np.ndarray:
    if isinstance(a, (AmplitudeSet, FieldComponents)):
        return a.vector()
    return np.asarray(a, dtype=complex)


def density_from_amplitudes(a, floor: float = NODE_FLOOR) -> DensityMatrix:
    """Pure-state density matrix from an amplitude set (or stacked vectors).

    Raises :class:`NodePointError` for a single all-zero vector; in a batch
    the node entries are NaN.
    """
    entries, _ = pure_density(_vector(a), floor)
    return DensityMatrix(entries)


# ---------------------------------------------------------------------------
# Spherical multipoles
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _multipole_weights(ell: int, K: int, M: int) -> np.ndarray:
    """``sqrt(2K+1) <l m; K M | l m'>`` laid out as a (m', m) matrix."""
    ms = projections(ell)
    w = np.zeros((2 * ell + 1, 2 * ell + 1))
    for i, mp in enumerate(ms):
        for k, m in enumerate(ms):
            w[i, k] = clebsch_gordan(ell, int(m), K, M, ell, int(mp))
    w *= math.sqrt(2 * K + 1)
    w.setflags(write=False)
    return w


def tensor_polarization(rho, K: int, M: int):
    """State multipole ``T_KM``; complex, shape of the batch."""
    e = _entries(rho)
    ell = _ell(e)
    if not 0 <= K <= 2 * ell:
        raise ValueError(f"K must lie in 0..{2 * ell} for l = {ell}, got {K}")
    if abs(M) > K:
        raise ValueError(f"|M| must not exceed K = {K}, got {M}")
    t = np.einsum("...ij,ij->...", e, _multipole_weights(ell, K, M))
    return complex(t) if t.ndim == 0 else t


def alignment(rho, K: int):
    """``B_K = T_K0`` (real)."""
    e = _entries(rho)
    if not 1 <= K <= 2 * _ell(e):
        raise ValueError(f"K must lie in 1..{2 * _ell(e)}, got {K}")
    t = np.real(tensor_polarization(e, K, 0))
    return float(t) if np.ndim(t) == 0 else t


_R = math.sqrt


def alignment_closed_form(w, K: int):
    """Explicit ``B_K`` in terms of populations for spin 1 and spin 2.

    ``w`` is ordered by descending m (last axis).
    """
    w = np.asarray(w, dtype=float)
    if w.shape[-1] == 3:
        w1, w0, wm1 = (w[..., i] for i in range(3))
        forms = {
            1: _R(3 / 2) * (w1 - wm1),
            2: _R(1 / 2) * (w1 - 2 * w0 + wm1),
        }
    elif w.shape[-1] == 5:
        w2, w1, w0, wm1, wm2 = (w[..., i] for i in range(5))
        forms = {
            1: _R(1 / 2) * (2 * w2 + w1 - wm1 - 2 * wm2),
            2: _R(5 / 14) * (2 * w2 + 2 * wm2 - w1 - wm1 - 2 * w0),
            3: _R(1 / 2) * (w2 - 2 * w1 + 2 * wm1 - wm2),
            4: _R(1 / 14) * (w2 - 4 * w1 + 6 * w0 - 4 * wm1 + wm2),
        }
    else:
        raise ValueError("closed forms exist for spin 1 and spin 2 only")
    if K not in forms:
        raise ValueError(f"no closed form for K = {K}")
    return forms[K]


def mean_lz(rho):
    """``<l_z> = sum_m m w(m)``."""
    e = _entries(rho)
    w = np.real(np.diagonal(e, axis1=-2, axis2=-1))
    v = w @ projections(_ell(e)).astype(float)
    return float(v) if np.ndim(v) == 0 else v


# ---------------------------------------------------------------------------
# Cartesian spin-1 polarizations
# ---------------------------------------------------------------------------

# rows: (a+, a0, a-) ; columns: (a_x, a_y, a_z)
_SPH_FROM_CART = np.array([
    [-1.0, 1j, 0.0],
    [0.0, 0.0, math.sqrt(2.0)],
    [1.0, 1j, 0.0],
]) / math.sqrt(2.0)
_CART_FROM_SPH = _SPH_FROM_CART.conj().T


def _spin_matrices() -> np.ndarray:
    s = np.zeros((3, 3, 3), complex)
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        s[i, j, k] = -1j
        s[i, k, j] = 1j
    return s


_S = _spin_matrices()
_P = np.array([[1.5 * (_S[i] @ _S[j] + _S[j] @ _S[i]) - 2.0 * (i == j) * np.eye(3)
                for j in range(3)] for i in range(3)])

CARTESIAN_FIELDS = ("p_x", "p_y", "p_z", "p_xy", "p_xz", "p_yz", "p_xx_minus_yy", "p_zz")


@dataclass(frozen=True)
class CartesianPolarization:
    """Three vector and five independent quadrupole polarizations of spin 1."""

    p_x: float | np.ndarray
    p_y: float | np.ndarray
    p_z: float | np.ndarray
    p_xy: float | np.ndarray
    p_xz: float | np.ndarray
    p_yz: float | np.ndarray
    p_xx_minus_yy: float | np.ndarray
    p_zz: float | np.ndarray

    def as_dict(self) -> dict:
        return asdict(self)


def cartesian_from_density(rho) -> CartesianPolarization:
    """Cartesian polarizations of a spin-1 density matrix (pure or mixed)."""
    e = _entries(rho)
    if e.shape[-1] != 3:
        raise ValueError("Cartesian polarizations are defined for spin 1 only")
    cart = _CART_FROM_SPH @ e @ _SPH_FROM_CART

    def tr(op):
        v = np.real(np.einsum("...ij,ji->...", cart, op))
        return float(v) if np.ndim(v) == 0 else v

    return CartesianPolarization(
        p_x=tr(_S[0]), p_y=tr(_S[1]), p_z=tr(_S[2]),
        p_xy=tr(_P[0, 1]), p_xz=tr(_P[0, 2]), p_yz=tr(_P[1, 2]),
        p_xx_minus_yy=tr(_P[0, 0] - _P[1, 1]), p_zz=tr(_P[2, 2]),
    )


def cartesian_polarizations(a) -> CartesianPolarization:
    """Cartesian polarizations of a spin-1 amplitude vector ``(a+, a0, a-)``.

    Accepts an :class:`AmplitudeSet` with ``l_f = 1``, :class:`FieldComponents`
    or a raw array; the vector is normalised internally.
    """
    if isinstance(a, AmplitudeSet) and a.l_f != 1:
        raise ValueError(f"Cartesian polarizations need l = 1, got l_f = {a.l_f}")
    vec = _vector(a)
    if vec.shape[-1] != 3:
        raise ValueError("Cartesian polarizations are defined for spin 1 only")
    entries, _ = pure_density(vec)
    return cartesian_from_density(entries)


def density_from_cartesian(p: CartesianPolarization) -> DensityMatrix:
    """Rebuild the spherical-basis density matrix from the eight parameters."""
    def c(v):
        return np.asarray(v, float)[..., None, None]

    eye = np.eye(3)
    cart = (eye
            + 1.5 * (c(p.p_x) * _S[0] + c(p.p_y) * _S[1] + c(p.p_z) * _S[2])
            + (2.0 / 3.0) * (c(p.p_xy) * _P[0, 1] + c(p.p_yz) * _P[1, 2] + c(p.p_xz) * _P[0, 2])
            + (1.0 / 6.0) * c(p.p_xx_minus_yy) * (_P[0, 0] - _P[1, 1])
            + 0.5 * c(p.p_zz) * _P[2, 2]) / 3.0
    return DensityMatrix(_SPH_FROM_CART @ cart @ _CART_FROM_SPH)


# ---------------------------------------------------------------------------
# Photon <-> atom relations for S -> P
# ---------------------------------------------------------------------------

# photon value = sign * atom value
RELATION_SIGNS = {
    "p_xx_minus_yy": 1, "p_zz": 1, "p_xy": 1,
    "p_xz": -1, "p_yz": -1,
    "p_z": 1, "p_x": -1, "p_y": -1,
}


@dataclass(frozen=True)
class RelationReport:
    """Photon field polarization versus excited-atom polarization (S -> P).

    ``pairs[name] = (photon, sign * atom)`` for each displayed relation.
    ``mirror_discrepancy`` compares the atomic density matrix with the photon
    density matrix taken at the point reflected through the vortex line,
    ``(b, phi_b + pi)``; that identity holds for every beam.
    """

    photon: CartesianPolarization
    atom: CartesianPolarization
    pairs: Mapping[str, tuple]
    max_discrepancy: float | np.ndarray
    mirror_discrepancy: float | np.ndarray


def photon_atom_relations(beam: Beam, pos: AtomPosition) -> RelationReport:
    """Evaluate the eight photon/atom polarization relations at ``pos``.

    The photon density matrix is built from the field at the atom's impact
    point ``(b, phi_b)``.  For beams whose modes all share the parity of
    ``m_gamma`` the relations are exact; otherwise ``max_discrepancy`` shows
    by how much they fail.
    """
    amps = amplitude_set(beam, TransitionSpec(1), pos)
    b, phi = np.broadcast_arrays(np.asarray(pos.b, float), np.asarray(pos.phi_b, float))
    scalar = b.ndim == 0
    loc = (float(b), float(phi)) if scalar else None
    rho_e, _ = pure_density(amps.vector(), location=loc)
    rho_g, _ = pure_density(field_components(beam, b, phi).vector(), location=loc)
    rho_mirror, _ = pure_density(field_components(beam, b, phi + math.pi).vector(), location=loc)

    atom = cartesian_from_density(rho_e)
    photon = cartesian_from_density(rho_g)
    pairs = {}
    worst = np.zeros(b.shape)
    for name, sign in RELATION_SIGNS.items():
        lhs = np.asarray(getattr(photon, name))
        rhs = sign * np.asarray(getattr(atom, name))
        pairs[name] = (lhs if not scalar else float(lhs), rhs if not scalar else float(rhs))
        worst = np.fmax(worst, np.abs(lhs - rhs))
    mirror = np.max(np.abs(rho_e - rho_mirror), axis=(-2, -1))
    if scalar:
        worst, mirror = float(worst), float(mirror)
    return RelationReport(photon, atom, pairs, worst, mirror)


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolarizationReport:
    ell: int
    populations: np.ndarray
    multipoles: dict[tuple[int, int], complex]
    alignment: dict[int, float]
    mean_lz: float
    cartesian: CartesianPolarization | None = field(default=None)


def polarization_report(rho) -> PolarizationReport:
    """Every multipole, ``B_K``, ``<l_z>`` and (spin 1) Cartesian block."""
    dm = rho if isinstance(rho, DensityMatrix) else DensityMatrix(_entries(rho))
    if dm.entries.ndim != 2:
        raise ValueError("polarization_report takes a single density matrix")
    ell = dm.ell
    multipoles = {(K, M): tensor_polarization(dm, K, M)
                  for K in range(2 * ell + 1) for M in range(-K, K + 1)}
    return PolarizationReport(
        ell=ell,
        populations=dm.populations,
        multipoles=multipoles,
        alignment={K: alignment(dm, K) for K in range(1, 2 * ell + 1)},
        mean_lz=mean_lz(dm),
        cartesian=cartesian_from_density(dm) if ell == 1 else None,
    )
