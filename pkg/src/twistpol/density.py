"""Spin-density matrices in the spherical basis.

Rows and columns are ordered by descending projection, ``m = l, l-1, ..., -l``,
so index ``i`` holds ``m = l - i``.  A leading batch shape is allowed: an
array of shape ``(..., 2l+1, 2l+1)`` is a stack of matrices, one per point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["DensityMatrix", "NodePointError", "NODE_FLOOR", "pure_density"]

# A single point has no natural intensity scale (amplitudes are in arbitrary
# units), so it is a node only when its total intensity underflows.  Scans
# use a threshold relative to their own maximum instead.
NODE_FLOOR = float(np.finfo(float).tiny)


class NodePointError(ValueError):
    """Nothing is excited (or the field vanishes) at the requested point."""

    def __init__(self, message: str, location=None):
        super().__init__(message if location is None else f"{message} at {location}")
        self.location = location


def projections(ell: int) -> np.ndarray:
    return np.arange(ell, -ell - 1, -1)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace matrix (or stack of them) for spin ``ell``."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim < 2 or e.shape[-1] != e.shape[-2] or e.shape[-1] % 2 == 0:
            raise ValueError(f"density matrix must be (..., 2l+1, 2l+1), got {e.shape}")
        ok = np.all(np.isfinite(e), axis=(-2, -1))
        herm = np.abs(e - np.conj(np.swapaxes(e, -1, -2))).max(axis=(-2, -1))
        tr = np.trace(e, axis1=-2, axis2=-1)
        if np.any(ok & (herm > 1e-10)):
            raise ValueError("density matrix is not Hermitian")
        if np.any(ok & (np.abs(tr - 1.0) > 1e-10)):
            raise ValueError("density matrix trace differs from 1")
        object.__setattr__(self, "entries", e)

    @property
    def dim(self) -> int:
        return self.entries.shape[-1]

    @property
    def ell(self) -> int:
        return (self.dim - 1) // 2

    @property
    def m_values(self) -> np.ndarray:
        return projections(self.ell)

    @property
    def populations(self) -> np.ndarray:
        """Diagonal ``w(m)`` in descending-m order."""
        return np.real(np.diagonal(self.entries, axis1=-2, axis2=-1))

    def element(self, m_row: int, m_col: int):
        l = self.ell
        return self.entries[..., l - m_row, l - m_col]


def pure_density(vec, floor: float = NODE_FLOOR, location=None):
    """Normalised outer product ``a(m') a*(m) / sum |a|^2``.

    ``vec`` has shape ``(..., 2l+1)``.  Returns ``(entries, node_mask)``;
    entries are NaN where the total intensity is at or below ``floor``.
    For a single (unbatched) vector a node raises :class:`NodePointError`.
    """
    vec = np.asarray(vec, dtype=complex)
    total = np.sum((vec * np.conj(vec)).real, axis=-1)
    node = total <= floor
    if vec.ndim == 1 and node:
        raise NodePointError("all amplitudes vanish", location)
    safe = np.where(node, 1.0, total)
    outer = vec[..., :, None] * np.conj(vec[..., None, :])
    # real and imaginary parts divided separately: complex division loses the last bit
    rho = (outer.real / safe[..., None, None]) + 1j * (outer.imag / safe[..., None, None])
    if np.any(node):
        rho = np.where(node[..., None, None], np.nan, rho)
    return rho, node
