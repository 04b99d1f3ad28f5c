"""Photoexcitation of atoms by twisted (Bessel-beam) light.

Subpackages by layer: :mod:`angular` (Wigner d, Clebsch-Gordan, Bessel J),
:mod:`beam` (modes and fields), :mod:`transition` (amplitudes),
:mod:`polarization` (density matrices and multipoles), :mod:`scan` (grids,
CSV output) and :mod:`cli`.
"""

from .angular import bessel_j, clebsch_gordan, wigner_small_d
from .beam import Beam, FieldComponents, TwistedMode, field_components, photon_density_matrix
from .density import DensityMatrix, NodePointError
from .polarization import (
    alignment,
    cartesian_polarizations,
    density_from_amplitudes,
    mean_lz,
    photon_atom_relations,
    polarization_report,
    tensor_polarization,
)
from .transition import (
    AmplitudeSet,
    AtomPosition,
    TransitionSpec,
    amplitude,
    amplitude_jm,
    amplitude_set,
    g_factor,
    quintiero_ratio,
)

__all__ = [
    "alignment",
    "amplitude",
    "amplitude_jm",
    "amplitude_set",
    "AmplitudeSet",
    "AtomPosition",
    "Beam",
    "bessel_j",
    "cartesian_polarizations",
    "clebsch_gordan",
    "density_from_amplitudes",
    "DensityMatrix",
    "field_components",
    "FieldComponents",
    "g_factor",
    "mean_lz",
    "NodePointError",
    "photon_atom_relations",
    "photon_density_matrix",
    "polarization_report",
    "quintiero_ratio",
    "tensor_polarization",
    "TransitionSpec",
    "TwistedMode",
    "wigner_small_d",
]

__version__ = "0.1.0"
