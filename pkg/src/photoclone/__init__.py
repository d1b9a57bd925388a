"""Fock-space simulation of linear-optics quantum cloning circuits."""

from .circuits import run_cloner, run_partial_symmetrizer, single_photon_cloner
from .fock import FockState, ModeSlot, OperatorPolynomial
from .optics import LinearModeMap, apply_map, balanced_beam_splitter
from .postselection import PostSelectionPattern, postselect

__version__ = "0.1.0"

__all__ = [
    "FockState",
    "LinearModeMap",
    "ModeSlot",
    "OperatorPolynomial",
    "PostSelectionPattern",
    "apply_map",
    "balanced_beam_splitter",
    "postselect",
    "run_cloner",
    "run_partial_symmetrizer",
    "single_photon_cloner",
]
