"""Generating functions, Maslov-type indices and equivariant topology on lens spaces."""

from __future__ import annotations

__version__ = "0.1.0"

from lensmaslov.lens_core import (
    ContactHamiltonian,
    HamTerm,
    LensData,
    lift_hamiltonian,
    reeb,
    tau,
    tau_inverse,
    zk_orbit,
)
from lensmaslov.quadform import QuadForm, index_i, reduce_identity_form, reeb_quad, sharp_quad

__all__ = [
    "__version__",
    "ContactHamiltonian",
    "HamTerm",
    "LensData",
    "QuadForm",
    "index_i",
    "lift_hamiltonian",
    "reduce_identity_form",
    "reeb",
    "reeb_quad",
    "sharp_quad",
    "tau",
    "tau_inverse",
    "zk_orbit",
]
