"""Z_k-equivariant simplicial models of lens spaces and their cohomological index."""

from lensmaslov.equivtop.chains import JoinModel, boundary_rule_defect, chain_join_via_phi, twist_check
from lensmaslov.equivtop.complexes import (
    EquivComplex,
    QuotientComplex,
    Subcomplex,
    circle_complex,
    join_complex,
    random_subcomplex,
    sphere_model,
)
from lensmaslov.equivtop.homology import (
    ChainVector,
    IndexShapeError,
    betti,
    bockstein,
    cohom_index,
    cohomology_basis,
    homology_basis,
    homology_index,
)
from lensmaslov.equivtop.io import complex_from_text, complex_to_text
from lensmaslov.equivtop.properties import PropertyReport, property_suite

__all__ = [
    "ChainVector",
    "EquivComplex",
    "IndexShapeError",
    "JoinModel",
    "PropertyReport",
    "QuotientComplex",
    "Subcomplex",
    "betti",
    "bockstein",
    "boundary_rule_defect",
    "chain_join_via_phi",
    "circle_complex",
    "cohom_index",
    "cohomology_basis",
    "complex_from_text",
    "complex_to_text",
    "homology_basis",
    "homology_index",
    "join_complex",
    "property_suite",
    "random_subcomplex",
    "sphere_model",
    "twist_check",
]
