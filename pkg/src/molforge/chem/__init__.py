"""Self-contained SMILES toolkit: parsing, validation, canonicalization,
ring perception, circular fingerprints, structural descriptors and an
approximate LogP. No external cheminformatics dependency."""

from .canonical import (
    aromatic_normal_form,
    canonical_smiles,
    render_randomized,
    write_smiles,
)
from .descriptors import DESCRIPTOR_KINDS, all_descriptors, compute_descriptor
from .errors import (
    CanonicalizationFailed,
    EmptyInput,
    FusedAromaticityUnsupported,
    MalformedBracketAtom,
    SmilesParseError,
    UnbalancedParenthesis,
    UnclassifiedAtomType,
    UnclosedRing,
    UnknownElement,
    WidthMismatch,
)
from .fingerprint import DEFAULT_RADIUS, DEFAULT_WIDTH, morgan_fingerprint, tanimoto
from .logp import crippen_logp
from .molecule import Atom, Bond, Fingerprint, Molecule, RingInfo
from .parser import parse_smiles
from .rings import perceive_rings
from .valence import ValidityReport, ValenceViolation, is_valid, validate_valence

__all__ = [
    "Atom", "Bond", "Fingerprint", "Molecule", "RingInfo",
    "parse_smiles", "validate_valence", "is_valid", "ValidityReport",
    "ValenceViolation", "canonical_smiles", "render_randomized",
    "write_smiles", "aromatic_normal_form", "perceive_rings",
    "morgan_fingerprint", "tanimoto", "compute_descriptor",
    "all_descriptors", "crippen_logp",
    "DESCRIPTOR_KINDS", "DEFAULT_RADIUS", "DEFAULT_WIDTH",
    "SmilesParseError", "EmptyInput", "UnclosedRing", "UnbalancedParenthesis",
    "UnknownElement", "MalformedBracketAtom", "CanonicalizationFailed",
    "FusedAromaticityUnsupported", "UnclassifiedAtomType", "WidthMismatch",
]
