"""Chemical validity checks on parsed molecules.

A molecule is valid when every atom's bond-order sum plus hydrogens fits an
allowed valence for its element and charge. Aromatic atoms are checked
leniently (each aromatic bond counts one sigma bond and one extra unit of
slack is granted for the delocalized pi electron), since assigning exact pi
bonds would require kekulization. Elements without a valence model are only
rejected on gross overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

from .molecule import AROMATIC, Molecule, OVERFLOW_LIMIT, allowed_valences


@dataclass
class ValenceViolation:
    atom_index: int
    element: str
    observed: float
    allowed: tuple[int, ...] | None
    message: str


@dataclass
class ValidityReport:
    valid: bool
    violations: list[ValenceViolation]


def validate_valence(mol: Molecule) -> ValidityReport:
    """Report per-atom valence violations; never raises."""
    violations: list[ValenceViolation] = []
    for atom in mol.atoms:
        aromatic_bonds = 0
        order_sum = 0.0
        for bond in mol.bonds_of(atom.index):
            if bond.order == AROMATIC:
                aromatic_bonds += 1
                order_sum += 1.0
            else:
                order_sum += bond.order_value
        total = order_sum + atom.total_h
        allowed = allowed_valences(atom.element, atom.formal_charge)
        if allowed is None:
            if total > OVERFLOW_LIMIT:
                violations.append(ValenceViolation(
                    atom.index, atom.element, total, None,
                    f"bond order sum {total:g} exceeds the overflow limit"))
            continue
        # Totals strictly below an allowed valence are tolerated (radicals,
        # under-specified bracket atoms); only excess is a violation.
        limit = max(allowed) + (1 if atom.aromatic and aromatic_bonds else 0)
        if total > limit:
            charge_tag = "%+d" % atom.formal_charge if atom.formal_charge else ""
            violations.append(ValenceViolation(
                atom.index, atom.element, total, allowed,
                f"ValenceExceeded: {atom.element}{charge_tag} has total valence "
                f"{total:g}, allowed {allowed}"))
    return ValidityReport(valid=not violations, violations=violations)


def is_valid(mol: Molecule) -> bool:
    return validate_valence(mol).valid
