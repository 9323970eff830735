"""Structural descriptors over parsed molecules.

Counting rules (documented here because they pin the oracle fixtures):

* nRing / MaxRing come from the SSSR.
* nRot counts non-ring single bonds whose two endpoints both have
  heavy-atom degree > 1, excluding amide C-N bonds (a single C-N bond
  where the carbon carries a double bond to oxygen).
* nRig is the heavy-atom bond count minus nRot.
* nHD counts nitrogen/oxygen atoms bearing at least one hydrogen.
* nHet counts heavy atoms other than carbon.
* fChar is the sum of formal charges.
"""

from __future__ import annotations

from .molecule import DOUBLE, Molecule, SINGLE
from .rings import perceive_rings

DESCRIPTOR_KINDS = ("nRing", "MaxRing", "nRot", "nRig", "nHD", "nHet", "fChar")


def _is_amide_cn(mol: Molecule, a: int, b: int) -> bool:
    for c, n in ((a, b), (b, a)):
        if mol.atoms[c].element == "C" and mol.atoms[n].element == "N":
            for bond in mol.bonds_of(c):
                if bond.order == DOUBLE and mol.atoms[bond.other(c)].element == "O":
                    return True
    return False


def rotatable_bond_count(mol: Molecule) -> int:
    perceive_rings(mol)
    count = 0
    for bond in mol.bonds:
        if bond.order != SINGLE or bond.in_ring:
            continue
        if not (mol.atoms[bond.a].is_heavy and mol.atoms[bond.b].is_heavy):
            continue
        if mol.heavy_degree(bond.a) <= 1 or mol.heavy_degree(bond.b) <= 1:
            continue
        if _is_amide_cn(mol, bond.a, bond.b):
            continue
        count += 1
    return count


def heavy_bond_count(mol: Molecule) -> int:
    return sum(1 for b in mol.bonds
               if mol.atoms[b.a].is_heavy and mol.atoms[b.b].is_heavy)


def compute_descriptor(mol: Molecule, kind: str) -> int:
    """One of nRing, MaxRing, nRot, nRig, nHD, nHet, fChar."""
    if kind == "nRing":
        return perceive_rings(mol).n_ring
    if kind == "MaxRing":
        return perceive_rings(mol).max_ring
    if kind == "nRot":
        return rotatable_bond_count(mol)
    if kind == "nRig":
        return heavy_bond_count(mol) - rotatable_bond_count(mol)
    if kind == "nHD":
        return sum(1 for a in mol.atoms
                   if a.element in ("N", "O") and a.total_h >= 1)
    if kind == "nHet":
        return sum(1 for a in mol.atoms if a.is_heavy and a.element != "C")
    if kind == "fChar":
        return sum(a.formal_charge for a in mol.atoms)
    raise ValueError(f"unknown descriptor kind {kind!r}; expected one of {DESCRIPTOR_KINDS}")


def all_descriptors(mol: Molecule) -> dict[str, int]:
    return {kind: compute_descriptor(mol, kind) for kind in DESCRIPTOR_KINDS}
