"""Approximate octanol-water partition coefficient (LogP).

The value is the sum of per-atom contributions from the shipped
``logp_contributions.tsv`` table; hydrogens implied by valence do not
contribute (only explicit [H] atoms match the H row). The table is coarse
by design and every consumer labels the output as approximate.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .errors import UnclassifiedAtomType
from .molecule import Molecule


@dataclass(frozen=True)
class _Rule:
    element: str
    aromatic: bool | None  # None = either
    het_neighbour: bool | None
    contribution: float


_RULES: list[_Rule] | None = None


def _load_rules() -> list[_Rule]:
    global _RULES
    if _RULES is not None:
        return _RULES
    rules = []
    table = resources.files("molforge.assets").joinpath("logp_contributions.tsv")
    for line in table.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#") or line.startswith("pattern\t"):
            continue
        pattern, contribution = line.split("\t")[:2]
        parts = pattern.split(":")
        aromatic: bool | None = None
        het: bool | None = None
        for flag in parts[1:]:
            if flag == "aromatic":
                aromatic = True
            elif flag == "aliphatic":
                aromatic = False
            elif flag == "het-neighbour":
                het = True
            else:
                raise ValueError(f"unknown pattern flag {flag!r} in LogP table")
        rules.append(_Rule(parts[0], aromatic, het, float(contribution)))
    _RULES = rules
    return rules


def atom_contribution(mol: Molecule, idx: int) -> float:
    atom = mol.atoms[idx]
    has_het = any(
        mol.atoms[j].element not in ("C", "H") for j in mol.neighbors(idx))
    for rule in _load_rules():
        if rule.element != atom.element:
            continue
        if rule.aromatic is not None and rule.aromatic != atom.aromatic:
            continue
        if rule.het_neighbour is not None and rule.het_neighbour != has_het:
            continue
        return rule.contribution
    raise UnclassifiedAtomType(idx, atom.element)


def crippen_logp(mol: Molecule) -> float:
    """Approximate LogP; raises :class:`UnclassifiedAtomType` when an atom
    has no row in the contribution table."""
    return sum(atom_contribution(mol, i) for i in range(len(mol.atoms)))
