"""Molecular graph types and the element/valence tables they rely on.

Molecules are plain attributed graphs: atoms carry element, aromaticity,
charge, isotope and hydrogen information; bonds carry an order and (after
ring perception) an in-ring flag. Instances are treated as immutable once
built by the parser; nothing in this package mutates a parsed molecule.
"""

from __future__ import annotations

from dataclasses import dataclass

# Elements writable without brackets, per the common SMILES organic subset.
ORGANIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})

# Elements that may appear in aromatic (lowercase) form.
AROMATIC_ELEMENTS = frozenset({"B", "C", "N", "O", "P", "S", "Se", "As"})

# Symbols accepted in bracket atoms. Elements outside DEFAULT_VALENCES are
# only checked for gross bond-order overflow (no default valence model).
KNOWN_ELEMENTS = frozenset({
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne",
    "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar", "K", "Ca",
    "Ti", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge",
    "As", "Se", "Br", "Kr", "Sr", "Zr", "Mo", "Ru", "Rh", "Pd",
    "Ag", "Cd", "In", "Sn", "Sb", "Te", "I", "Xe", "Ba", "W",
    "Pt", "Au", "Hg", "Tl", "Pb", "Bi",
})

# Allowed total valences (bond order sum + hydrogens) for neutral atoms.
DEFAULT_VALENCES = {
    "H": (1,),
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

# Valence overrides for the common charge states.
CHARGED_VALENCES = {
    ("B", -1): (4,),
    ("C", 1): (3,),
    ("C", -1): (3,),
    ("N", 1): (4,),
    ("N", -1): (2,),
    ("O", 1): (3,),
    ("O", -1): (1,),
    ("P", 1): (4,),
    ("S", 1): (3, 5),
    ("S", -1): (1,),
    ("F", -1): (0,),
    ("Cl", -1): (0,),
    ("Br", -1): (0,),
    ("I", -1): (0,),
    ("H", 1): (0,),
    ("H", -1): (0,),
}

# Ceiling applied to atoms with no valence model (exotic elements / charges).
OVERFLOW_LIMIT = 8

SINGLE = "single"
DOUBLE = "double"
TRIPLE = "triple"
AROMATIC = "aromatic"

BOND_ORDER_VALUE = {SINGLE: 1.0, DOUBLE: 2.0, TRIPLE: 3.0, AROMATIC: 1.5}


@dataclass
class Atom:
    """One atom of a molecular graph.

    ``explicit_h`` is the bracket-specified hydrogen count, or None when the
    atom was written bare and hydrogens are implied by the valence table.
    ``implicit_h`` is filled in by the parser for bare atoms (0 otherwise).
    ``stereo`` keeps any @/@@ annotation verbatim; it is carried along but
    ignored by canonicalization and descriptors.
    """

    element: str
    index: int
    aromatic: bool = False
    formal_charge: int = 0
    explicit_h: int | None = None
    isotope: int | None = None
    implicit_h: int = 0
    stereo: str | None = None

    @property
    def total_h(self) -> int:
        return self.explicit_h if self.explicit_h is not None else self.implicit_h

    @property
    def is_heavy(self) -> bool:
        return self.element != "H"


@dataclass
class Bond:
    """An edge between two atom indices. ``in_ring`` is set by ring perception."""

    a: int
    b: int
    order: str = SINGLE
    in_ring: bool = False

    @property
    def order_value(self) -> float:
        return BOND_ORDER_VALUE[self.order]

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a


@dataclass
class RingInfo:
    """SSSR rings as ordered atom-index cycles plus the two ring descriptors."""

    rings: list[list[int]]
    n_ring: int
    max_ring: int


@dataclass
class Fingerprint:
    """Fixed-width bit vector; bits stored as an int bitmask."""

    bits: int
    radius: int
    width: int

    def popcount(self) -> int:
        return self.bits.bit_count()

    def on_bits(self) -> list[int]:
        return [i for i in range(self.width) if self.bits >> i & 1]


class Molecule:
    """Attributed molecular graph produced by :func:`parse_smiles`.

    Atom order follows the source text. Adjacency is precomputed; ring
    information is computed lazily and cached (the object is otherwise
    immutable, so the cache is safe to share across threads).
    """

    __slots__ = ("atoms", "bonds", "source_smiles", "_adjacency", "_ring_info")

    def __init__(self, atoms: list[Atom], bonds: list[Bond], source_smiles: str = ""):
        self.atoms = atoms
        self.bonds = bonds
        self.source_smiles = source_smiles
        self._adjacency: list[list[Bond]] = [[] for _ in atoms]
        for bond in bonds:
            self._adjacency[bond.a].append(bond)
            self._adjacency[bond.b].append(bond)
        self._ring_info: RingInfo | None = None

    def __len__(self) -> int:
        return len(self.atoms)

    def bonds_of(self, idx: int) -> list[Bond]:
        return self._adjacency[idx]

    def neighbors(self, idx: int) -> list[int]:
        return [bond.other(idx) for bond in self._adjacency[idx]]

    def bond_between(self, a: int, b: int) -> Bond | None:
        for bond in self._adjacency[a]:
            if bond.other(a) == b:
                return bond
        return None

    def degree(self, idx: int) -> int:
        return len(self._adjacency[idx])

    def heavy_degree(self, idx: int) -> int:
        return sum(1 for bond in self._adjacency[idx] if self.atoms[bond.other(idx)].is_heavy)

    def bond_order_sum(self, idx: int) -> float:
        return sum(bond.order_value for bond in self._adjacency[idx])

    @property
    def n_components(self) -> int:
        seen = [False] * len(self.atoms)
        count = 0
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            count += 1
            stack = [start]
            seen[start] = True
            while stack:
                i = stack.pop()
                for bond in self._adjacency[i]:
                    j = bond.other(i)
                    if not seen[j]:
                        seen[j] = True
                        stack.append(j)
        return count

    def components(self) -> list[list[int]]:
        seen = [False] * len(self.atoms)
        out = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            comp = [start]
            seen[start] = True
            stack = [start]
            while stack:
                i = stack.pop()
                for bond in self._adjacency[i]:
                    j = bond.other(i)
                    if not seen[j]:
                        seen[j] = True
                        comp.append(j)
                        stack.append(j)
            out.append(sorted(comp))
        return out

    def copy(self) -> "Molecule":
        atoms = [Atom(a.element, a.index, a.aromatic, a.formal_charge,
                      a.explicit_h, a.isotope, a.implicit_h, a.stereo)
                 for a in self.atoms]
        bonds = [Bond(b.a, b.b, b.order, b.in_ring) for b in self.bonds]
        return Molecule(atoms, bonds, self.source_smiles)


def allowed_valences(element: str, charge: int) -> tuple[int, ...] | None:
    """Allowed total valences for an element/charge pair, or None when the
    element has no valence model and only the overflow ceiling applies."""
    if charge != 0:
        override = CHARGED_VALENCES.get((element, charge))
        if override is not None:
            return override
        base = DEFAULT_VALENCES.get(element)
        if base is None:
            return None
        # Uncommon charge on a modelled element: relax by |charge| and keep
        # the overflow ceiling meaningful.
        return tuple(v + abs(charge) for v in base)
    return DEFAULT_VALENCES.get(element)


def default_hcount(element: str, aromatic: bool, charge: int, bond_orders: list[str]) -> int:
    """Hydrogens implied for a bare (bracket-free) atom with the given bonds.

    Aromatic atoms follow the usual convention: carbon with two ring
    neighbours gets one hydrogen, heteroatoms get none (a pyrrole-type
    nitrogen must be written [nH]).
    """
    if aromatic:
        if element in ("C", "B"):
            free = {"C": 3, "B": 2}[element] - len(bond_orders)
            return max(0, free)
        return 0
    total = sum(BOND_ORDER_VALUE[o] for o in bond_orders)
    valences = allowed_valences(element, charge)
    if not valences:
        return 0
    for v in sorted(valences):
        if v >= total:
            return int(v - total)
    return 0
