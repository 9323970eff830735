"""SMILES-string to molecular-graph parser.

Supports the organic subset, bracket atoms (isotope, charge, explicit
hydrogens, @/@@ annotations, atom class), branches, single-digit and %nn
ring closures, explicit bond symbols, aromatic lowercase forms and
dot-separated components. Directional bond marks (/ and \\) are accepted
and discarded; tetrahedral marks are kept on the atom as annotations.

Parsing is purely syntactic: chemically impossible valences are accepted
here and reported by :func:`molforge.chem.valence.validate_valence`.
"""

from __future__ import annotations

import re

from .errors import (
    EmptyInput,
    MalformedBracketAtom,
    SmilesParseError,
    UnbalancedParenthesis,
    UnclosedRing,
    UnknownElement,
)
from .molecule import (
    AROMATIC,
    AROMATIC_ELEMENTS,
    DOUBLE,
    KNOWN_ELEMENTS,
    SINGLE,
    TRIPLE,
    Atom,
    Bond,
    Molecule,
    default_hcount,
)

BOND_SYMBOLS = {"-": SINGLE, "=": DOUBLE, "#": TRIPLE, ":": AROMATIC}

_BRACKET_RE = re.compile(
    r"""^(?P<isotope>\d+)?
        (?P<symbol>[A-Z][a-z]?|as|se|[bcnops]|\*)
        (?P<stereo>@{1,2})?
        (?P<hcount>H\d*)?
        (?P<charge>\+\d+|-\d+|\++|-+)?
        (?::(?P<cls>\d+))?$""",
    re.VERBOSE,
)


def _parse_bracket(body: str, offset: int) -> Atom:
    """Parse the inside of a bracket atom; offset points at the '['."""
    match = _BRACKET_RE.match(body)
    if match is None:
        raise MalformedBracketAtom(offset, f"malformed bracket atom [{body}]")
    symbol = match.group("symbol")
    aromatic = symbol[0].islower() and symbol != "*"
    element = symbol.capitalize() if aromatic else symbol
    if element == "*":
        raise UnknownElement("*", offset)
    if element not in KNOWN_ELEMENTS:
        raise UnknownElement(element, offset)
    if aromatic and element not in AROMATIC_ELEMENTS:
        raise MalformedBracketAtom(offset, f"element {element} cannot be aromatic")

    hcount = 0
    if match.group("hcount"):
        digits = match.group("hcount")[1:]
        hcount = int(digits) if digits else 1
        if element == "H":
            raise MalformedBracketAtom(offset, "hydrogen atom cannot carry hydrogens")

    charge = 0
    raw_charge = match.group("charge")
    if raw_charge:
        if raw_charge in ("+", "-") or raw_charge[1:].isdigit() is False:
            charge = raw_charge.count("+") - raw_charge.count("-")
        else:
            charge = int(raw_charge)
        if not -4 <= charge <= 4:
            raise MalformedBracketAtom(offset, f"formal charge {charge} outside [-4, +4]")

    isotope = int(match.group("isotope")) if match.group("isotope") else None
    return Atom(
        element=element,
        index=-1,
        aromatic=aromatic,
        formal_charge=charge,
        explicit_h=hcount,
        isotope=isotope,
        stereo=match.group("stereo"),
    )


def parse_smiles(text: str) -> Molecule:
    """Parse a SMILES string into a :class:`Molecule`.

    Raises a :class:`SmilesParseError` subclass (carrying the byte offset)
    on syntax faults: empty input, unclosed rings, unbalanced parentheses,
    unknown element symbols and malformed bracket atoms.
    """
    if text is None or text == "":
        raise EmptyInput()

    atoms: list[Atom] = []
    bonds: list[Bond] = []
    bond_keys: set[tuple[int, int]] = set()
    anchor: int | None = None
    pending_bond: str | None = None
    pending_bond_offset = 0
    branch_stack: list[tuple[int | None, int]] = []
    # ring digit -> (atom index, explicit bond or None, offset of opener)
    open_rings: dict[int, tuple[int, str | None, int]] = {}

    def add_bond(i: int, j: int, order: str | None, offset: int) -> None:
        if i == j:
            raise SmilesParseError("bond between an atom and itself", offset)
        key = (i, j) if i < j else (j, i)
        if key in bond_keys:
            raise SmilesParseError("duplicate bond between one atom pair", offset)
        if order is None:
            order = AROMATIC if atoms[i].aromatic and atoms[j].aromatic else SINGLE
        bond_keys.add(key)
        bonds.append(Bond(i, j, order))

    def add_atom(atom: Atom, offset: int) -> None:
        nonlocal anchor, pending_bond
        atom.index = len(atoms)
        atoms.append(atom)
        if anchor is not None:
            add_bond(anchor, atom.index, pending_bond, offset)
        elif pending_bond is not None:
            raise SmilesParseError("bond symbol with no preceding atom", pending_bond_offset)
        pending_bond = None
        anchor = atom.index

    def close_ring(digit: int, offset: int) -> None:
        nonlocal pending_bond
        if anchor is None:
            raise SmilesParseError(f"ring closure {digit} before any atom", offset)
        if digit in open_rings:
            partner, opener_bond, opener_offset = open_rings.pop(digit)
            order = pending_bond
            if order is None:
                order = opener_bond
            elif opener_bond is not None and opener_bond != order:
                raise SmilesParseError(
                    f"conflicting bond orders on ring closure {digit}", offset)
            add_bond(partner, anchor, order, offset)
            pending_bond = None
        else:
            open_rings[digit] = (anchor, pending_bond, offset)
            pending_bond = None

    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "[":
            end = text.find("]", i)
            if end < 0:
                raise MalformedBracketAtom(i, "unterminated bracket atom")
            add_atom(_parse_bracket(text[i + 1:end], i), i)
            i = end + 1
        elif ch.isalpha() or ch == "*":
            if ch == "*":
                raise UnknownElement("*", i)
            two = text[i:i + 2]
            if two in ("Cl", "Br"):
                add_atom(Atom(element=two, index=-1), i)
                i += 2
            elif ch in "BCNOPSFI":
                add_atom(Atom(element=ch, index=-1), i)
                i += 1
            elif ch in "bcnops":
                add_atom(Atom(element=ch.upper(), index=-1, aromatic=True), i)
                i += 1
            else:
                # Longest plausible symbol for the error message.
                symbol = two if two.istitle() and len(two) == 2 else ch
                raise UnknownElement(symbol, i)
        elif ch in BOND_SYMBOLS:
            if pending_bond is not None:
                raise SmilesParseError("two bond symbols in a row", i)
            pending_bond = BOND_SYMBOLS[ch]
            pending_bond_offset = i
            i += 1
        elif ch in "/\\":
            # Directional marks are a cis/trans annotation on a single bond.
            if pending_bond is not None:
                raise SmilesParseError("two bond symbols in a row", i)
            i += 1
        elif ch == "(":
            if anchor is None:
                raise UnbalancedParenthesis(i, "branch with no preceding atom")
            branch_stack.append((anchor, i))
            i += 1
        elif ch == ")":
            if not branch_stack:
                raise UnbalancedParenthesis(i, "closing parenthesis with no open branch")
            anchor = branch_stack.pop()[0]
            i += 1
        elif ch.isdigit():
            close_ring(int(ch), i)
            i += 1
        elif ch == "%":
            if i + 2 >= n or not text[i + 1:i + 3].isdigit():
                raise SmilesParseError("%% ring closure needs two digits", i)
            close_ring(int(text[i + 1:i + 3]), i)
            i += 3
        elif ch == ".":
            if anchor is None:
                raise SmilesParseError("component separator must follow an atom", i)
            if pending_bond is not None:
                raise SmilesParseError("bond symbol before component separator", pending_bond_offset)
            anchor = None
            i += 1
        elif ch.isspace():
            raise SmilesParseError("whitespace inside SMILES", i)
        else:
            raise SmilesParseError(f"unexpected character {ch!r}", i)

    if pending_bond is not None:
        raise SmilesParseError("dangling bond symbol at end of input", pending_bond_offset)
    if text.endswith("."):
        raise SmilesParseError("trailing component separator", len(text) - 1)
    if branch_stack:
        raise UnbalancedParenthesis(branch_stack[-1][1], "unclosed branch")
    if open_rings:
        digit = min(open_rings, key=lambda d: open_rings[d][2])
        raise UnclosedRing(digit, open_rings[digit][2])
    if not atoms:
        raise EmptyInput()

    mol = Molecule(atoms, bonds, source_smiles=text)
    for atom in atoms:
        if atom.explicit_h is None:
            orders = [b.order for b in mol.bonds_of(atom.index)]
            atom.implicit_h = default_hcount(
                atom.element, atom.aromatic, atom.formal_charge, orders)
    return mol
