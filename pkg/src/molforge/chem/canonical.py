"""Canonical and randomized SMILES rendering.

Canonicalization pipeline:

1. Normalize aromatic form: rings written with alternating single/double
   bonds that pass a simple 4n+2 pi-electron count are converted to their
   lowercase aromatic form, so both renderings of such a ring map to one
   string. This merge covers isolated rings and two-ring fused systems;
   eligible alternating systems spanning three or more fused rings raise
   :class:`FusedAromaticityUnsupported`.
2. Rank atoms by iterative invariant refinement over (element, aromatic,
   charge, isotope, hydrogens, degree, ring membership) and neighbour
   ranks.
3. Break residual ties by branching: force one atom of the first tied
   class, re-refine, recurse, and keep the lexicographically smallest
   rendered string. Tied terminal atoms hanging off one parent are
   provably interchangeable and are branched only once.

The writer is shared with :func:`render_randomized`, which renders the
molecule as stored (no aromatization) under a seeded random traversal.
"""

from __future__ import annotations

import random

from .errors import CanonicalizationFailed, FusedAromaticityUnsupported
from .molecule import (
    AROMATIC,
    DOUBLE,
    ORGANIC_SUBSET,
    SINGLE,
    TRIPLE,
    Atom,
    Bond,
    Molecule,
    default_hcount,
)
from .rings import perceive_rings

_BOND_CODE = {SINGLE: 1, AROMATIC: 2, DOUBLE: 3, TRIPLE: 4}
_AROMATIC_BARE = frozenset({"B", "C", "N", "O", "P", "S"})
_PI_DONORS = frozenset({"N", "O", "S", "P"})
_MAX_TIEBREAK_LEAVES = 50_000


# ---------------------------------------------------------------------------
# aromatic normal form


def _pi_contribution(mol: Molecule, idx: int, system_atoms: set[int]) -> int | None:
    """Pi electrons the atom donates to the candidate system, or None if the
    atom cannot take part in a planar aromatic system."""
    atom = mol.atoms[idx]
    doubles = [b for b in mol.bonds_of(idx) if b.order == DOUBLE]
    if any(b.order == TRIPLE for b in mol.bonds_of(idx)):
        return None
    if mol.degree(idx) + atom.total_h > 3:
        return None
    if len(doubles) > 1:
        return None
    if len(doubles) == 1:
        other = doubles[0].other(idx)
        if other in system_atoms:
            return 1  # endocyclic double bond
        # Exocyclic double bond (e.g. a ring carbonyl): sp2 but donates none.
        return 0 if atom.element in ("C", "N", "S") else None
    # No double bond: lone-pair donors vs empty-orbital atoms.
    if atom.element in _PI_DONORS and atom.formal_charge == 0:
        return 2
    if atom.element == "C" and atom.formal_charge == -1:
        return 2
    if atom.element == "C" and atom.formal_charge == 1:
        return 0
    if atom.element == "B" and atom.formal_charge == 0:
        return 0
    return None


def aromatic_normal_form(mol: Molecule) -> Molecule:
    """Return a copy with eligible alternating-bond rings rewritten as
    aromatic. Input molecules already in lowercase form pass through
    unchanged (their systems are skipped)."""
    work = mol.copy()
    info = perceive_rings(work)
    if not info.rings:
        return work

    eligible: list[tuple[list[int], set[int], set[tuple[int, int]]]] = []
    for ring in info.rings:
        atoms = set(ring)
        ring_bonds = set()
        ok = True
        for i, a in enumerate(ring):
            b = ring[(i + 1) % len(ring)]
            bond = work.bond_between(a, b)
            if bond is None or bond.order not in (SINGLE, DOUBLE):
                ok = False
                break
            ring_bonds.add((min(a, b), max(a, b)))
        if ok:
            eligible.append((ring, atoms, ring_bonds))

    # Group eligible rings into fused systems (sharing at least one bond).
    systems: list[list[int]] = []
    assigned = [-1] * len(eligible)
    for i in range(len(eligible)):
        if assigned[i] != -1:
            continue
        group = [i]
        assigned[i] = i
        frontier = [i]
        while frontier:
            cur = frontier.pop()
            for j in range(len(eligible)):
                if assigned[j] == -1 and eligible[cur][2] & eligible[j][2]:
                    assigned[j] = i
                    group.append(j)
                    frontier.append(j)
        systems.append(group)

    # Decide every system against the unmodified input first, then apply,
    # so the outcome never depends on system processing order.
    to_apply: list[tuple[set[int], set[tuple[int, int]]]] = []
    for group in systems:
        system_atoms: set[int] = set()
        system_bonds: set[tuple[int, int]] = set()
        for gi in group:
            system_atoms |= eligible[gi][1]
            system_bonds |= eligible[gi][2]
        if any(work.atoms[i].aromatic for i in system_atoms):
            continue  # already lowercase (or a mixed form, left as written)
        contributions = []
        feasible = True
        for idx in system_atoms:
            pi = _pi_contribution(work, idx, system_atoms)
            if pi is None:
                feasible = False
                break
            contributions.append(pi)
        if not feasible:
            continue
        # Require the alternating pattern to actually be present: at least
        # one endocyclic double bond per ring keeps saturated rings out.
        has_pattern = all(
            any(work.bond_between(a, b).order == DOUBLE
                for a, b in eligible[gi][2])
            for gi in group)
        if not has_pattern:
            continue
        if sum(contributions) % 4 != 2:
            continue
        if len(group) > 2:
            raise FusedAromaticityUnsupported(
                f"alternating-bond aromatic system spans {len(group)} fused rings; "
                "write such systems in lowercase aromatic form")
        to_apply.append((system_atoms, system_bonds))

    for system_atoms, system_bonds in to_apply:
        for idx in system_atoms:
            work.atoms[idx].aromatic = True
        for a, b in system_bonds:
            work.bond_between(a, b).order = AROMATIC
    return work


# ---------------------------------------------------------------------------
# invariant refinement


def _compress(keys: list) -> tuple[list[int], int]:
    order = sorted(set(keys))
    lookup = {k: r for r, k in enumerate(order)}
    return [lookup[k] for k in keys], len(order)


def initial_ranks(mol: Molecule) -> list[int]:
    perceive_rings(mol)
    keys = []
    for atom in mol.atoms:
        in_ring = any(b.in_ring for b in mol.bonds_of(atom.index))
        keys.append((
            atom.element,
            atom.aromatic,
            atom.formal_charge,
            atom.isotope or 0,
            atom.total_h,
            mol.degree(atom.index),
            in_ring,
        ))
    return _compress(keys)[0]


def refine_ranks(mol: Molecule, ranks: list[int]) -> list[int]:
    n_classes = len(set(ranks))
    while True:
        keys = []
        for i in range(len(mol.atoms)):
            neighbourhood = sorted(
                (_BOND_CODE[b.order], ranks[b.other(i)]) for b in mol.bonds_of(i))
            keys.append((ranks[i], tuple(neighbourhood)))
        ranks, new_count = _compress(keys)
        if new_count == n_classes:
            return ranks
        n_classes = new_count


# ---------------------------------------------------------------------------
# writer


def _atom_token(mol: Molecule, atom: Atom) -> str:
    symbol = atom.element.lower() if atom.aromatic else atom.element
    bare_allowed = (
        atom.element in ORGANIC_SUBSET
        and (not atom.aromatic or atom.element in _AROMATIC_BARE)
        and atom.formal_charge == 0
        and atom.isotope is None
    )
    if bare_allowed:
        orders = [b.order for b in mol.bonds_of(atom.index)]
        if atom.total_h == default_hcount(atom.element, atom.aromatic, 0, orders):
            return symbol
    parts = ["["]
    if atom.isotope is not None:
        parts.append(str(atom.isotope))
    parts.append(symbol)
    h = atom.total_h
    if h == 1:
        parts.append("H")
    elif h > 1:
        parts.append(f"H{h}")
    charge = atom.formal_charge
    if charge == 1:
        parts.append("+")
    elif charge == -1:
        parts.append("-")
    elif charge > 1:
        parts.append(f"+{charge}")
    elif charge < -1:
        parts.append(str(charge))
    parts.append("]")
    return "".join(parts)


def _bond_token(bond: Bond, a1: Atom, a2: Atom) -> str:
    if bond.order == SINGLE:
        return "-" if (a1.aromatic and a2.aromatic) else ""
    if bond.order == AROMATIC:
        return "" if (a1.aromatic and a2.aromatic) else ":"
    if bond.order == DOUBLE:
        return "="
    return "#"


def write_smiles(mol: Molecule, priority: list[int]) -> str:
    """Render the molecule with a depth-first traversal ordered by
    ``priority`` (lower first). Components are joined with dots in order of
    their best priority."""
    n = len(mol.atoms)
    visited = [False] * n
    pieces = []

    component_starts = []
    for comp in mol.components():
        component_starts.append(min(comp, key=lambda i: priority[i]))
    component_starts.sort(key=lambda i: priority[i])

    for start in component_starts:
        # Depth-first spanning tree; edges skipped by the descent become
        # ring closures.
        children: dict[int, list[int]] = {start: []}
        parent_bond: dict[int, Bond] = {}
        closure_bonds: list[Bond] = []
        seen_closure: set[int] = set()
        visited[start] = True

        def sorted_bonds(i: int):
            return iter(sorted(mol.bonds_of(i), key=lambda b: priority[b.other(i)]))

        it_stack = [(start, sorted_bonds(start))]
        while it_stack:
            cur, it = it_stack[-1]
            advanced = False
            for bond in it:
                nxt = bond.other(cur)
                if not visited[nxt]:
                    visited[nxt] = True
                    parent_bond[nxt] = bond
                    children[cur].append(nxt)
                    children[nxt] = []
                    it_stack.append((nxt, sorted_bonds(nxt)))
                    advanced = True
                    break
                if parent_bond.get(cur) is not bond and id(bond) not in seen_closure:
                    seen_closure.add(id(bond))
                    closure_bonds.append(bond)
            if not advanced:
                it_stack.pop()

        closures_at: dict[int, list[Bond]] = {}
        emit_pos = {a: p for p, a in enumerate(_emission_order(children, start))}
        for bond in closure_bonds:
            closures_at.setdefault(bond.a, []).append(bond)
            closures_at.setdefault(bond.b, []).append(bond)
        for lst in closures_at.values():
            # Endpoint roles (a vs b) follow source order, so sort on the
            # emission positions alone to stay rendering-independent.
            lst.sort(key=lambda b: tuple(sorted((emit_pos[b.a], emit_pos[b.b]))))

        digit_of: dict[int, int] = {}
        open_digits: set[int] = set()
        tokens: list[str] = []

        def next_digit() -> int:
            d = 1
            while d in open_digits:
                d += 1
            return d

        def emit_atom(atom_idx: int) -> None:
            atom = mol.atoms[atom_idx]
            tokens.append(_atom_token(mol, atom))
            for bond in closures_at.get(atom_idx, ()):  # ring closures
                if id(bond) not in digit_of:
                    d = next_digit()
                    digit_of[id(bond)] = d
                    open_digits.add(d)
                    tokens.append(_bond_token(bond, mol.atoms[bond.a], mol.atoms[bond.b]))
                    tokens.append(str(d) if d < 10 else f"%{d:02d}")
                else:
                    d = digit_of[id(bond)]
                    open_digits.discard(d)
                    tokens.append(str(d) if d < 10 else f"%{d:02d}")

        # Iterative emission with explicit branch frames.
        stack: list[tuple[int, bool]] = [(start, False)]
        while stack:
            atom_idx, parenthesized = stack.pop()
            if atom_idx == -1:
                tokens.append(")")
                continue
            if parenthesized:
                tokens.append("(")
            bond = parent_bond.get(atom_idx)
            if bond is not None:
                tokens.append(_bond_token(bond, mol.atoms[bond.a], mol.atoms[bond.b]))
            emit_atom(atom_idx)
            kids = children[atom_idx]
            if kids:
                frames = []
                for k, kid in enumerate(kids):
                    if k == len(kids) - 1:
                        frames.append((kid, False))
                    else:
                        frames.append((kid, True))
                        frames.append((-1, False))  # ")" after the subtree
                stack.extend(reversed(frames))
        pieces.append("".join(tokens))

    return ".".join(pieces)


def _emission_order(children: dict[int, list[int]], start: int) -> list[int]:
    order = []
    stack = [start]
    while stack:
        cur = stack.pop()
        order.append(cur)
        stack.extend(reversed(children.get(cur, ())))
    return order


# ---------------------------------------------------------------------------
# public operations


def canonical_smiles(mol: Molecule) -> str:
    """Deterministic SMILES: equal for every attribute-preserving rendering
    of the same molecular graph."""
    work = aromatic_normal_form(mol)
    ranks = refine_ranks(work, initial_ranks(work))

    best: str | None = None
    leaves = 0

    def first_tied_cell(rks: list[int]) -> list[int] | None:
        by_rank: dict[int, list[int]] = {}
        for i, r in enumerate(rks):
            by_rank.setdefault(r, []).append(i)
        for r in sorted(by_rank):
            if len(by_rank[r]) > 1:
                return by_rank[r]
        return None

    def rec(rks: list[int]) -> None:
        nonlocal best, leaves
        cell = first_tied_cell(rks)
        if cell is None:
            leaves += 1
            if leaves > _MAX_TIEBREAK_LEAVES:
                raise CanonicalizationFailed(
                    "tie-breaking search exceeded the safety bound")
            rendered = write_smiles(work, rks)
            if best is None or rendered < best:
                best = rendered
            return
        # Terminal atoms tied on one shared parent are interchangeable:
        # branching on one of them is enough.
        if all(work.degree(i) == 1 for i in cell):
            parents = {work.neighbors(i)[0] for i in cell}
            candidates = cell[:1] if len(parents) == 1 else cell
        else:
            candidates = cell
        for atom in candidates:
            forced = [r * 2 for r in rks]
            forced[atom] -= 1
            rec(refine_ranks(work, forced))

    rec(ranks)
    if best is None:
        raise CanonicalizationFailed("no labelling produced")
    return best


def render_randomized(mol: Molecule, seed: int) -> str:
    """Random attribute-preserving rendering; deterministic per seed."""
    rng = random.Random(seed)
    n = len(mol.atoms)
    priority = list(range(n))
    rng.shuffle(priority)
    return write_smiles(mol, priority)
