"""Circular (Morgan/ECFP-style) fingerprints and Tanimoto similarity.

Atom environments are hashed with blake2b so bit assignments are stable
across processes and Python versions; renderings of the same molecule
produce bit-identical fingerprints because the initial invariants depend
only on atom/bond attributes.
"""

from __future__ import annotations

import hashlib
import struct

from .errors import WidthMismatch
from .molecule import Fingerprint, Molecule
from .rings import perceive_rings

DEFAULT_RADIUS = 2
DEFAULT_WIDTH = 2048

_BOND_CODE = {"single": 1, "aromatic": 2, "double": 3, "triple": 4}


def _stable_hash(values: tuple[int, ...]) -> int:
    packed = struct.pack(
        f"<{len(values)}Q", *(v & 0xFFFFFFFFFFFFFFFF for v in values))
    return int.from_bytes(hashlib.blake2b(packed, digest_size=8).digest(), "little")


def morgan_fingerprint(mol: Molecule, radius: int = DEFAULT_RADIUS,
                       width: int = DEFAULT_WIDTH) -> Fingerprint:
    """Hash every atom neighbourhood of depth 0..radius into a bit.

    ``width`` must be a power of two.
    """
    if width <= 0 or width & (width - 1):
        raise ValueError(f"fingerprint width must be a power of two, got {width}")
    perceive_rings(mol)

    invariants = []
    for atom in mol.atoms:
        in_ring = any(b.in_ring for b in mol.bonds_of(atom.index))
        invariants.append(_stable_hash((
            hash_element(atom.element),
            int(atom.aromatic),
            atom.formal_charge,
            atom.isotope or 0,
            atom.total_h,
            mol.heavy_degree(atom.index),
            int(in_ring),
        )))

    bits = 0
    mask = width - 1
    for inv in invariants:
        bits |= 1 << (inv & mask)
    current = invariants
    for layer in range(1, radius + 1):
        nxt = []
        for i in range(len(mol.atoms)):
            env = sorted(
                (_BOND_CODE[b.order], current[b.other(i)]) for b in mol.bonds_of(i))
            flat = [layer, current[i]]
            for code, nbr in env:
                flat.append(code)
                flat.append(nbr)
            h = _stable_hash(tuple(flat))
            nxt.append(h)
            bits |= 1 << (h & mask)
        current = nxt
    return Fingerprint(bits=bits, radius=radius, width=width)


def hash_element(symbol: str) -> int:
    return int.from_bytes(symbol.encode("ascii"), "big")


def tanimoto(a: Fingerprint, b: Fingerprint) -> float:
    """|intersection| / |union| of the on-bit sets; 1.0 when both are empty."""
    if a.width != b.width:
        raise WidthMismatch(f"fingerprint widths differ: {a.width} vs {b.width}")
    union = (a.bits | b.bits).bit_count()
    if union == 0:
        return 1.0
    return (a.bits & b.bits).bit_count() / union
