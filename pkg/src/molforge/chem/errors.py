"""Error types raised by the SMILES toolkit."""


class SmilesParseError(ValueError):
    """Base class for SMILES syntax errors. Carries the byte offset of the fault."""

    def __init__(self, message, offset=0):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class EmptyInput(SmilesParseError):
    def __init__(self):
        super().__init__("empty SMILES input", 0)


class UnclosedRing(SmilesParseError):
    def __init__(self, digit, offset):
        super().__init__(f"ring closure {digit} opened but never closed", offset)
        self.digit = digit


class UnbalancedParenthesis(SmilesParseError):
    def __init__(self, offset, message="unbalanced parenthesis"):
        super().__init__(message, offset)


class UnknownElement(SmilesParseError):
    def __init__(self, symbol, offset):
        super().__init__(f"unknown element symbol {symbol!r}", offset)
        self.symbol = symbol


class MalformedBracketAtom(SmilesParseError):
    def __init__(self, offset, message="malformed bracket atom"):
        super().__init__(message, offset)


class CanonicalizationFailed(RuntimeError):
    """Internal invariant breach during canonical ranking. Not expected on valid input."""


class FusedAromaticityUnsupported(ValueError):
    """Alternating-bond form of a fused aromatic system spanning three or more
    rings; merging such systems with their lowercase form is out of scope."""


class UnclassifiedAtomType(ValueError):
    """Atom matched no row of the LogP contribution table."""

    def __init__(self, atom_index, element):
        super().__init__(f"no LogP contribution for atom {atom_index} ({element})")
        self.atom_index = atom_index
        self.element = element


class WidthMismatch(ValueError):
    """Fingerprints of different widths cannot be compared."""
