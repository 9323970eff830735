"""Pretraining-corpus construction: dictionary-based entity normalization
(drug mentions become SMILES), record emission with dedup/topic accounting,
and seeded train/test splitting.

Named-entity recognition itself is out of scope; alongside the built-in
dictionary matcher, pre-annotated stand-off spans (external NER output)
can be applied to documents.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field


class CorpusError(ValueError):
    pass


class DictionaryLintError(CorpusError):
    pass


@dataclass
class DictEntry:
    surface: str
    entity_id: str
    replacement: str
    is_smiles: bool
    ambiguous: bool  # surface listed for more than one entity; first wins


class EntityDictionary:
    """surface form -> (entity id, replacement text).

    Replacements that parse and valence-validate as SMILES are flagged; the
    loader lints that no replacement contains any surface form on word
    boundaries, which makes normalization idempotent.
    """

    def __init__(self, entries: list[DictEntry], case_insensitive: bool = True):
        if not entries:
            raise DictionaryLintError("empty dictionary")
        self.case_insensitive = case_insensitive
        self.by_surface: dict[str, DictEntry] = {}
        kept: list[DictEntry] = []
        for entry in entries:
            if not entry.surface.strip():
                raise DictionaryLintError("empty surface form")
            key = self._fold(entry.surface)
            if key in self.by_surface:
                self.by_surface[key].ambiguous = True
                continue
            self.by_surface[key] = entry
            kept.append(entry)
        self.entries = kept
        self.by_id = {}
        for entry in kept:
            self.by_id.setdefault(entry.entity_id, entry)

        flags = re.UNICODE | (re.IGNORECASE if case_insensitive else 0)
        # Longest alternative first so the longest boundary-respecting
        # surface wins at any position.
        alternation = "|".join(
            re.escape(e.surface)
            for e in sorted(kept, key=lambda e: (-len(e.surface), e.surface)))
        self.pattern = re.compile(
            rf"(?<![^\W_])(?:{alternation})(?![^\W_])", flags)

        self._lint()

    def _fold(self, surface: str) -> str:
        return surface.lower() if self.case_insensitive else surface

    def _lint(self) -> None:
        for entry in self.entries:
            hit = self.pattern.search(entry.replacement)
            if hit:
                raise DictionaryLintError(
                    f"replacement for {entry.surface!r} contains dictionary "
                    f"surface {hit.group(0)!r}; normalization would not be idempotent")

    def lookup(self, surface: str) -> DictEntry:
        return self.by_surface[self._fold(surface)]

    @classmethod
    def load(cls, path, case_insensitive: bool = True) -> "EntityDictionary":
        """TSV rows: surface \t entity id \t replacement."""
        from .chem import parse_smiles, validate_valence
        from .chem.errors import SmilesParseError

        entries = []
        with open(path, encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                cols = line.split("\t")
                if len(cols) != 3:
                    raise DictionaryLintError(
                        f"{path} line {line_no}: expected 3 columns, got {len(cols)}")
                surface, entity_id, replacement = (c.strip() for c in cols)
                try:
                    is_smiles = validate_valence(parse_smiles(replacement)).valid
                except SmilesParseError:
                    is_smiles = False
                entries.append(DictEntry(surface, entity_id, replacement, is_smiles, False))
        return cls(entries, case_insensitive=case_insensitive)


@dataclass
class CorpusRecord:
    doc_id: str
    text: str
    topic: str
    substitutions: list[dict] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {"id": self.doc_id, "text": self.text, "topic": self.topic,
                "substitutions": self.substitutions}


def normalize_entities(text: str, dictionary: EntityDictionary,
                       doc_id: str = "", topic: str = "") -> CorpusRecord:
    """Replace dictionary surface forms left to right, longest match first,
    on Unicode alphanumeric boundaries. Substitution spans refer to the
    output text; characters outside them are byte-identical to the input."""
    out: list[str] = []
    subs: list[dict] = []
    pos = 0
    out_len = 0
    for match in dictionary.pattern.finditer(text):
        start, end = match.span()
        if start < pos:
            continue  # overlaps a previous replacement
        entry = dictionary.lookup(match.group(0))
        out.append(text[pos:start])
        out_len += start - pos
        out.append(entry.replacement)
        subs.append({
            "start": out_len,
            "end": out_len + len(entry.replacement),
            "surface": match.group(0),
            "replacement": entry.replacement,
            "entity_id": entry.entity_id,
            "ambiguous": entry.ambiguous,
        })
        out_len += len(entry.replacement)
        pos = end
    out.append(text[pos:])
    return CorpusRecord(doc_id=doc_id, text="".join(out), topic=topic,
                        substitutions=subs)


def apply_annotations(text: str, spans: list[dict],
                      dictionary: EntityDictionary,
                      doc_id: str = "", topic: str = "") -> CorpusRecord:
    """Apply pre-annotated stand-off spans ({start, end, id}; input-text
    coordinates) instead of matching surfaces. Spans must be in bounds and
    non-overlapping."""
    ordered = sorted(spans, key=lambda s: (s["start"], s["end"]))
    out: list[str] = []
    subs: list[dict] = []
    pos = 0
    out_len = 0
    for span in ordered:
        start, end = span["start"], span["end"]
        if not (0 <= start <= end <= len(text)):
            raise CorpusError(f"span {start}..{end} outside document bounds")
        if start < pos:
            raise CorpusError(f"span {start}..{end} overlaps a previous span")
        entry = dictionary.by_id.get(span["id"])
        if entry is None:
            raise CorpusError(f"annotation references unknown entity id {span['id']!r}")
        out.append(text[pos:start])
        out_len += start - pos
        out.append(entry.replacement)
        subs.append({
            "start": out_len,
            "end": out_len + len(entry.replacement),
            "surface": text[start:end],
            "replacement": entry.replacement,
            "entity_id": entry.entity_id,
            "ambiguous": False,
        })
        out_len += len(entry.replacement)
        pos = end
    out.append(text[pos:])
    return CorpusRecord(doc_id=doc_id, text="".join(out), topic=topic,
                        substitutions=subs)


@dataclass
class CorpusStats:
    n_in: int = 0
    n_out: int = 0
    duplicates: int = 0
    malformed: int = 0
    substitutions: int = 0
    topics: dict = field(default_factory=dict)

    def topic_report(self) -> dict:
        total = sum(self.topics.values())
        return {
            topic: {"count": count,
                    "proportion": round(count / total, 4) if total else 0.0}
            for topic, count in sorted(self.topics.items())
        }


def build_corpus(docs, dictionary: EntityDictionary,
                 stats: CorpusStats | None = None,
                 annotations: dict[str, list[dict]] | None = None):
    """Yield normalized :class:`CorpusRecord` objects from a document
    stream (JSONL lines or dicts with id/text/topic fields).

    Exact duplicates (hash of normalized text) are dropped; malformed
    documents are skipped; both are counted in ``stats``.
    """
    stats = stats if stats is not None else CorpusStats()
    seen_hashes: set[bytes] = set()
    for item in docs:
        stats.n_in += 1
        if isinstance(item, str):
            try:
                doc = json.loads(item)
            except json.JSONDecodeError:
                stats.malformed += 1
                continue
        else:
            doc = item
        if not isinstance(doc, dict) or "text" not in doc or "id" not in doc:
            stats.malformed += 1
            continue
        doc_id = str(doc["id"])
        topic = str(doc.get("topic", ""))
        if annotations and doc_id in annotations:
            record = apply_annotations(doc["text"], annotations[doc_id],
                                       dictionary, doc_id=doc_id, topic=topic)
        else:
            record = normalize_entities(doc["text"], dictionary,
                                        doc_id=doc_id, topic=topic)
        digest = hashlib.sha256(record.text.encode("utf-8")).digest()
        if digest in seen_hashes:
            stats.duplicates += 1
            continue
        seen_hashes.add(digest)
        stats.n_out += 1
        stats.substitutions += len(record.substitutions)
        stats.topics[topic] = stats.topics.get(topic, 0) + 1
        yield record


def split_records(records, ratio: float, seed: int, key=None):
    """Seeded shuffle-then-split. With ``key`` (a callable), records sharing
    a key always land on the same side (leakage control)."""
    import random

    if not 0 < ratio < 1:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    records = list(records)
    rng = random.Random(seed)
    target = round(ratio * len(records))

    if key is None:
        indices = list(range(len(records)))
        rng.shuffle(indices)
        train = [records[i] for i in indices[:target]]
        test = [records[i] for i in indices[target:]]
        return train, test

    groups: dict = {}
    for rec in records:
        groups.setdefault(key(rec), []).append(rec)
    group_keys = list(groups)
    rng.shuffle(group_keys)
    train: list = []
    test: list = []
    for gk in group_keys:
        side = train if len(train) < target else test
        side.extend(groups[gk])
    return train, test
