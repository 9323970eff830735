"""Typed biomedical knowledge graph: TSV loading, enclosing-subgraph
extraction, simple-path enumeration and type-preserving negative sampling.

The graph is immutable after load; every query is read-only and safe to
run concurrently. Sampling takes an explicit seed per call.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .chem import parse_smiles, validate_valence
from .chem.errors import SmilesParseError


class KgError(ValueError):
    pass


class MalformedRow(KgError):
    def __init__(self, line_no, message):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateEntityId(KgError):
    def __init__(self, entity_id, line_no):
        super().__init__(f"line {line_no}: duplicate entity id {entity_id!r}")
        self.entity_id = entity_id
        self.line_no = line_no


class DanglingEndpoint(KgError):
    def __init__(self, entity_id, line_no):
        super().__init__(f"line {line_no}: triple endpoint {entity_id!r} is not a known entity")
        self.entity_id = entity_id
        self.line_no = line_no


class UnknownEntity(KgError):
    def __init__(self, entity_id):
        super().__init__(f"unknown entity {entity_id!r}")
        self.entity_id = entity_id


class ExhaustedSampleSpace(KgError):
    pass


ENTITY_TYPES = ("drug", "gene", "disease", "target", "side-effect", "other")


@dataclass
class Entity:
    id: str
    entity_type: str
    display_name: str
    smiles: str | None = None


@dataclass(frozen=True)
class Triple:
    h: str
    r: str
    t: str


@dataclass(frozen=True)
class Hop:
    """One step of a path. ``reverse`` means the underlying triple was
    traversed tail-to-head."""

    triple: Triple
    reverse: bool

    @property
    def source(self) -> str:
        return self.triple.t if self.reverse else self.triple.h

    @property
    def target(self) -> str:
        return self.triple.h if self.reverse else self.triple.t


@dataclass
class Path:
    hops: list[Hop]

    def __len__(self) -> int:
        return len(self.hops)

    def entities(self) -> list[str]:
        if not self.hops:
            return []
        out = [self.hops[0].source]
        out.extend(h.target for h in self.hops)
        return out


@dataclass
class Subgraph:
    center: tuple[str, str]
    entities: set[str]
    triples: list[Triple]
    hop_limit: int


@dataclass
class LoadStats:
    n_entities: int = 0
    n_triples: int = 0
    duplicate_triples: int = 0
    entities_by_type: dict = field(default_factory=dict)
    triples_by_relation: dict = field(default_factory=dict)


class KnowledgeGraph:
    """Deduplicated, fully indexed triple store."""

    def __init__(self, entities: dict[str, Entity], triples: list[Triple],
                 stats: LoadStats | None = None):
        self.entities = entities
        self.triples = triples
        self.triple_set = set(triples)
        self.incident: dict[str, list[Triple]] = {eid: [] for eid in entities}
        for tr in triples:
            self.incident[tr.h].append(tr)
            self.incident[tr.t].append(tr)
        self.by_type: dict[str, list[str]] = {}
        for eid in entities:
            self.by_type.setdefault(entities[eid].entity_type, []).append(eid)
        self.stats = stats or LoadStats(
            n_entities=len(entities), n_triples=len(triples))

    def __eq__(self, other):
        return (isinstance(other, KnowledgeGraph)
                and self.entities == other.entities
                and self.triples == other.triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self.triple_set

    def require(self, entity_id: str) -> Entity:
        entity = self.entities.get(entity_id)
        if entity is None:
            raise UnknownEntity(entity_id)
        return entity

    def neighbourhood(self, start: str, k: int) -> set[str]:
        """Undirected k-hop neighbourhood including the start entity."""
        seen = {start}
        frontier = [start]
        for _ in range(k):
            nxt = []
            for eid in frontier:
                for tr in self.incident[eid]:
                    other = tr.t if tr.h == eid else tr.h
                    if other not in seen:
                        seen.add(other)
                        nxt.append(other)
            if not nxt:
                break
            frontier = nxt
        return seen


def _iter_rows(lines, path_label):
    for line_no, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield line_no, line.split("\t")


def load_kg(triples_path, entities_path) -> KnowledgeGraph:
    """Load a graph from TSV files: entities (id, type, name[, smiles]) and
    triples (h, r, t). '#' comment lines and blank lines are skipped.

    Raises :class:`DuplicateEntityId`, :class:`MalformedRow` or
    :class:`DanglingEndpoint` with the offending line number.
    """
    entities: dict[str, Entity] = {}
    stats = LoadStats()
    with open(entities_path, encoding="utf-8") as fh:
        for line_no, cols in _iter_rows(fh, entities_path):
            if len(cols) < 3:
                raise MalformedRow(line_no, f"entity row needs id/type/name, got {len(cols)} columns")
            eid, etype, name = cols[0].strip(), cols[1].strip(), cols[2].strip()
            smiles = cols[3].strip() if len(cols) > 3 and cols[3].strip() else None
            if not eid:
                raise MalformedRow(line_no, "empty entity id")
            if eid in entities:
                raise DuplicateEntityId(eid, line_no)
            if smiles is not None:
                try:
                    mol = parse_smiles(smiles)
                except SmilesParseError as exc:
                    raise MalformedRow(line_no, f"entity SMILES does not parse: {exc}") from exc
                if not validate_valence(mol).valid:
                    raise MalformedRow(line_no, f"entity SMILES fails valence check: {smiles}")
            entities[eid] = Entity(eid, etype, name, smiles)
            stats.entities_by_type[etype] = stats.entities_by_type.get(etype, 0) + 1

    triples: list[Triple] = []
    seen: set[Triple] = set()
    with open(triples_path, encoding="utf-8") as fh:
        for line_no, cols in _iter_rows(fh, triples_path):
            if len(cols) != 3:
                raise MalformedRow(line_no, f"triple row needs h/r/t, got {len(cols)} columns")
            h, r, t = (c.strip() for c in cols)
            if not h or not r or not t:
                raise MalformedRow(line_no, "empty field in triple row")
            for endpoint in (h, t):
                if endpoint not in entities:
                    raise DanglingEndpoint(endpoint, line_no)
            triple = Triple(h, r, t)
            if triple in seen:
                stats.duplicate_triples += 1
                continue
            seen.add(triple)
            triples.append(triple)
            stats.triples_by_relation[r] = stats.triples_by_relation.get(r, 0) + 1

    stats.n_entities = len(entities)
    stats.n_triples = len(triples)
    return KnowledgeGraph(entities, triples, stats)


def enclosing_subgraph(kg: KnowledgeGraph, h: str, t: str, k: int) -> Subgraph:
    """Entities reachable within k undirected hops of both endpoints, plus
    the endpoints themselves; all internal triples except the target link
    (h, *, t) itself, which is masked to avoid answer leakage."""
    kg.require(h)
    kg.require(t)
    near_h = kg.neighbourhood(h, k)
    near_t = kg.neighbourhood(t, k)
    entities = (near_h & near_t) | {h, t}
    picked: set[Triple] = set()
    for eid in entities:
        for tr in kg.incident[eid]:
            if tr.h == h and tr.t == t:
                continue
            if tr.h in entities and tr.t in entities:
                picked.add(tr)
    return Subgraph(
        center=(h, t),
        entities=entities,
        triples=sorted(picked, key=lambda tr: (tr.h, tr.r, tr.t)),
        hop_limit=k,
    )


def enumerate_paths(sub: Subgraph, h: str, t: str, max_len: int,
                    cap: int = 64) -> tuple[list[Path], bool]:
    """All simple undirected paths h..t of length <= max_len, in
    lexicographic order of their hop sequences, capped at ``cap`` paths.

    Returns (paths, truncated).
    """
    if max_len <= 0:
        return [], False
    adjacency: dict[str, list[tuple[str, str, bool, Triple]]] = {}
    for tr in sub.triples:
        adjacency.setdefault(tr.h, []).append((tr.t, tr.r, False, tr))
        adjacency.setdefault(tr.t, []).append((tr.h, tr.r, True, tr))
    for edges in adjacency.values():
        edges.sort(key=lambda e: (e[0], e[1], e[2]))

    paths: list[Path] = []
    truncated = False
    hops: list[Hop] = []
    on_path = {h}

    def dfs(cur: str) -> bool:
        nonlocal truncated
        if len(hops) >= max_len:
            return True
        for nxt, rel, rev, tr in adjacency.get(cur, ()):
            if nxt == t:
                if len(paths) >= cap:
                    truncated = True
                    return False
                paths.append(Path(hops + [Hop(tr, rev)]))
                continue
            if nxt in on_path:
                continue
            on_path.add(nxt)
            hops.append(Hop(tr, rev))
            keep_going = dfs(nxt)
            hops.pop()
            on_path.discard(nxt)
            if not keep_going:
                return False
        return True

    dfs(h)
    return paths, truncated


def sample_negatives(kg: KnowledgeGraph, positives: list[Triple],
                     per_positive: int, seed: int,
                     max_attempts: int = 200) -> list[Triple]:
    """Corrupt each positive ``per_positive`` times by replacing the tail
    (even positions) or head (odd positions) with a uniformly drawn entity
    of the same type. Corruptions already present in the graph (or equal to
    the positive) are rejected and redrawn."""
    if not positives:
        raise ValueError("positives must be nonempty")
    rng = random.Random(seed)
    positive_set = set(positives)
    out: list[Triple] = []
    for pos_idx, pos in enumerate(positives):
        corrupt_tail = pos_idx % 2 == 0
        endpoint = pos.t if corrupt_tail else pos.h
        pool = kg.by_type.get(kg.require(endpoint).entity_type, [])
        for _ in range(per_positive):
            for _attempt in range(max_attempts):
                candidate_id = pool[rng.randrange(len(pool))] if pool else None
                if candidate_id is None:
                    break
                if corrupt_tail:
                    candidate = Triple(pos.h, pos.r, candidate_id)
                else:
                    candidate = Triple(candidate_id, pos.r, pos.t)
                if candidate in kg.triple_set or candidate in positive_set:
                    continue
                if candidate.h == candidate.t:
                    continue
                out.append(candidate)
                break
            else:
                raise ExhaustedSampleSpace(
                    f"could not corrupt {pos} after {max_attempts} attempts")
            if candidate_id is None:
                raise ExhaustedSampleSpace(f"no entities share a type with {endpoint!r}")
    return out
