"""Shared fixtures and independent brute-force oracles used across tests."""

from __future__ import annotations

import random
from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


def fixture_smiles() -> list[str]:
    lines = (DATA / "canonical_fixture.smi").read_text().splitlines()
    return [l.strip() for l in lines if l.strip() and not l.startswith("#")]


def descriptor_oracle_rows():
    rows = []
    for line in (DATA / "descriptor_oracle.tsv").read_text().splitlines():
        if not line.strip() or line.startswith("#") or line.startswith("smiles\t"):
            continue
        cols = line.split("\t")
        rows.append((cols[0], cols[1], [int(v) for v in cols[2:]]))
    return rows


# ---------------------------------------------------------------------------
# brute-force oracles (independent of the implementations they check)


def bf_auc(scores, labels):
    """O(n^2) pair counting: (concordant + 0.5 * ties) / (n_pos * n_neg)."""
    pos = [s for s, l in zip(scores, labels) if l]
    neg = [s for s, l in zip(scores, labels) if not l]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def bf_khop(triples, start, k):
    """Undirected k-hop neighbourhood by repeated full scans of the triple list."""
    seen = {start}
    for _ in range(k):
        grown = set(seen)
        for h, r, t in triples:
            if h in seen:
                grown.add(t)
            if t in seen:
                grown.add(h)
        if grown == seen:
            break
        seen = grown
    return seen


def bf_enclosing(triples, h, t, k):
    entities = (bf_khop(triples, h, k) & bf_khop(triples, t, k)) | {h, t}
    picked = [tr for tr in triples
              if tr[0] in entities and tr[2] in entities
              and not (tr[0] == h and tr[2] == t)]
    return entities, set(picked)


def bf_paths(triples, h, t, max_len):
    """Exhaustive recursive simple-path enumeration, as normalized hop tuples."""
    found = set()

    def rec(cur, used, hops):
        if len(hops) >= max_len:
            return
        for tr in triples:
            for nxt, rev in (((tr[2]), False), ((tr[0]), True)):
                src = tr[0] if not rev else tr[2]
                if src != cur:
                    continue
                if nxt == t:
                    if len(hops) < max_len:
                        found.add(tuple(hops + [(tr, rev)]))
                    continue
                if nxt in used:
                    continue
                rec(nxt, used | {nxt}, hops + [(tr, rev)])

    rec(h, {h}, [])
    return found


def mol_to_nx(mol):
    import networkx as nx

    g = nx.Graph()
    for atom in mol.atoms:
        g.add_node(atom.index, element=atom.element, aromatic=atom.aromatic,
                   charge=atom.formal_charge, isotope=atom.isotope,
                   h=atom.total_h)
    for bond in mol.bonds:
        g.add_edge(bond.a, bond.b, order=bond.order)
    return g


def mols_isomorphic(m1, m2) -> bool:
    import networkx as nx

    keys = ("element", "aromatic", "charge", "isotope", "h")
    return nx.is_isomorphic(
        mol_to_nx(m1), mol_to_nx(m2),
        node_match=lambda a, b: all(a[k] == b[k] for k in keys),
        edge_match=lambda a, b: a["order"] == b["order"])


def random_graph(rng: random.Random, max_nodes=12):
    """Small random typed graph as (entity rows, triple list)."""
    n = rng.randint(2, max_nodes)
    types = ["drug", "gene", "disease", "target"]
    entities = [(f"e{i}", types[i % len(types)], f"node {i}") for i in range(n)]
    triples = set()
    n_edges = rng.randint(1, min(3 * n, n * (n - 1) // 2 + 2))
    relations = ["treats", "regulates", "binds"]
    for _ in range(n_edges):
        a, b = rng.sample(range(n), 2)
        triples.add((f"e{a}", rng.choice(relations), f"e{b}"))
    return entities, sorted(triples)
