"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s`.
"""

import functools
import random
import time

import pytest

from molforge.chem import (
    DESCRIPTOR_KINDS,
    canonical_smiles,
    compute_descriptor,
    morgan_fingerprint,
    parse_smiles,
    render_randomized,
    tanimoto,
)
from molforge.corpus import split_records
from molforge.evaluation import design_metrics, r_squared, roc_auc
from molforge.instructions import (
    downstream_query,
    kg_instruction,
    path_to_text,
    synth_instruction,
)
from molforge.kg import (
    Entity,
    Hop,
    KnowledgeGraph,
    Path,
    Triple,
    enclosing_subgraph,
    enumerate_paths,
    load_kg,
)
from molforge.pipeline import PipelineConfig, run

from conftest import (
    DATA,
    bf_auc,
    bf_enclosing,
    bf_paths,
    descriptor_oracle_rows,
    fixture_smiles,
    mols_isomorphic,
    random_graph,
)


def criterion(name):
    def decorate(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"[ACCEPTANCE] {name}: FAIL")
                raise
            print(f"[ACCEPTANCE] {name}: PASS")
        return wrapper
    return decorate


# ---------------------------------------------------------------------------


@criterion("template-fidelity")
def test_template_fidelity_three_cards():
    kg = load_kg(DATA / "kg" / "triples.tsv", DATA / "kg" / "entities.tsv")

    path = Path([Hop(Triple("a", "treats", "b"), reverse=False),
                 Hop(Triple("c", "regulates", "b"), reverse=True)])
    sentence = path_to_text(path, kg)
    record = kg_instruction(kg, Triple("h", "r", "t"))
    kg_card = (f"[Context] {record.context}\n{sentence}.\n"
               f"[Question] {record.question}\n[Answer] {record.answer}\n")
    assert kg_card == (DATA / "golden" / "kg_card.txt").read_text()
    assert ("The drug a can treat disease b, and the disease b can be "
            "regulated by the gene c") in kg_card
    assert "What is the relationship between drug h and disease t?" in kg_card
    assert "plays a role r in the process of t." in kg_card

    synth = synth_instruction(
        "CC(=O)CC",
        {"toxicity": 12, "activity": 1.2, "Logp": 3.1, "volatile": "highly volatile"},
        ["toxicity", "activity", "Logp", "volatile"])
    synth_card = f"[Question] {synth.question}\n[Answer] {synth.answer}\n"
    assert synth_card == (DATA / "golden" / "synth_card.txt").read_text()
    assert "What is the function of molecule CC(=O)CC?" in synth_card
    assert "a toxicity of 12, an activity of 1.2, a Logp of 3.1" in synth_card

    vs_kg = load_kg(DATA / "vs_kg" / "triples.tsv", DATA / "vs_kg" / "entities.tsv")
    vs = downstream_query("vs", ("ace", "gss"), kg=vs_kg)
    vs_card = f"[Context] {vs.context}\n[Question] {vs.question}\n"
    assert vs_card == (DATA / "golden" / "vs_card.txt").read_text()
    assert ("Does the drug Acetadote have interaction with the target "
            "Glutathione synthetase?") in vs_card
    assert "Below are the facts relevant to the questions:" in vs_card


@criterion("diversity-pairwise-oracle")
def test_diversity_equals_bruteforce_within_1e12():
    distinct = []
    seen = set()
    for smiles in fixture_smiles():
        canon = canonical_smiles(parse_smiles(smiles))
        if canon not in seen:
            seen.add(canon)
            distinct.append(smiles)
    assert len(distinct) >= 20

    start = time.perf_counter()
    for n in (2, 5, 20):
        subset = distinct[:n]
        metrics = design_metrics(subset, set())
        fps = [morgan_fingerprint(parse_smiles(s)) for s in subset]
        total, pairs = 0.0, 0
        for i in range(len(fps)):
            for j in range(i + 1, len(fps)):
                total += tanimoto(fps[i], fps[j])
                pairs += 1
        expected = 1.0 - 2.0 * total / (n * (n - 1))
        assert pairs == n * (n - 1) // 2
        assert metrics.diversity == pytest.approx(expected, abs=1e-12)
    elapsed = time.perf_counter() - start
    assert elapsed < 1.0, f"diversity fixtures took {elapsed:.2f}s"


@criterion("roc-auc-oracle")
def test_roc_auc_exact_on_1000_random_instances():
    assert roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75
    rng = random.Random(20250101)
    for case in range(1000):
        n = rng.randint(2, 200)
        style = case % 4
        if style == 0:
            scores = [rng.random() for _ in range(n)]
        elif style == 1:  # tie-heavy: three levels
            scores = [rng.choice([0.0, 0.5, 1.0]) for _ in range(n)]
        elif style == 2:  # extremely tie-heavy: all equal
            scores = [0.5] * n
        else:
            scores = [round(rng.random(), 1) for _ in range(n)]
        labels = [rng.randint(0, 1) for _ in range(n)]
        if len(set(labels)) < 2:
            labels[0] = 1 - labels[0]
        assert roc_auc(scores, labels) == bf_auc(scores, labels), (scores, labels)


@criterion("r-squared")
def test_r_squared_reference_points():
    assert r_squared([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 1.0
    actual = [1.0, 2.0, 3.0]
    mean = sum(actual) / len(actual)
    assert r_squared([mean] * 3, actual) == 0.0
    assert r_squared([1, 2, 3], [1, 2, 4]) == pytest.approx(0.785714, abs=1e-6)


@criterion("canonicalization-invariance")
def test_canonicalization_50x100():
    start = time.perf_counter()
    molecules = fixture_smiles()
    assert len(molecules) == 50
    for smiles in molecules:
        mol = parse_smiles(smiles)
        reference = canonical_smiles(mol)
        for seed in range(100):
            rendering = render_randomized(mol, seed)
            reparsed = parse_smiles(rendering)
            assert canonical_smiles(reparsed) == reference, (smiles, seed)
            assert mols_isomorphic(mol, reparsed), (smiles, seed)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"canonicalization sweep took {elapsed:.2f}s"


@criterion("descriptor-oracle")
def test_descriptors_match_hand_enumeration():
    rows = descriptor_oracle_rows()
    assert len(rows) == 20
    for smiles, name, expected in rows:
        mol = parse_smiles(smiles)
        got = [compute_descriptor(mol, kind) for kind in DESCRIPTOR_KINDS]
        assert got == expected, f"{name}: got {got}, expected {expected}"


@criterion("kg-bruteforce-oracles")
def test_kg_ops_match_bruteforce_on_500_graphs():
    rng = random.Random(31337)
    for _ in range(500):
        entity_rows, triple_rows = random_graph(rng, max_nodes=12)
        entities = {eid: Entity(eid, etype, name) for eid, etype, name in entity_rows}
        kg = KnowledgeGraph(entities, [Triple(*t) for t in triple_rows])
        ids = [e[0] for e in entity_rows]
        h, t = rng.sample(ids, 2)
        k = rng.randint(1, 3)

        sub = enclosing_subgraph(kg, h, t, k)
        bf_entities, bf_triple_set = bf_enclosing(triple_rows, h, t, k)
        assert sub.entities == bf_entities
        assert {(tr.h, tr.r, tr.t) for tr in sub.triples} == bf_triple_set

        max_len = rng.randint(1, 3)
        sub2 = enclosing_subgraph(kg, h, t, max_len)
        paths, truncated = enumerate_paths(sub2, h, t, max_len, cap=100_000)
        assert not truncated
        got = {tuple(((hp.triple.h, hp.triple.r, hp.triple.t), hp.reverse)
                     for hp in p.hops) for p in paths}
        expected = bf_paths([(tr.h, tr.r, tr.t) for tr in sub2.triples], h, t, max_len)
        assert got == expected


@criterion("split-contract")
def test_split_contract():
    records = list(range(10_000))
    train, test = split_records(records, 0.9, seed=12)
    assert len(train) == 9_000 and len(test) == 1_000
    assert sorted(train + test) == records

    train2, test2 = split_records(records, 0.9, seed=12)
    assert train == train2 and test == test2

    keyed = [{"drug": f"d{i % 513}", "i": i} for i in range(10_000)]
    ktrain, ktest = split_records(keyed, 0.9, seed=12, key=lambda r: r["drug"])
    assert {r["drug"] for r in ktrain}.isdisjoint({r["drug"] for r in ktest})
    assert len(ktrain) + len(ktest) == 10_000


@criterion("scale-determinism-100k")
def test_100k_triples_under_60s_and_byte_identical(tmp_path):
    rng = random.Random(99)
    n_entities, n_triples = 50_000, 100_000
    types = ["drug", "gene", "disease", "target"]
    relations = ["treats", "regulates", "binds", "inhibits", "causes"]
    with open(tmp_path / "entities.tsv", "w") as fh:
        for i in range(n_entities):
            fh.write(f"e{i}\t{types[i % 4]}\tentity {i}\n")
    seen = set()
    with open(tmp_path / "triples.tsv", "w") as fh:
        while len(seen) < n_triples:
            a = rng.randrange(n_entities)
            b = rng.randrange(n_entities)
            if a == b:
                continue
            key = (a, (a + b) % 5, b)
            if key in seen:
                continue
            seen.add(key)
            fh.write(f"e{a}\t{relations[key[1]]}\te{b}\n")

    def config(out_name):
        return PipelineConfig.from_dict({
            "seed": 3,
            "stages": [{"name": "kg_instructions",
                        "triples": str(tmp_path / "triples.tsv"),
                        "entities": str(tmp_path / "entities.tsv"),
                        "output": str(tmp_path / out_name)}]})

    start = time.perf_counter()
    manifest = run(config("out1.jsonl"))
    elapsed = time.perf_counter() - start
    assert manifest.stages[0]["out"] >= 100_000
    assert elapsed < 60.0, f"kg_instructions over 100k triples took {elapsed:.1f}s"

    run(config("out2.jsonl"))
    assert (tmp_path / "out1.jsonl").read_bytes() == (tmp_path / "out2.jsonl").read_bytes()


@criterion("degenerate-design-metrics")
def test_degenerate_design_metrics():
    training = {canonical_smiles(parse_smiles(s)) for s in ("CCO", "CCC", "c1ccccc1")}
    all_known = design_metrics(["CCO", "CCC", "c1ccccc1", "OCC"], training)
    assert all_known.novelty == 0.0

    identical = design_metrics(["CCO"] * 7, set())
    assert identical.unique == pytest.approx(1 / 7)
    assert identical.diversity is None

    single = design_metrics(["CCO", "OCC", "CCO"], set())
    assert single.diversity is None
    assert single.unique == pytest.approx(1 / 3)
