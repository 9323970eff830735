import random

import pytest
from hypothesis import given, settings, strategies as st

from molforge.chem import canonical_smiles, morgan_fingerprint, parse_smiles, tanimoto
from molforge.evaluation import (
    DegenerateTarget,
    SingleClassInput,
    design_metrics,
    evaluate,
    extract_smiles,
    parse_numeric,
    parse_yesno,
    r_squared,
    roc_auc,
)

from conftest import bf_auc


# ---------------------------------------------------------------------------
# answer parsing


def test_parse_yesno_trivials():
    assert parse_yesno("Yes, the drug interacts with the target.") == "yes"
    assert parse_yesno("No.") == "no"
    assert parse_yesno("It depends on dosage.") == "unknown"


def test_parse_yesno_conflict_and_negation():
    assert parse_yesno("Yes, but actually no.") == "unknown"
    assert parse_yesno("The drug does not interact with this target.") == "no"
    assert parse_yesno("") == "unknown"


def test_parse_yesno_only_leading_sentence():
    assert parse_yesno("Unclear. Yes would be a guess.") == "unknown"


def test_parse_numeric_card_case():
    text = "It has a toxicity of 12, and a Logp of 3.1, and it is highly volatile."
    assert parse_numeric(text, "Logp") == pytest.approx(3.1)
    assert parse_numeric(text, "toxicity") == pytest.approx(12)


def test_parse_numeric_none_when_no_number():
    assert parse_numeric("cannot determine", "LogP") is None


def test_parse_numeric_first_number_when_name_absent():
    assert parse_numeric("values 7 then 9", "QED") == pytest.approx(7)


def test_parse_numeric_ignores_digits_inside_property_name():
    text = "The LogD7.4 of the molecule is 2.35."
    assert parse_numeric(text, "LogD7.4") == pytest.approx(2.35)


def test_parse_numeric_scientific_and_negative():
    assert parse_numeric("a LogS of -4.2", "LogS") == pytest.approx(-4.2)
    assert parse_numeric("Ki of 1.5e-9 molar", "Ki") == pytest.approx(1.5e-9)


def test_extract_smiles_card_case():
    assert extract_smiles("The molecule is CC(=O)CC .") == ["CC(=O)CC"]


def test_extract_smiles_trailing_punctuation():
    assert extract_smiles("Answer: CC(=O)CC.") == ["CC(=O)CC"]
    assert extract_smiles("maybe (CCO)?") == ["CCO"]


def test_extract_smiles_none():
    assert extract_smiles("there is nothing here") == []


def test_extract_smiles_canonical_dedup():
    assert extract_smiles("CCO CCO") == ["CCO"]
    assert extract_smiles("CCO OCC") == ["CCO"]  # same molecule, first form kept


def test_extract_smiles_skips_invalid():
    assert extract_smiles("C1CC is truncated but CCO is fine") == ["CCO"]


# ---------------------------------------------------------------------------
# roc auc


def test_auc_hand_case():
    assert roc_auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1]) == 0.75


def test_auc_perfect_separation():
    assert roc_auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0


def test_auc_all_ties():
    assert roc_auc([0.5, 0.5, 0.5, 0.5], [0, 1, 0, 1]) == 0.5


def test_auc_single_class_rejected():
    with pytest.raises(SingleClassInput):
        roc_auc([0.1, 0.2], [1, 1])


def test_auc_matches_bruteforce_oracle():
    rng = random.Random(42)
    for _ in range(300):
        n = rng.randint(2, 200)
        scores = [rng.choice([rng.random(), rng.choice([0.0, 0.5, 1.0])])
                  for _ in range(n)]
        labels = [rng.randint(0, 1) for _ in range(n)]
        if len(set(labels)) < 2:
            labels[0] = 1 - labels[0]
        assert roc_auc(scores, labels) == bf_auc(scores, labels)


@settings(max_examples=200)
@given(st.lists(st.tuples(st.sampled_from([0.0, 0.25, 0.5, 1.0]),
                          st.integers(min_value=0, max_value=1)),
                min_size=2, max_size=40))
def test_auc_property_matches_oracle(pairs):
    scores = [p[0] for p in pairs]
    labels = [p[1] for p in pairs]
    if len(set(labels)) < 2:
        labels[0] = 1 - labels[0]
    assert roc_auc(scores, labels) == bf_auc(scores, labels)
    assert 0.0 <= roc_auc(scores, labels) <= 1.0


def test_auc_monotone_transform_invariance():
    rng = random.Random(7)
    scores = [rng.random() for _ in range(50)]
    labels = [rng.randint(0, 1) for _ in range(50)]
    labels[0], labels[1] = 0, 1
    base = roc_auc(scores, labels)
    assert roc_auc([2 * s + 3 for s in scores], labels) == base
    assert roc_auc([s ** 3 for s in scores], labels) == base


# ---------------------------------------------------------------------------
# r squared


def test_r2_identity():
    assert r_squared([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 1.0


def test_r2_mean_predictor():
    actual = [1.0, 2.0, 3.0]
    mean = sum(actual) / 3
    assert r_squared([mean] * 3, actual) == 0.0


def test_r2_hand_case():
    assert r_squared([1, 2, 3], [1, 2, 4]) == pytest.approx(0.785714, abs=1e-6)


def test_r2_reorder_invariance():
    pred = [1.2, 3.4, 2.2, 5.0]
    actual = [1.0, 3.0, 2.0, 4.0]
    base = r_squared(pred, actual)
    order = [2, 0, 3, 1]
    assert r_squared([pred[i] for i in order], [actual[i] for i in order]) == pytest.approx(base)


def test_r2_degenerate_target():
    with pytest.raises(DegenerateTarget):
        r_squared([1.0, 2.0], [3.0, 3.0])
    with pytest.raises(DegenerateTarget):
        r_squared([1.0], [1.0])


# ---------------------------------------------------------------------------
# design metrics


def canon(s):
    return canonical_smiles(parse_smiles(s))


def test_novelty_zero_when_all_known():
    training = {canon("CCO"), canon("CCC")}
    metrics = design_metrics(["CCO", "CCC"], training)
    assert metrics.novelty == 0.0
    assert metrics.valid == 1.0


def test_identical_molecules_unique_fraction():
    metrics = design_metrics(["CCO"] * 5, set())
    assert metrics.unique == pytest.approx(1 / 5)
    assert metrics.diversity is None  # single distinct molecule
    assert metrics.novelty == 1.0


def test_two_molecule_diversity_is_one_minus_tanimoto():
    a, b = "CCO", "c1ccccc1"
    metrics = design_metrics([a, b], set())
    fa = morgan_fingerprint(parse_smiles(a))
    fb = morgan_fingerprint(parse_smiles(b))
    assert metrics.diversity == pytest.approx(1.0 - tanimoto(fa, fb), abs=1e-12)


def test_invalid_entries_lower_valid_fraction():
    metrics = design_metrics(["CCO", "C1CC", "not a molecule"], set())
    assert metrics.n_generated == 3
    assert metrics.n_valid == 1
    assert metrics.valid == pytest.approx(1 / 3)


def test_diversity_matches_bruteforce_loop():
    pool = ["CCO", "CCC", "c1ccccc1", "CC(=O)CC", "CCN", "CCCl", "c1ccncc1",
            "C1CCCCC1", "CC(=O)O", "CCOC(=O)C", "NC(=O)c1ccccc1", "OCC(O)CO"]
    rng = random.Random(13)
    for trial in range(5):
        sample = [rng.choice(pool) for _ in range(rng.randint(2, 12))]
        metrics = design_metrics(sample, set())
        # independent pairwise loop over distinct canonical forms
        seen = {}
        for s in sample:
            mol = parse_smiles(s)
            seen.setdefault(canonical_smiles(mol), mol)
        mols = list(seen.values())
        if len(mols) < 2:
            assert metrics.diversity is None
            continue
        fps = [morgan_fingerprint(m) for m in mols]
        total, count = 0.0, 0
        for i in range(len(fps)):
            for j in range(i + 1, len(fps)):
                total += tanimoto(fps[i], fps[j])
                count += 1
        assert metrics.diversity == pytest.approx(1 - total / count, abs=1e-12)


def test_fractions_within_bounds():
    metrics = design_metrics(["CCO", "CCO", "bad", "c1ccccc1"], {canon("CCO")})
    for value in (metrics.valid, metrics.unique, metrics.novelty):
        assert 0.0 <= value <= 1.0


# ---------------------------------------------------------------------------
# joining predictions against queries


def test_evaluate_joins_tasks(tmp_path):
    training = tmp_path / "train.smi"
    training.write_text("CCO\n")
    queries = [
        {"query_id": "q1", "task": "vs_query", "label": 1},
        {"query_id": "q2", "task": "vs_query", "label": 0},
        {"query_id": "q3", "task": "prop_query", "target_value": 3.0, "property": "LogP"},
        {"query_id": "q4", "task": "prop_query", "target_value": 5.0, "property": "LogP"},
        {"query_id": "q5", "task": "design", "training_set_ref": str(training)},
    ]
    predictions = [
        {"query_id": "q1", "raw_text": "Yes, they interact."},
        {"query_id": "q2", "raw_text": "No interaction expected."},
        {"query_id": "q3", "raw_text": "The LogP is 3.0."},
        {"query_id": "q4", "raw_text": "The LogP is 5.0."},
        {"query_id": "q5", "raw_text": "Molecule: CCC and CCO"},
        {"query_id": "zzz", "raw_text": "unmatched"},
    ]
    report = evaluate(predictions, queries)
    assert report.tasks["vs_query"]["value"] == 1.0
    assert report.tasks["prop_query"]["value"] == 1.0
    design = report.tasks["design"]["metrics"]
    assert design["valid"] == 1.0
    assert design["novelty"] == pytest.approx(0.5)
    assert report.unmatched_predictions == 1
    assert report.n_predictions == 6
    table = report.table()
    assert "roc_auc" in table and "design" in table
