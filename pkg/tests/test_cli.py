import json

import pytest
import yaml
from click.testing import CliRunner

from molforge.cli import main
from molforge.pipeline import ConfigError, PipelineConfig, StageFailure, run

ASPIRIN = "CC(=O)Oc1ccccc1C(=O)O"


def write_inputs(root):
    (root / "in").mkdir()
    (root / "in" / "docs.jsonl").write_text(
        "\n".join([
            json.dumps({"id": "d1", "text": "aspirin reduces fever", "topic": "Chemistry"}),
            json.dumps({"id": "d2", "text": "aspirin reduces fever", "topic": "Chemistry"}),
            json.dumps({"id": "d3", "text": "a gene expression study", "topic": "Bioinformatics"}),
        ]) + "\n")
    (root / "in" / "dict.tsv").write_text(
        f"aspirin\tDB1\t{ASPIRIN}\nfever\tM1\tpyrexia\n")
    (root / "in" / "entities.tsv").write_text(
        "d1\tdrug\taspirin\t" + ASPIRIN + "\n"
        "d2\tdrug\tibuprofen\tCC(C)Cc1ccc(cc1)C(C)C(=O)O\n"
        "g1\tgene\tCOX1\n"
        "g2\tgene\tCOX2\n"
        "s1\tdisease\tinflammation\n")
    (root / "in" / "triples.tsv").write_text(
        "d1\tinhibits\tg1\n"
        "d1\tinhibits\tg2\n"
        "d2\tinhibits\tg2\n"
        "g2\tregulates\ts1\n"
        "d1\ttreats\ts1\n")
    (root / "in" / "pairs.jsonl").write_text(
        "\n".join([
            json.dumps({"smiles": "CC(=O)CC", "description": "A ketone."}),
            json.dumps({"smiles": "C1CC", "description": "broken"}),
            json.dumps({"smiles": "CCO", "description": ""}),
            json.dumps({"smiles": "CCO", "description": "Ethanol."}),
        ]) + "\n")
    (root / "in" / "props.tsv").write_text(
        "smiles\ttoxicity\tLogP\nCC(=O)CC\t12\t3.1\nCCO\t3\t-0.31\n")
    (root / "in" / "subjects.tsv").write_text("d1\tg1\nd1\tg2\n")


def pipeline_config(root, out_name="out"):
    out = root / out_name
    return {
        "seed": 7,
        "manifest": str(out / "manifest.json"),
        "stages": [
            {"name": "corpus",
             "docs": str(root / "in" / "docs.jsonl"),
             "dictionary": str(root / "in" / "dict.tsv"),
             "output": str(out / "corpus.jsonl")},
            {"name": "kg_instructions",
             "triples": str(root / "in" / "triples.tsv"),
             "entities": str(root / "in" / "entities.tsv"),
             "output": str(out / "kg.jsonl")},
            {"name": "moltext",
             "pairs": str(root / "in" / "pairs.jsonl"),
             "output": str(out / "describe.jsonl")},
            {"name": "synth",
             "properties": str(root / "in" / "props.tsv"),
             "output": str(out / "property.jsonl")},
            {"name": "design",
             "properties": str(root / "in" / "props.tsv"),
             "objectives": ["IsValid", "LogP"],
             "output": str(out / "design.jsonl")},
            {"name": "queries", "kind": "vs",
             "subjects": str(root / "in" / "subjects.tsv"),
             "triples": str(root / "in" / "triples.tsv"),
             "entities": str(root / "in" / "entities.tsv"),
             "output": str(out / "queries.jsonl")},
        ],
    }


def run_config(root, cfg_dict):
    cfg_path = root / "config.yaml"
    cfg_path.write_text(yaml.safe_dump(cfg_dict))
    config = PipelineConfig.load(cfg_path)
    return run(config)


def count_lines(path):
    return sum(1 for line in open(path, encoding="utf-8") if line.strip())


def test_pipeline_counts_reconcile(tmp_path):
    write_inputs(tmp_path)
    manifest = run_config(tmp_path, pipeline_config(tmp_path))
    by_name = {s["name"]: s for s in manifest.stages}

    assert count_lines(tmp_path / "out" / "corpus.jsonl") == by_name["corpus"]["out"]
    assert by_name["corpus"]["in"] == (by_name["corpus"]["out"]
                                       + sum(by_name["corpus"]["skipped"].values()))
    assert count_lines(tmp_path / "out" / "kg.jsonl") == by_name["kg_instructions"]["out"] == 5
    molstage = by_name["moltext"]
    assert count_lines(tmp_path / "out" / "describe.jsonl") == molstage["out"] == 2
    assert molstage["skipped"] == {"invalid_smiles": 1, "empty_description": 1, "malformed": 0}
    assert molstage["in"] == molstage["out"] + sum(molstage["skipped"].values())
    assert count_lines(tmp_path / "out" / "queries.jsonl") == by_name["queries"]["out"] == 2


def test_pipeline_deterministic_reruns(tmp_path):
    write_inputs(tmp_path)
    m1 = run_config(tmp_path, pipeline_config(tmp_path, "out1"))
    m2 = run_config(tmp_path, pipeline_config(tmp_path, "out2"))

    for name in ("corpus.jsonl", "kg.jsonl", "describe.jsonl",
                 "property.jsonl", "design.jsonl", "queries.jsonl"):
        b1 = (tmp_path / "out1" / name).read_bytes()
        b2 = (tmp_path / "out2" / name).read_bytes()
        assert b1 == b2, name

    # identical config ⇒ identical hash (output paths differ here, so
    # compare hashes of one config loaded twice instead)
    cfg = pipeline_config(tmp_path, "out3")
    path = tmp_path / "same.yaml"
    path.write_text(yaml.safe_dump(cfg))
    assert (PipelineConfig.load(path).config_hash()
            == PipelineConfig.load(path).config_hash())


def test_missing_input_is_config_error(tmp_path):
    write_inputs(tmp_path)
    cfg = pipeline_config(tmp_path)
    cfg["stages"][0]["docs"] = str(tmp_path / "in" / "nope.jsonl")
    with pytest.raises(ConfigError) as err:
        run_config(tmp_path, cfg)
    assert "corpus.docs" in str(err.value)


def test_missing_seed_rejected(tmp_path):
    write_inputs(tmp_path)
    cfg = pipeline_config(tmp_path)
    del cfg["seed"]
    cfg_path = tmp_path / "config.yaml"
    cfg_path.write_text(yaml.safe_dump(cfg))
    with pytest.raises(ConfigError):
        PipelineConfig.load(cfg_path)


def test_stage_failure_leaves_no_partial_output(tmp_path):
    write_inputs(tmp_path)
    # annotations with an out-of-bounds span blow up mid-stream
    (tmp_path / "in" / "ann.jsonl").write_text(
        json.dumps({"doc_id": "d3", "spans": [{"start": 0, "end": 9999, "id": "DB1"}]}) + "\n")
    cfg = pipeline_config(tmp_path)
    cfg["stages"] = [dict(cfg["stages"][0], annotations=str(tmp_path / "in" / "ann.jsonl"))]
    with pytest.raises(StageFailure):
        run_config(tmp_path, cfg)
    assert not (tmp_path / "out" / "corpus.jsonl").exists()
    leftovers = [p for p in (tmp_path / "out").glob(".tmp-*")] if (tmp_path / "out").exists() else []
    assert leftovers == []


def test_earlier_stage_outputs_preserved_on_failure(tmp_path):
    write_inputs(tmp_path)
    cfg = pipeline_config(tmp_path)
    cfg["stages"] = cfg["stages"][:2]
    cfg["stages"].append({"name": "moltext",
                          "pairs": str(tmp_path / "in" / "pairs.jsonl"),
                          "output": str(tmp_path / "out" / "describe.jsonl")})
    # make the third stage fail after the first two completed
    cfg["stages"][2]["pairs"] = str(tmp_path / "in" / "missing.jsonl")
    with pytest.raises(ConfigError):
        run_config(tmp_path, cfg)
    assert (tmp_path / "out" / "corpus.jsonl").exists()
    assert (tmp_path / "out" / "kg.jsonl").exists()


# ---------------------------------------------------------------------------
# command line surface


def test_cli_run_and_exit_codes(tmp_path):
    write_inputs(tmp_path)
    cfg_path = tmp_path / "config.yaml"
    cfg_path.write_text(yaml.safe_dump(pipeline_config(tmp_path)))
    runner = CliRunner()
    result = runner.invoke(main, ["run", str(cfg_path)])
    assert result.exit_code == 0, result.output
    payload = json.loads(result.output)
    assert payload["tool_version"].startswith("molforge")

    missing = runner.invoke(main, ["run", str(tmp_path / "nothing.yaml")])
    assert missing.exit_code == 1


def test_cli_inspect_canon():
    runner = CliRunner()
    result = runner.invoke(main, ["inspect", "chem", "canon", "CCO", "OCC"])
    assert result.exit_code == 0
    lines = result.output.strip().splitlines()
    assert len(lines) == 2
    assert lines[0] == lines[1]


def test_cli_inspect_descriptors():
    runner = CliRunner()
    result = runner.invoke(main, ["inspect", "chem", "descriptors", "CC(=O)CC"])
    assert result.exit_code == 0
    assert "nHet=1" in result.output


def test_cli_inspect_parse_error_exit_code():
    runner = CliRunner()
    result = runner.invoke(main, ["inspect", "chem", "canon", "C1CC"])
    assert result.exit_code == 2
    assert "UnclosedRing" in result.output


def test_cli_inspect_fp():
    runner = CliRunner()
    result = runner.invoke(main, ["inspect", "chem", "fp", "c1ccccc1"])
    assert result.exit_code == 0
    assert "popcount=" in result.output


def test_cli_eval(tmp_path):
    queries = tmp_path / "queries.jsonl"
    predictions = tmp_path / "predictions.jsonl"
    queries.write_text("\n".join([
        json.dumps({"query_id": "q1", "task": "vs_query", "label": 1}),
        json.dumps({"query_id": "q2", "task": "vs_query", "label": 0}),
    ]) + "\n")
    predictions.write_text("\n".join([
        json.dumps({"query_id": "q1", "raw_text": "Yes."}),
        json.dumps({"query_id": "q2", "raw_text": "No."}),
    ]) + "\n")
    runner = CliRunner()
    result = runner.invoke(main, ["eval", str(predictions), str(queries)])
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert report["tasks"]["vs_query"]["value"] == 1.0
