"""Config-driven pipeline: declared stages run in order, outputs are
written atomically (temp file + rename), and a manifest reconciles every
record in/out/skipped count. Reruns with the same config, seeds and inputs
are byte-identical.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, field

import yaml

from . import corpus as corpusmod
from . import evaluation as evalmod
from . import instructions as forge
from . import kg as kgmod
from .instructions import ForgeConfig, PropertyTable, TemplateSet

TOOL_VERSION = "molforge 0.1.0"

STAGE_NAMES = ("corpus", "kg_instructions", "moltext", "synth", "design",
               "queries", "eval")


class ConfigError(ValueError):
    def __init__(self, key, reason):
        super().__init__(f"config key {key!r}: {reason}")
        self.key = key
        self.reason = reason


class StageFailure(RuntimeError):
    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    seed: int
    stages: list[dict]
    fp_radius: int = 2
    fp_width: int = 2048
    hops: int = 2
    max_path_len: int = 3
    path_cap: int = 64
    max_context_sentences: int = 64
    kg_answer_variant: str = "card"
    templates_path: str | None = None
    manifest_path: str | None = None
    raw: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                data = yaml.safe_load(fh)
        except FileNotFoundError:
            raise ConfigError(str(path), "config file not found")
        except yaml.YAMLError as exc:
            raise ConfigError(str(path), f"not valid YAML: {exc}")
        if not isinstance(data, dict):
            raise ConfigError(str(path), "config must be a mapping")
        return cls.from_dict(data)

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        if "seed" not in data:
            raise ConfigError("seed", "an explicit seed is required")
        stages = data.get("stages")
        if not isinstance(stages, list) or not stages:
            raise ConfigError("stages", "a nonempty stage list is required")
        chem = data.get("chem") or {}
        kg = data.get("kg") or {}
        cfg = cls(
            seed=int(data["seed"]),
            stages=stages,
            fp_radius=int(chem.get("fp_radius", 2)),
            fp_width=int(chem.get("fp_width", 2048)),
            hops=int(kg.get("hops", 2)),
            max_path_len=int(kg.get("max_path_len", 3)),
            path_cap=int(kg.get("path_cap", 64)),
            max_context_sentences=int(kg.get("max_context_sentences", 64)),
            kg_answer_variant=str(kg.get("answer_variant", "card")),
            templates_path=data.get("templates"),
            manifest_path=data.get("manifest"),
            raw=data,
        )
        for idx, stage in enumerate(stages):
            if not isinstance(stage, dict) or "name" not in stage:
                raise ConfigError(f"stages[{idx}]", "each stage needs a name")
            if stage["name"] not in STAGE_NAMES:
                raise ConfigError(f"stages[{idx}].name",
                                  f"unknown stage {stage['name']!r}; expected one of {STAGE_NAMES}")
        return cfg

    def forge_config(self) -> ForgeConfig:
        templates = (TemplateSet.load(self.templates_path)
                     if self.templates_path else forge.default_templates())
        return ForgeConfig(
            hops=self.hops, max_path_len=self.max_path_len,
            path_cap=self.path_cap,
            max_context_sentences=self.max_context_sentences,
            kg_answer_variant=self.kg_answer_variant, templates=templates)

    def config_hash(self) -> str:
        return hashlib.sha256(
            json.dumps(self.raw, sort_keys=True, default=str).encode("utf-8")
        ).hexdigest()


@dataclass
class Manifest:
    tool_version: str
    config_hash: str
    inputs: dict = field(default_factory=dict)
    stages: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {"tool_version": self.tool_version,
                "config_hash": self.config_hash,
                "inputs": self.inputs,
                "stages": self.stages}


class _AtomicWriter:
    """Write to a temp file in the target directory; rename on success,
    remove on failure, so a crash never leaves a partial declared output."""

    def __init__(self, path):
        self.path = str(path)
        directory = os.path.dirname(self.path) or "."
        os.makedirs(directory, exist_ok=True)
        fd, self.tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-",
                                        suffix=os.path.basename(self.path))
        self.fh = os.fdopen(fd, "w", encoding="utf-8", newline="\n")

    def __enter__(self):
        return self.fh

    def __exit__(self, exc_type, exc, tb):
        self.fh.close()
        if exc_type is None:
            os.replace(self.tmp, self.path)
        else:
            os.unlink(self.tmp)
        return False


def _dump(record: dict) -> str:
    # Compact separators match JSON.stringify byte-for-byte, which binding
    # layers rely on when diffing their serialization against CLI output.
    return json.dumps(record, ensure_ascii=False, separators=(",", ":"))


def _digest_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _require_file(stage_name: str, stage: dict, key: str) -> str:
    path = stage.get(key)
    if not path:
        raise ConfigError(f"{stage_name}.{key}", "required path missing")
    if not os.path.exists(path):
        raise ConfigError(f"{stage_name}.{key}", f"file not found: {path}")
    return path


def _iter_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            yield line_no, line


# ---------------------------------------------------------------------------
# stages


def _stage_corpus(cfg: PipelineConfig, stage: dict, manifest: Manifest) -> dict:
    docs_path = _require_file("corpus", stage, "docs")
    dict_path = _require_file("corpus", stage, "dictionary")
    output = stage.get("output") or _missing("corpus.output")
    dictionary = corpusmod.EntityDictionary.load(
        dict_path, case_insensitive=bool(stage.get("case_insensitive", True)))

    annotations = None
    if stage.get("annotations"):
        annotations = {}
        for _no, line in _iter_jsonl(_require_file("corpus", stage, "annotations")):
            entry = json.loads(line)
            annotations[str(entry["doc_id"])] = entry["spans"]

    stats = corpusmod.CorpusStats()
    with _AtomicWriter(output) as fh:
        with open(docs_path, encoding="utf-8") as docs:
            lines = (line for line in docs if line.strip())
            for record in corpusmod.build_corpus(lines, dictionary, stats=stats,
                                                 annotations=annotations):
                fh.write(_dump(record.to_json_dict()) + "\n")
    manifest.inputs[docs_path] = _digest_file(docs_path)
    manifest.inputs[dict_path] = _digest_file(dict_path)
    return {"name": "corpus", "in": stats.n_in, "out": stats.n_out,
            "skipped": {"malformed": stats.malformed,
                        "duplicate": stats.duplicates},
            "info": {"substitutions": stats.substitutions,
                     "topics": stats.topic_report()}}


def _load_stage_kg(stage_name, stage, manifest) -> kgmod.KnowledgeGraph:
    triples = _require_file(stage_name, stage, "triples")
    entities = _require_file(stage_name, stage, "entities")
    manifest.inputs[triples] = _digest_file(triples)
    manifest.inputs[entities] = _digest_file(entities)
    return kgmod.load_kg(triples, entities)


def _stage_kg_instructions(cfg: PipelineConfig, stage: dict, manifest: Manifest) -> dict:
    output = stage.get("output") or _missing("kg_instructions.output")
    kg = _load_stage_kg("kg_instructions", stage, manifest)
    forge_cfg = cfg.forge_config()
    limit = stage.get("limit")
    facts = kg.triples if limit is None else kg.triples[:int(limit)]
    n_out = 0
    with _AtomicWriter(output) as fh:
        for fact in facts:
            record = forge.kg_instruction(kg, fact, forge_cfg, seed=cfg.seed)
            fh.write(_dump(record.to_json_dict()) + "\n")
            n_out += 1
    return {"name": "kg_instructions", "in": len(facts), "out": n_out,
            "skipped": {},
            "info": {"kg_entities": kg.stats.n_entities,
                     "kg_triples": kg.stats.n_triples,
                     "kg_duplicates_dropped": kg.stats.duplicate_triples}}


def _stage_moltext(cfg: PipelineConfig, stage: dict, manifest: Manifest) -> dict:
    pairs_path = _require_file("moltext", stage, "pairs")
    output = stage.get("output") or _missing("moltext.output")
    manifest.inputs[pairs_path] = _digest_file(pairs_path)
    templates = cfg.forge_config().templates
    n_in = n_out = 0
    skipped = {"invalid_smiles": 0, "empty_description": 0, "malformed": 0}
    with _AtomicWriter(output) as fh:
        for _no, line in _iter_jsonl(pairs_path):
            n_in += 1
            try:
                pair = json.loads(line)
                record = forge.moltext_instruction(
                    (pair["smiles"], pair.get("description", "")),
                    seed=cfg.seed, templates=templates)
            except forge.InvalidSmiles:
                skipped["invalid_smiles"] += 1
                continue
            except forge.EmptyDescription:
                skipped["empty_description"] += 1
                continue
            except (json.JSONDecodeError, KeyError, TypeError):
                skipped["malformed"] += 1
                continue
            fh.write(_dump(record.to_json_dict()) + "\n")
            n_out += 1
    return {"name": "moltext", "in": n_in, "out": n_out, "skipped": skipped}


def _stage_synth(cfg: PipelineConfig, stage: dict, manifest: Manifest) -> dict:
    props_path = _require_file("synth", stage, "properties")
    output = stage.get("output") or _missing("synth.output")
    manifest.inputs[props_path] = _digest_file(props_path)
    table = PropertyTable.load(props_path, oracle_name=stage.get("oracle"))
    templates = cfg.forge_config().templates
    n_in = n_out = 0
    skipped = {"invalid_smiles": 0, "empty_row": 0}
    with _AtomicWriter(output) as fh:
        for smiles, row in table.rows.items():
            n_in += 1
            try:
                record = forge.synth_instruction(smiles, row, table.schema,
                                                 seed=cfg.seed, templates=templates)
            except forge.InvalidSmiles:
                skipped["invalid_smiles"] += 1
                continue
            except forge.EmptyPropertyRow:
                skipped["empty_row"] += 1
                continue
            fh.write(_dump(record.to_json_dict()) + "\n")
            n_out += 1
    return {"name": "synth", "in": n_in, "out": n_out, "skipped": skipped}


def _stage_design(cfg: PipelineConfig, stage: dict, manifest: Manifest) -> dict:
    props_path = _require_file("design", stage, "properties")
    output = stage.get("output") or _missing("design.output")
    manifest.inputs[props_path] = _digest_file(props_path)
    objectives = stage.get("objectives")
    if not objectives:
        raise ConfigError("design.objectives", "a nonempty objective list is required")
    table = PropertyTable.load(props_path, oracle_name=stage.get("oracle"))
    templates = cfg.forge_config().templates
    n_in = n_out = 0
    skipped = {"invalid_smiles": 0, "no_constraints": 0}
    with _AtomicWriter(output) as fh:
        for smiles, row in table.rows.items():
            n_in += 1
            constraints = []
            for name in objectives:
                if name == "IsValid":
                    constraints.append((name, None))
                elif name in row and row[name] is not False:
                    value = row[name]
                    constraints.append((name, None if value is True else value))
            try:
                if not constraints:
                    raise forge.EmptyConstraints(smiles)
                record = forge.reverse_design_instruction(
                    smiles, constraints, seed=cfg.seed, templates=templates)
            except forge.InvalidSmiles:
                skipped["invalid_smiles"] += 1
                continue
            except forge.EmptyConstraints:
                skipped["no_constraints"] += 1
                continue
            fh.write(_dump(record.to_json_dict()) + "\n")
            n_out += 1
    return {"name": "design", "in": n_in, "out": n_out, "skipped": skipped}


def _stage_queries(cfg: PipelineConfig, stage: dict, manifest: Manifest) -> dict:
    kind = stage.get("kind")
    if kind not in ("vs", "ddi", "property"):
        raise ConfigError("queries.kind", f"expected vs / ddi / property, got {kind!r}")
    output = stage.get("output") or _missing("queries.output")
    subjects_path = _require_file("queries", stage, "subjects")
    manifest.inputs[subjects_path] = _digest_file(subjects_path)
    forge_cfg = cfg.forge_config()
    with_context = bool(stage.get("with_context", True))
    include_labels = bool(stage.get("include_labels", False))

    kg = None
    if kind in ("vs", "ddi"):
        kg = _load_stage_kg("queries", stage, manifest)

    n_in = n_out = 0
    skipped = {"malformed": 0, "unknown_entity": 0, "invalid_smiles": 0}
    with _AtomicWriter(output) as fh:
        with open(subjects_path, encoding="utf-8") as subjects:
            for raw in subjects:
                line = raw.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                n_in += 1
                cols = line.split("\t")
                try:
                    if kind in ("vs", "ddi"):
                        if len(cols) < 2:
                            raise forge.ForgeError("need two subject columns")
                        label = None
                        if include_labels and len(cols) > 2 and cols[2].strip():
                            label = cols[2].strip() not in ("0", "false", "no")
                        record = forge.downstream_query(
                            kind, (cols[0].strip(), cols[1].strip()), kg=kg,
                            cfg=forge_cfg, seed=cfg.seed,
                            with_context=with_context, label=label)
                    else:
                        if len(cols) < 2:
                            raise forge.ForgeError("need smiles and property columns")
                        record = forge.downstream_query(
                            "property", cols[0].strip(), prop=cols[1].strip(),
                            cfg=forge_cfg, seed=cfg.seed)
                except (kgmod.UnknownEntity, forge.MissingEntityMetadata):
                    skipped["unknown_entity"] += 1
                    continue
                except forge.InvalidSmiles:
                    skipped["invalid_smiles"] += 1
                    continue
                except forge.ForgeError:
                    skipped["malformed"] += 1
                    continue
                fh.write(_dump(record.to_json_dict()) + "\n")
                n_out += 1
    return {"name": "queries", "in": n_in, "out": n_out, "skipped": skipped}


def _stage_eval(cfg: PipelineConfig, stage: dict, manifest: Manifest) -> dict:
    predictions_path = _require_file("eval", stage, "predictions")
    queries_path = _require_file("eval", stage, "queries")
    output = stage.get("output") or _missing("eval.output")
    manifest.inputs[predictions_path] = _digest_file(predictions_path)
    manifest.inputs[queries_path] = _digest_file(queries_path)

    predictions = [json.loads(line) for _no, line in _iter_jsonl(predictions_path)]
    queries = [json.loads(line) for _no, line in _iter_jsonl(queries_path)]
    report = evalmod.evaluate(predictions, queries,
                              fp_radius=cfg.fp_radius, fp_width=cfg.fp_width)
    with _AtomicWriter(output) as fh:
        fh.write(json.dumps(report.to_json_dict(), indent=2, sort_keys=True) + "\n")
    if stage.get("table_output"):
        with _AtomicWriter(stage["table_output"]) as fh:
            fh.write(report.table() + "\n")
    return {"name": "eval", "in": report.n_predictions,
            "out": len(report.tasks),
            "skipped": {"unmatched": report.unmatched_predictions},
            "info": {"tasks": sorted(report.tasks)}}


def _missing(key):
    raise ConfigError(key, "required path missing")


_STAGE_RUNNERS = {
    "corpus": _stage_corpus,
    "kg_instructions": _stage_kg_instructions,
    "moltext": _stage_moltext,
    "synth": _stage_synth,
    "design": _stage_design,
    "queries": _stage_queries,
    "eval": _stage_eval,
}


def run(config: PipelineConfig) -> Manifest:
    """Execute every declared stage in order and return the manifest.

    Raises :class:`ConfigError` before touching data and
    :class:`StageFailure` when a stage dies; outputs of stages that already
    completed are preserved either way.
    """
    manifest = Manifest(tool_version=TOOL_VERSION, config_hash=config.config_hash())
    for stage in config.stages:
        runner = _STAGE_RUNNERS[stage["name"]]
        try:
            result = runner(config, stage, manifest)
        except ConfigError:
            raise
        except Exception as exc:
            raise StageFailure(stage["name"], exc) from exc
        manifest.stages.append(result)
    if config.manifest_path:
        with _AtomicWriter(config.manifest_path) as fh:
            fh.write(json.dumps(manifest.to_json_dict(), indent=2, sort_keys=True) + "\n")
    return manifest
