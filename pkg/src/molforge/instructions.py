"""Instruction-record rendering.

Three training families (molecule descriptions, knowledge-graph facts,
property synthesis plus its reverse design form) and the downstream query
families (virtual screening, drug-drug interaction, property prediction).
Every renderer is a pure function of its inputs and the seed it records;
no record ever carries a SMILES that fails parsing or valence validation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources

import yaml

from . import kg as kgmod
from .chem import DESCRIPTOR_KINDS, parse_smiles, validate_valence
from .chem.errors import SmilesParseError

TASK_TAGS = ("describe", "kg_fact", "property", "design",
             "vs_query", "ddi_query", "prop_query")

DESIGN_OBJECTIVES = ("IsValid", "BBB", "LogP", "QED", "SAs") + DESCRIPTOR_KINDS


class ForgeError(ValueError):
    pass


class InvalidSmiles(ForgeError):
    def __init__(self, smiles, cause):
        super().__init__(f"invalid SMILES {smiles!r}: {cause}")
        self.smiles = smiles


class EmptyDescription(ForgeError):
    pass


class EmptyPropertyRow(ForgeError):
    pass


class EmptyConstraints(ForgeError):
    pass


class UnknownObjective(ForgeError):
    pass


class UnknownProperty(ForgeError):
    pass


class MissingEntityMetadata(ForgeError):
    pass


class TemplateError(ForgeError):
    pass


@dataclass
class InstructionRecord:
    """One supervised sample (or answer-less query)."""

    question: str
    answer: str
    task: str
    context: str | None = None
    provenance: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.task not in TASK_TAGS:
            raise ForgeError(f"unknown task tag {self.task!r}")
        if not self.question:
            raise ForgeError("question must be nonempty")

    def to_json_dict(self) -> dict:
        return {
            "context": self.context,
            "question": self.question,
            "answer": self.answer,
            "task": self.task,
            "provenance": self.provenance,
            "seed": self.seed,
        }


class TemplateSet:
    """Named templates loaded from YAML; see assets/templates.yaml."""

    def __init__(self, data: dict):
        self.data = data

    @classmethod
    def load_default(cls) -> "TemplateSet":
        text = resources.files("molforge.assets").joinpath("templates.yaml").read_text("utf-8")
        return cls(yaml.safe_load(text))

    @classmethod
    def load(cls, path) -> "TemplateSet":
        with open(path, encoding="utf-8") as fh:
            return cls(yaml.safe_load(fh))

    def render(self, name: str, **values) -> str:
        template = self.data.get(name)
        if template is None:
            raise TemplateError(f"no template named {name!r}")
        try:
            return template.format(**values)
        except (KeyError, IndexError) as exc:
            raise TemplateError(f"template {name!r}: unbound placeholder {exc}") from exc

    def relation_verbs(self, relation: str) -> tuple[str, str]:
        table = self.data.get("relation_verbs") or {}
        if relation in table:
            active, passive = table[relation]
            return active, passive
        fallback = relation.replace("_", " ")
        return fallback, fallback


_DEFAULT_TEMPLATES: TemplateSet | None = None


def default_templates() -> TemplateSet:
    global _DEFAULT_TEMPLATES
    if _DEFAULT_TEMPLATES is None:
        _DEFAULT_TEMPLATES = TemplateSet.load_default()
    return _DEFAULT_TEMPLATES


@dataclass
class ForgeConfig:
    """Knobs shared by the KG-flavoured renderers."""

    hops: int = 2
    max_path_len: int = 3
    path_cap: int = 64
    max_context_sentences: int = 64
    kg_answer_variant: str = "card"  # or "prose"
    templates: TemplateSet = field(default_factory=default_templates)


# ---------------------------------------------------------------------------
# shared helpers


def require_valid_smiles(smiles: str) -> None:
    """Parse + valence gate applied to every SMILES that enters a record."""
    try:
        mol = parse_smiles(smiles)
    except SmilesParseError as exc:
        raise InvalidSmiles(smiles, f"{type(exc).__name__}: {exc}") from exc
    report = validate_valence(mol)
    if not report.valid:
        raise InvalidSmiles(smiles, report.violations[0].message)


def format_value(value) -> str:
    """Numbers render bare for integers, otherwise up to 4 significant
    digits with trailing zeros trimmed (the style property cards use)."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ForgeError(f"non-finite property value {value!r}")
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        return f"{value:.4g}"
    return str(value)


def article_for(word: str) -> str:
    for ch in word:
        if ch.isalpha():
            return "an" if ch.lower() in "aeiou" else "a"
    return "a"


def _entity(kg: kgmod.KnowledgeGraph, entity_id: str) -> kgmod.Entity:
    entity = kg.entities.get(entity_id)
    if entity is None or not entity.display_name or not entity.entity_type:
        raise MissingEntityMetadata(f"entity {entity_id!r} lacks name/type metadata")
    return entity


# ---------------------------------------------------------------------------
# knowledge-graph family


def path_to_text(path: kgmod.Path, kg: kgmod.KnowledgeGraph,
                 templates: TemplateSet | None = None) -> str:
    """One clause per hop, joined with ', and'; reversed hops use the
    passive form. Empty paths render as the empty string."""
    if not path.hops:
        return ""
    templates = templates or default_templates()
    clauses = []
    for hop in path.hops:
        head = _entity(kg, hop.triple.h)
        tail = _entity(kg, hop.triple.t)
        active, passive = templates.relation_verbs(hop.triple.r)
        if hop.reverse:
            clause = templates.render(
                "path_reverse",
                t_type=tail.entity_type, t=tail.display_name,
                verb_passive=passive,
                h_type=head.entity_type, h=head.display_name)
        else:
            clause = templates.render(
                "path_forward",
                h_type=head.entity_type, h=head.display_name,
                verb=active,
                t_type=tail.entity_type, t=tail.display_name)
        clauses.append(clause)
    sentence = ", and ".join(clauses)
    return sentence[0].upper() + sentence[1:]


def _context_from_paths(kg, h, t, cfg: ForgeConfig) -> tuple[str, dict]:
    sub = kgmod.enclosing_subgraph(kg, h, t, cfg.hops)
    paths, truncated = kgmod.enumerate_paths(sub, h, t, cfg.max_path_len, cfg.path_cap)
    sentences = [s for s in (path_to_text(p, kg, cfg.templates) for p in paths) if s]
    if len(sentences) > cfg.max_context_sentences:
        # Longest sentences go first when trimming; ties keep input order.
        overflow = len(sentences) - cfg.max_context_sentences
        drop = set(sorted(range(len(sentences)),
                          key=lambda i: (-len(sentences[i]), i))[:overflow])
        sentences = [s for i, s in enumerate(sentences) if i not in drop]
        truncated = True
    header = cfg.templates.render("context_header")
    if sentences:
        context = header + "\n" + "\n".join(s + "." for s in sentences)
    else:
        context = header
    meta = {"n_paths": len(sentences), "truncated": truncated}
    return context, meta


def kg_instruction(kg: kgmod.KnowledgeGraph, fact: kgmod.Triple,
                   cfg: ForgeConfig | None = None, seed: int = 0) -> InstructionRecord:
    """Relationship QA for one fact, with the enclosing-subgraph reasoning
    chains rendered as context (the fact itself is masked from them)."""
    cfg = cfg or ForgeConfig()
    head = _entity(kg, fact.h)
    tail = _entity(kg, fact.t)
    context, meta = _context_from_paths(kg, fact.h, fact.t, cfg)
    question = cfg.templates.render(
        "kg_question",
        h_type=head.entity_type, h=head.display_name,
        t_type=tail.entity_type, t=tail.display_name)
    answer_template = "kg_answer_card" if cfg.kg_answer_variant == "card" else "kg_answer_prose"
    answer = cfg.templates.render(
        answer_template,
        H_type=head.entity_type.capitalize(), h_type=head.entity_type,
        h=head.display_name, r=fact.r,
        t_type=tail.entity_type, t=tail.display_name)
    provenance = {"triple": f"{fact.h}|{fact.r}|{fact.t}", **meta}
    return InstructionRecord(question=question, answer=answer, task="kg_fact",
                             context=context, provenance=provenance, seed=seed)


# ---------------------------------------------------------------------------
# molecule-text family


def moltext_instruction(pair: tuple[str, str], seed: int = 0,
                        templates: TemplateSet | None = None) -> InstructionRecord:
    """(SMILES, description) -> describe-the-molecule record."""
    smiles, description = pair
    require_valid_smiles(smiles)
    if not description or not description.strip():
        raise EmptyDescription(f"empty description for {smiles!r}")
    templates = templates or default_templates()
    question = templates.render("describe_question", smiles=smiles)
    return InstructionRecord(question=question, answer=description,
                             task="describe",
                             provenance={"smiles": smiles}, seed=seed)


# ---------------------------------------------------------------------------
# expert-synthetic family


@dataclass
class PropertyTable:
    """Per-molecule property values with a declared schema.

    Rows map SMILES -> {property name -> value}; values are ints, floats,
    bools or qualitative strings. Finiteness is enforced at load.
    """

    schema: list[str]
    rows: dict[str, dict]
    oracle_name: str | None = None

    @classmethod
    def load(cls, path, oracle_name: str | None = None) -> "PropertyTable":
        with open(path, encoding="utf-8") as fh:
            header = None
            rows: dict[str, dict] = {}
            for line_no, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line.strip() or line.startswith("#"):
                    continue
                cols = line.split("\t")
                if header is None:
                    if cols[0] != "smiles":
                        raise ForgeError(
                            f"{path}: first header column must be 'smiles', got {cols[0]!r}")
                    header = cols[1:]
                    continue
                if len(cols) != len(header) + 1:
                    raise ForgeError(f"{path} line {line_no}: expected "
                                     f"{len(header) + 1} columns, got {len(cols)}")
                values = {}
                for name, cell in zip(header, cols[1:]):
                    cell = cell.strip()
                    if cell == "":
                        continue
                    values[name] = _parse_cell(cell, path, line_no)
                rows[cols[0]] = values
            if header is None:
                raise ForgeError(f"{path}: missing header row")
        return cls(schema=header, rows=rows, oracle_name=oracle_name)


def _parse_cell(cell: str, path, line_no):
    lowered = cell.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return int(cell)
    except ValueError:
        pass
    try:
        value = float(cell)
    except ValueError:
        return cell
    if not math.isfinite(value):
        raise ForgeError(f"{path} line {line_no}: non-finite value {cell!r}")
    return value


def synth_instruction(smiles: str, props: dict, order: list[str],
                      seed: int = 0,
                      templates: TemplateSet | None = None) -> InstructionRecord:
    """Property-function card: numeric clauses in schema order, qualitative
    clauses (bools and strings) trailing."""
    require_valid_smiles(smiles)
    selected = [(name, props[name]) for name in order if name in props]
    if not selected:
        raise EmptyPropertyRow(f"no properties for {smiles!r}")
    templates = templates or default_templates()

    numeric = []
    qualitative = []
    for name, value in selected:
        if isinstance(value, bool):
            qualitative.append(f"it is {name}" if value else f"it is not {name}")
        elif isinstance(value, (int, float)):
            numeric.append(f"{article_for(name)} {name} of {format_value(value)}")
        else:
            qualitative.append(f"it is {value}")

    if numeric:
        answer = "It has " + ", ".join(numeric)
        answer += "".join(", and " + q for q in qualitative)
    else:
        first, *rest = qualitative
        answer = first[0].upper() + first[1:]
        answer += "".join(", and " + q for q in rest)
    answer += "."

    question = templates.render("synth_question", smiles=smiles)
    return InstructionRecord(question=question, answer=answer, task="property",
                             provenance={"smiles": smiles,
                                         "properties": [n for n, _ in selected]},
                             seed=seed)


def reverse_design_instruction(smiles: str, constraints: list[tuple[str, object]],
                               seed: int = 0,
                               templates: TemplateSet | None = None) -> InstructionRecord:
    """Design question built from property constraints; the source molecule
    is the answer. Constraint values of None mean flag form."""
    require_valid_smiles(smiles)
    if not constraints:
        raise EmptyConstraints("constraint list is empty")
    templates = templates or default_templates()
    flag_phrases = templates.data.get("objective_phrases") or {}
    value_phrases = templates.data.get("objective_value_phrases") or {}

    phrases = []
    for name, value in constraints:
        if name not in DESIGN_OBJECTIVES:
            raise UnknownObjective(f"unknown design objective {name!r}")
        if value is None or value is True:
            phrase = flag_phrases.get(name, f"satisfies the {name} objective")
        else:
            template = value_phrases.get(name)
            if template:
                phrase = template.format(value=format_value(value))
            else:
                phrase = f"has {article_for(name)} {name} of {format_value(value)}"
        phrases.append(phrase)

    if len(phrases) == 1:
        joined = phrases[0]
    elif len(phrases) == 2:
        joined = f"{phrases[0]} and {phrases[1]}"
    else:
        joined = ", ".join(phrases[:-1]) + f", and {phrases[-1]}"
    question = templates.render("design_question", constraints=joined)
    return InstructionRecord(question=question, answer=smiles, task="design",
                             provenance={"smiles": smiles,
                                         "objectives": [n for n, _ in constraints]},
                             seed=seed)


# ---------------------------------------------------------------------------
# downstream queries


def downstream_query(kind: str, subjects, kg: kgmod.KnowledgeGraph | None = None,
                     prop: str | None = None, schema: list[str] | None = None,
                     cfg: ForgeConfig | None = None, seed: int = 0,
                     with_context: bool = True,
                     label: bool | None = None) -> InstructionRecord:
    """Build a vs / ddi / property query record.

    Query records carry an empty answer; pass ``label`` to emit the
    training variant with a Yes./No. answer instead.
    """
    cfg = cfg or ForgeConfig()
    answer = "" if label is None else ("Yes." if label else "No.")

    if kind == "vs":
        a_id, b_id = subjects
        if kg is None:
            raise ForgeError("vs queries need a knowledge graph")
        a, b = _entity(kg, a_id), _entity(kg, b_id)
        context = None
        meta = {}
        if with_context:
            context, meta = _context_from_paths(kg, a_id, b_id, cfg)
        question = cfg.templates.render(
            "vs_question", a_type=a.entity_type, a=a.display_name,
            b_type=b.entity_type, b=b.display_name)
        return InstructionRecord(question=question, answer=answer, task="vs_query",
                                 context=context,
                                 provenance={"pair": f"{a_id}|{b_id}", **meta},
                                 seed=seed)

    if kind == "ddi":
        a_id, b_id = subjects
        if kg is None:
            raise ForgeError("ddi queries need a knowledge graph")
        a, b = _entity(kg, a_id), _entity(kg, b_id)
        context = None
        meta = {}
        if with_context:
            context, meta = _context_from_paths(kg, a_id, b_id, cfg)
        question = cfg.templates.render(
            "ddi_question", a=a.display_name, b=b.display_name)
        return InstructionRecord(question=question, answer=answer, task="ddi_query",
                                 context=context,
                                 provenance={"pair": f"{a_id}|{b_id}", **meta},
                                 seed=seed)

    if kind == "property":
        smiles = subjects if isinstance(subjects, str) else subjects[0]
        require_valid_smiles(smiles)
        if not prop:
            raise UnknownProperty("property queries need a property name")
        if schema is not None and prop not in schema:
            raise UnknownProperty(f"property {prop!r} not in the declared schema")
        question = cfg.templates.render("property_question", property=prop, smiles=smiles)
        return InstructionRecord(question=question, answer=answer, task="prop_query",
                                 provenance={"smiles": smiles, "property": prop},
                                 seed=seed)

    raise ForgeError(f"unknown query kind {kind!r}")
