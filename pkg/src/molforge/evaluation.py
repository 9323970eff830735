"""Scoring of free-text model outputs: yes/no and numeric answer parsing,
SMILES extraction, ROC-AUC, R-squared and the generation-quality quadruple
(valid / unique / novelty / diversity).

Diversity is 1 minus the mean Tanimoto similarity over unordered pairs of
distinct valid molecules (2/(n(n-1)) normalization); with fewer than two
distinct molecules it is reported as absent.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .chem import (
    DEFAULT_RADIUS,
    DEFAULT_WIDTH,
    canonical_smiles,
    morgan_fingerprint,
    parse_smiles,
    tanimoto,
    validate_valence,
)
from .chem.errors import SmilesParseError


class EvalError(ValueError):
    pass


class SingleClassInput(EvalError):
    pass


class DegenerateTarget(EvalError):
    pass


# ---------------------------------------------------------------------------
# answer parsing

YES_WORDS = frozenset({"yes", "indeed", "correct", "true", "affirmative", "likely"})
NO_WORDS = frozenset({"no", "not", "false", "negative", "unlikely", "never"})

_SENTENCE_END = re.compile(r"[.!?\n]")
_WORD = re.compile(r"[a-z]+", re.IGNORECASE)
_NUMBER = re.compile(r"[-+]?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?")


def parse_yesno(text: str) -> str:
    """'yes' / 'no' / 'unknown' from the leading sentence, by keyword."""
    if not text:
        return "unknown"
    cut = _SENTENCE_END.search(text)
    sentence = text[:cut.start()] if cut else text
    words = {w.lower() for w in _WORD.findall(sentence)}
    has_yes = bool(words & YES_WORDS)
    has_no = bool(words & NO_WORDS)
    if has_yes == has_no:
        return "unknown"
    return "yes" if has_yes else "no"


def parse_numeric(text: str, property_name: str) -> float | None:
    """The numeric literal nearest to an occurrence of the property name;
    the first literal when the name is absent; None when no number exists.
    Literals inside the property name itself (e.g. LogD7.4) are ignored."""
    if not text:
        return None
    name_spans = []
    if property_name:
        folded = text.lower()
        needle = property_name.lower()
        at = folded.find(needle)
        while at >= 0:
            name_spans.append((at, at + len(needle)))
            at = folded.find(needle, at + 1)

    numbers = []
    for match in _NUMBER.finditer(text):
        span = match.span()
        if any(span[0] >= s and span[1] <= e for s, e in name_spans):
            continue
        numbers.append((span, float(match.group(0))))
    if not numbers:
        return None
    if not name_spans:
        return numbers[0][1]

    def distance(num_span):
        best = None
        for s, e in name_spans:
            gap = max(num_span[0] - e, s - num_span[1], 0)
            best = gap if best is None else min(best, gap)
        return best

    best_value = None
    best_key = None
    for span, value in numbers:
        key = (distance(span), span[0])
        if best_key is None or key < best_key:
            best_key = key
            best_value = value
    return best_value


_STRIP_CHARS = "\"'“”‘’`.,;:!?…"


def _token_candidates(token: str):
    yield token
    current = token
    while True:
        stripped = current.strip(_STRIP_CHARS)
        if stripped == current:
            break
        current = stripped
        yield current
    while (len(current) >= 2
           and ((current[0] == "(" and current[-1] == ")")
                or (current[0] == "[" and current[-1] == "]"))):
        current = current[1:-1].strip(_STRIP_CHARS)
        yield current


def extract_smiles(text: str) -> list[str]:
    """Whitespace-delimited tokens that parse and valence-validate, in order
    of appearance, deduplicated by canonical form. Surrounding punctuation
    is stripped progressively until a token parses."""
    out: list[str] = []
    seen: set[str] = set()
    for token in text.split():
        for candidate in _token_candidates(token):
            if not candidate:
                continue
            try:
                mol = parse_smiles(candidate)
            except SmilesParseError:
                continue
            if not validate_valence(mol).valid:
                continue
            canon = canonical_smiles(mol)
            if canon not in seen:
                seen.add(canon)
                out.append(candidate)
            break
    return out


# ---------------------------------------------------------------------------
# metrics


def roc_auc(scores, labels) -> float:
    """Mann-Whitney AUC with average ranks for ties: equals
    (concordant + 0.5 * tied) / (n_pos * n_neg) exactly."""
    if len(scores) != len(labels):
        raise EvalError(f"length mismatch: {len(scores)} scores vs {len(labels)} labels")
    n_pos = sum(1 for l in labels if l)
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassInput("both classes must be present")
    order = sorted(range(len(scores)), key=lambda i: scores[i])
    rank_sum_pos = 0.0
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        avg_rank = (i + j + 2) / 2  # 1-based average rank of the tie group
        for k in range(i, j + 1):
            if labels[order[k]]:
                rank_sum_pos += avg_rank
        i = j + 1
    return (rank_sum_pos - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


def r_squared(pred, actual) -> float:
    """Coefficient of determination, 1 - SS_res / SS_tot."""
    if len(pred) != len(actual):
        raise EvalError(f"length mismatch: {len(pred)} vs {len(actual)}")
    if len(pred) < 2:
        raise DegenerateTarget("need at least two points")
    mean = sum(actual) / len(actual)
    ss_tot = sum((a - mean) ** 2 for a in actual)
    if ss_tot == 0:
        raise DegenerateTarget("target values are all equal")
    ss_res = sum((p - a) ** 2 for p, a in zip(pred, actual))
    return 1.0 - ss_res / ss_tot


@dataclass
class DesignMetrics:
    valid: float
    unique: float
    novelty: float
    diversity: float | None
    n_generated: int
    n_valid: int

    def to_json_dict(self) -> dict:
        return {
            "valid": self.valid,
            "unique": self.unique,
            "novelty": self.novelty,
            "diversity": self.diversity,
            "n_generated": self.n_generated,
            "n_valid": self.n_valid,
        }


def design_metrics(generated, training_set: set[str],
                   fp_radius: int = DEFAULT_RADIUS,
                   fp_width: int = DEFAULT_WIDTH) -> DesignMetrics:
    """Generation-quality quadruple over a list of SMILES.

    valid    = parse+valence successes / generated
    unique   = distinct canonical forms / valid
    novelty  = distinct forms not in the training set / distinct forms
    diversity= 1 - mean pairwise Tanimoto over distinct valid molecules
               (absent when fewer than two are distinct)
    ``training_set`` must contain canonical SMILES.
    """
    n_generated = len(generated)
    valid_mols = []
    for smiles in generated:
        try:
            mol = parse_smiles(smiles)
        except SmilesParseError:
            continue
        if validate_valence(mol).valid:
            valid_mols.append(mol)
    n_valid = len(valid_mols)

    distinct: dict[str, object] = {}
    for mol in valid_mols:
        canon = canonical_smiles(mol)
        if canon not in distinct:
            distinct[canon] = mol

    valid_frac = n_valid / n_generated if n_generated else 0.0
    unique_frac = len(distinct) / n_valid if n_valid else 0.0
    novel = sum(1 for canon in distinct if canon not in training_set)
    novelty_frac = novel / len(distinct) if distinct else 0.0

    diversity = None
    if len(distinct) >= 2:
        fps = [morgan_fingerprint(mol, fp_radius, fp_width)
               for mol in distinct.values()]
        n = len(fps)
        total = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                total += tanimoto(fps[i], fps[j])
        diversity = 1.0 - total * 2.0 / (n * (n - 1))

    return DesignMetrics(valid=valid_frac, unique=unique_frac,
                         novelty=novelty_frac, diversity=diversity,
                         n_generated=n_generated, n_valid=n_valid)


# ---------------------------------------------------------------------------
# prediction joining / report


YESNO_TASKS = ("vs_query", "ddi_query", "vs", "ddi")
REGRESSION_TASKS = ("prop_query", "property")
DESIGN_TASKS = ("design",)

FOOTNOTES = (
    "diversity = 1 - mean Tanimoto over unordered pairs of distinct valid "
    "molecules (2/(n(n-1)) normalization); unique/novelty compare canonical "
    "forms; unparseable yes/no answers score 0.5",
)


@dataclass
class EvalReport:
    tasks: dict = field(default_factory=dict)
    n_predictions: int = 0
    n_queries: int = 0
    unmatched_predictions: int = 0
    config: dict = field(default_factory=dict)
    footnotes: tuple = FOOTNOTES

    def to_json_dict(self) -> dict:
        return {
            "tasks": self.tasks,
            "n_predictions": self.n_predictions,
            "n_queries": self.n_queries,
            "unmatched_predictions": self.unmatched_predictions,
            "config": self.config,
            "footnotes": list(self.footnotes),
        }

    def table(self) -> str:
        lines = [f"{'task':<12} {'metric':<10} {'value':>10} {'n':>7} {'parse_fail':>10}"]
        for task in sorted(self.tasks):
            info = self.tasks[task]
            if task == "design":
                for key in ("valid", "unique", "novelty", "diversity"):
                    value = info["metrics"][key]
                    rendered = "absent" if value is None else f"{value:.4f}"
                    lines.append(f"{task:<12} {key:<10} {rendered:>10} "
                                 f"{info['n']:>7} {info['parse_failures']:>10}")
            else:
                value = info["value"]
                rendered = "n/a" if value is None else f"{value:.4f}"
                lines.append(f"{task:<12} {info['metric']:<10} {rendered:>10} "
                             f"{info['n']:>7} {info['parse_failures']:>10}")
        lines.extend("# " + note for note in self.footnotes)
        return "\n".join(lines)


def _load_training_set(path) -> set[str]:
    out = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            smiles = line.strip()
            if not smiles or smiles.startswith("#"):
                continue
            out.add(canonical_smiles(parse_smiles(smiles)))
    return out


def evaluate(predictions, queries, fp_radius: int = DEFAULT_RADIUS,
             fp_width: int = DEFAULT_WIDTH,
             training_set_loader=_load_training_set) -> EvalReport:
    """Join prediction records against query records and score each task.

    ``predictions``: iterable of {"query_id", "raw_text"}.
    ``queries``: iterable of {"query_id", "task", and per-task fields
    "label" / "target_value" + "property" / "training_set_ref"}.
    """
    queries_by_id = {}
    for query in queries:
        queries_by_id[str(query["query_id"])] = query

    report = EvalReport(config={"fp_radius": fp_radius, "fp_width": fp_width,
                                "diversity_population": "distinct_valid"})
    report.n_queries = len(queries_by_id)

    yesno: dict[str, dict] = {}
    regression: dict[str, dict] = {}
    design: dict[str, dict] = {}

    for pred in predictions:
        report.n_predictions += 1
        query = queries_by_id.get(str(pred["query_id"]))
        if query is None:
            report.unmatched_predictions += 1
            continue
        task = query["task"]
        raw = pred.get("raw_text", "")
        if task in YESNO_TASKS:
            acc = yesno.setdefault(task, {"scores": [], "labels": [], "failures": 0})
            parsed = parse_yesno(raw)
            acc["scores"].append({"yes": 1.0, "no": 0.0, "unknown": 0.5}[parsed])
            acc["labels"].append(1 if query["label"] else 0)
            if parsed == "unknown":
                acc["failures"] += 1
        elif task in REGRESSION_TASKS:
            acc = regression.setdefault(task, {"preds": [], "targets": [], "failures": 0})
            value = parse_numeric(raw, query.get("property", ""))
            if value is None:
                acc["failures"] += 1
                continue
            acc["preds"].append(value)
            acc["targets"].append(float(query["target_value"]))
        elif task in DESIGN_TASKS:
            acc = design.setdefault(query.get("training_set_ref", ""),
                                    {"smiles": [], "n": 0, "failures": 0})
            extracted = extract_smiles(raw)
            acc["smiles"].extend(extracted)
            acc["n"] += 1
            if not extracted:
                acc["failures"] += 1
        else:
            report.unmatched_predictions += 1

    for task, acc in yesno.items():
        value = None
        if acc["scores"] and len(set(acc["labels"])) == 2:
            value = roc_auc(acc["scores"], acc["labels"])
        report.tasks[task] = {"metric": "roc_auc", "value": value,
                              "n": len(acc["scores"]),
                              "parse_failures": acc["failures"]}
    for task, acc in regression.items():
        value = None
        if len(acc["preds"]) >= 2 and len(set(acc["targets"])) > 1:
            value = r_squared(acc["preds"], acc["targets"])
        report.tasks[task] = {"metric": "r_squared", "value": value,
                              "n": len(acc["preds"]) + acc["failures"],
                              "parse_failures": acc["failures"]}
    for ref, acc in design.items():
        training = training_set_loader(ref) if ref else set()
        metrics = design_metrics(acc["smiles"], training, fp_radius, fp_width)
        report.tasks["design"] = {"metric": "design_quadruple",
                                  "metrics": metrics.to_json_dict(),
                                  "n": acc["n"], "parse_failures": acc["failures"]}
    return report
