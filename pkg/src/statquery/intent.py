"""Routing of freeform queries onto a closed registry of tasks.

A query is matched to one of the registered task descriptions and
translated into a structured Action. When a language-model client is
configured it is tried first and its reply is accepted only if it
validates against the wire schema with resolvable variables; otherwise a
deterministic rule grammar does the translation. Anything that matches
no task becomes Unknown -- no free text ever reaches the engine.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .data import CATEGORICAL, CONTINUOUS, Dataset
from .errors import (
    AmbiguousMentionError,
    SchemaViolation,
    UnresolvedMentionError,
)
from .formula import FAMILIES, GAMMA, GAUSSIAN, LOGNORMAL, ModelSpec, Term

DEFAULT_HOPS_DRAWS = 100

PROVENANCE_LLM = "llm_client"
PROVENANCE_GRAMMAR = "rule_grammar"


@dataclass(frozen=True)
class TaskDescription:
    id: str
    description: str
    required_slots: tuple[str, ...] = ()


TASK_REGISTRY: tuple[TaskDescription, ...] = (
    TaskDescription(
        "fit_model",
        "Fit a model relating a response variable to one or more predictors.",
        ("response", "predictors"),
    ),
    TaskDescription(
        "revise_model",
        "Add predictors to or remove predictors from the current model.",
        (),
    ),
    TaskDescription(
        "test_pairwise",
        "Test average response differences between all pairs of levels of a "
        "grouping variable.",
        ("response", "group"),
    ),
    TaskDescription(
        "test_slope_by_group",
        "Test whether a continuous predictor's effect on the response "
        "differs between groups.",
        ("response", "slope_var", "group"),
    ),
    TaskDescription(
        "inspect_residuals",
        "Show residual diagnostics for the current model.",
        (),
    ),
    TaskDescription(
        "report_residual_pattern",
        "Note that the residuals look structured and consider a refinement.",
        (),
    ),
    TaskDescription(
        "show_hops",
        "Animate plausible alternative fits to show estimation uncertainty.",
        (),
    ),
    TaskDescription(
        "change_family",
        "Refit the current model with a different response distribution.",
        ("family",),
    ),
)

TASK_IDS = frozenset(t.id for t in TASK_REGISTRY)


# -- actions -----------------------------------------------------------------

@dataclass(frozen=True)
class FitModel:
    spec: ModelSpec
    type: str = field(default="fit_model", init=False)


@dataclass(frozen=True)
class ReviseModel:
    add: tuple[str, ...] = ()
    remove: tuple[str, ...] = ()
    type: str = field(default="revise_model", init=False)


@dataclass(frozen=True)
class TestPairwise:
    response: str
    group: str
    type: str = field(default="test_pairwise", init=False)


@dataclass(frozen=True)
class TestSlopeByGroup:
    response: str
    slope_var: str
    group: str
    type: str = field(default="test_slope_by_group", init=False)


@dataclass(frozen=True)
class InspectResiduals:
    type: str = field(default="inspect_residuals", init=False)


@dataclass(frozen=True)
class ReportResidualPattern:
    type: str = field(default="report_residual_pattern", init=False)


@dataclass(frozen=True)
class ShowHops:
    draws: int = DEFAULT_HOPS_DRAWS
    type: str = field(default="show_hops", init=False)


@dataclass(frozen=True)
class ChangeFamily:
    family: str
    type: str = field(default="change_family", init=False)


@dataclass(frozen=True)
class Unknown:
    type: str = field(default="unknown", init=False)


Action = (
    FitModel
    | ReviseModel
    | TestPairwise
    | TestSlopeByGroup
    | InspectResiduals
    | ReportResidualPattern
    | ShowHops
    | ChangeFamily
    | Unknown
)


def action_to_json(action: Action) -> dict:
    if isinstance(action, FitModel):
        out = {"type": action.type}
        out.update(action.spec.to_json())
        return out
    if isinstance(action, ReviseModel):
        return {
            "type": action.type,
            "add": list(action.add),
            "remove": list(action.remove),
        }
    if isinstance(action, TestPairwise):
        return {"type": action.type, "response": action.response, "group": action.group}
    if isinstance(action, TestSlopeByGroup):
        return {
            "type": action.type,
            "response": action.response,
            "slope_var": action.slope_var,
            "group": action.group,
        }
    if isinstance(action, ShowHops):
        return {"type": action.type, "draws": action.draws}
    if isinstance(action, ChangeFamily):
        return {"type": action.type, "family": action.family}
    return {"type": action.type}


def action_from_json(obj: dict) -> Action:
    from .formula import parse_formula

    kind = obj.get("type")
    if kind == "fit_model":
        if "formula" in obj:
            spec = parse_formula(obj["formula"], family=obj.get("family", GAUSSIAN))
        else:
            spec = ModelSpec.from_json(obj)
        return FitModel(spec=spec)
    if kind == "revise_model":
        return ReviseModel(
            add=tuple(obj.get("add", ())), remove=tuple(obj.get("remove", ()))
        )
    if kind == "test_pairwise":
        return TestPairwise(response=obj["response"], group=obj["group"])
    if kind == "test_slope_by_group":
        return TestSlopeByGroup(
            response=obj["response"],
            slope_var=obj["slope_var"],
            group=obj["group"],
        )
    if kind == "inspect_residuals":
        return InspectResiduals()
    if kind == "report_residual_pattern":
        return ReportResidualPattern()
    if kind == "show_hops":
        return ShowHops(draws=int(obj.get("draws", DEFAULT_HOPS_DRAWS)))
    if kind == "change_family":
        return ChangeFamily(family=obj["family"])
    if kind == "unknown":
        return Unknown()
    raise SchemaViolation(f"unknown action type {kind!r}")


@dataclass(frozen=True)
class TranslationResult:
    action: Action
    provenance: str  # PROVENANCE_LLM or PROVENANCE_GRAMMAR
    raw_model_output: str = ""
    confidence_note: str = ""


# -- variable resolution ------------------------------------------------------

def resolve_variable(mention: str, dataset: Dataset, synonyms: dict | None = None) -> str:
    """Resolve one mention to a column name.

    Tiers: exact case-insensitive name match, then configured synonyms,
    then a unique substring match (either direction). Zero candidates
    raise UnresolvedMentionError; ties raise AmbiguousMentionError
    instead of guessing.
    """
    needle = mention.strip().lower()
    if not needle:
        raise UnresolvedMentionError("empty variable mention")

    for name in dataset.column_names:
        if name.lower() == needle:
            return name

    for phrase, target in (synonyms or {}).items():
        if phrase.strip().lower() == needle and dataset.has_column(target):
            return target

    candidates = [
        name
        for name in dataset.column_names
        if needle in name.lower() or name.lower() in needle
    ]
    if len(candidates) == 1:
        return candidates[0]
    if len(candidates) > 1:
        raise AmbiguousMentionError(
            f"{mention!r} matches several variables: {', '.join(sorted(candidates))}",
            candidates=candidates,
        )
    raise UnresolvedMentionError(f"{mention!r} matches no variable")


def _normalize(query: str) -> str:
    text = query.replace("’", "'").replace("‘", "'")
    text = text.replace("“", '"').replace("”", '"')
    return text.lower()


@dataclass(frozen=True)
class Mention:
    start: int
    end: int
    variable: str
    text: str


def find_mentions(query: str, dataset: Dataset, synonyms: dict | None = None) -> list[Mention]:
    """Locate variable mentions in a query, longest match first.

    Column names and synonym phrases match case-insensitively on word
    boundaries, tolerating a plural 's'/'es' suffix. Overlapping matches
    keep the longer phrase.
    """
    text = _normalize(query)
    phrases: list[tuple[str, str]] = [
        (name.lower(), name) for name in dataset.column_names
    ]
    for phrase, target in (synonyms or {}).items():
        if dataset.has_column(target):
            phrases.append((phrase.strip().lower(), target))

    raw: list[Mention] = []
    for phrase, target in phrases:
        pattern = re.compile(rf"\b{re.escape(phrase)}(?:e?s)?\b")
        for m in pattern.finditer(text):
            raw.append(Mention(m.start(), m.end(), target, m.group(0)))

    chosen: list[Mention] = []
    for m in sorted(raw, key=lambda m: (-(m.end - m.start), m.start)):
        if any(not (m.end <= c.start or m.start >= c.end) for c in chosen):
            continue
        chosen.append(m)
    chosen.sort(key=lambda m: m.start)
    return chosen


def _kind_of(dataset: Dataset, name: str) -> str:
    return dataset.column(name).kind


def _continuous(dataset, mentions):
    return [m for m in mentions if _kind_of(dataset, m.variable) == CONTINUOUS]


def _categorical(dataset, mentions):
    return [m for m in mentions if _kind_of(dataset, m.variable) == CATEGORICAL]


# -- rule grammar -------------------------------------------------------------

_HYPOTHESIS_CUES = ("hypothesis", "significant", "test whether", "differently for")

_NEGATIVE_RESIDUAL_RE = re.compile(
    r"(don't|do not|doesn't|does not)\s+(look|seem|appear)\s+random"
    r"|non-?\s?random|not\s+random"
)

_AFFECT_VERBS_RE = re.compile(
    r"\b(affects?|influences?|impacts?|predicts?|drives?|changes?)\b"
)

_RELATIONSHIP_CUES: tuple[tuple[str, str], ...] = (
    # (cue, side of the cue where the response is mentioned)
    ("depends on", "left"),
    ("depend on", "left"),
    ("results in", "right"),
    ("result in", "right"),
    ("predicted by", "left"),
    ("affects", "right"),
    ("affect", "right"),
    ("influences", "right"),
    ("influence", "right"),
    ("explains", "right"),
    ("explain", "right"),
    ("from", "left"),
)

_DRAWS_RE = re.compile(r"(\d+)\s*(?:draws?|samples?|outcomes?)")

_FAMILY_WORDS: tuple[tuple[str, str], ...] = (
    ("log-normal", LOGNORMAL),
    ("lognormal", LOGNORMAL),
    ("log normal", LOGNORMAL),
    ("gamma", GAMMA),
    ("gaussian", GAUSSIAN),
    ("normal", GAUSSIAN),
    ("skew", GAMMA),  # default skewed family
)


def _hypothesis_action(text, dataset, mentions) -> Action:
    continuous = _continuous(dataset, mentions)
    categorical = _categorical(dataset, mentions)
    if "differently" in text and len(continuous) >= 2 and categorical:
        group = categorical[0].variable
        verb = _AFFECT_VERBS_RE.search(text)
        slope_var = response = None
        if verb:
            before = [m for m in continuous if m.end <= verb.start()]
            after = [m for m in continuous if m.start >= verb.end()]
            if before and after:
                slope_var = before[-1].variable
                response = after[0].variable
        if slope_var is None:
            slope_var = continuous[0].variable
            response = continuous[1].variable
        if slope_var == response:
            return Unknown()
        return TestSlopeByGroup(response=response, slope_var=slope_var, group=group)
    if continuous and categorical:
        return TestPairwise(
            response=continuous[0].variable, group=categorical[0].variable
        )
    return Unknown()


def _revise_action(text, dataset, mentions, context) -> Action:
    response = context.response if context is not None else None
    names = [m.variable for m in mentions if m.variable != response]
    names = list(dict.fromkeys(names))
    if not names:
        return Unknown()
    if re.search(r"\b(remove|drop|exclude|without)\b", text):
        return ReviseModel(remove=tuple(names))
    return ReviseModel(add=tuple(names))


def _fit_action(text, dataset, mentions) -> Action:
    predict = re.search(r"\bpredict(?:s|ing|ed)?\b", text)
    frm = re.search(r"\bfrom\b", text)
    if predict and frm and predict.end() <= frm.start():
        between = [
            m
            for m in _continuous(dataset, mentions)
            if predict.end() <= m.start and m.end <= frm.start()
        ]
        after = [m for m in mentions if m.start >= frm.end()]
        if between and after:
            response = between[0].variable
            predictors = [m.variable for m in after if m.variable != response]
            if predictors:
                return _build_fit(response, predictors)
        return Unknown()

    for cue, response_side in _RELATIONSHIP_CUES:
        idx = text.find(cue)
        if idx < 0:
            continue
        left = [m for m in mentions if m.end <= idx]
        right = [m for m in mentions if m.start >= idx + len(cue)]
        resp_side, pred_side = (
            (left, right) if response_side == "left" else (right, left)
        )
        resp_continuous = _continuous(dataset, resp_side)
        if not resp_continuous or not pred_side:
            return Unknown()
        response = resp_continuous[0].variable
        predictors = list(
            dict.fromkeys(
                m.variable for m in pred_side if m.variable != response
            )
        )
        if not predictors:
            return Unknown()
        return _build_fit(response, predictors)
    return Unknown()


def _build_fit(response: str, predictors: list[str]) -> FitModel:
    terms = tuple(Term((p,)) for p in predictors)
    return FitModel(spec=ModelSpec(response=response, terms=terms))


def rule_grammar_parse(
    query: str,
    dataset: Dataset,
    context: ModelSpec | None = None,
    synonyms: dict | None = None,
) -> Action:
    """Deterministic pattern rules, applied in fixed priority order.

    A matched pattern whose variable slots cannot be resolved yields
    Unknown rather than a guess.
    """
    text = _normalize(query)
    mentions = find_mentions(query, dataset, synonyms)

    if any(cue in text for cue in _HYPOTHESIS_CUES):
        return _hypothesis_action(text, dataset, mentions)
    if re.search(r"\b(include|includes|including|add|adds|adding|remove|drop|exclude|without)\b", text):
        return _revise_action(text, dataset, mentions, context)
    if "residual" in text:
        if _NEGATIVE_RESIDUAL_RE.search(text):
            return ReportResidualPattern()
        return InspectResiduals()
    if re.search(r"\bhops?\b", text) or "variability" in text:
        count = _DRAWS_RE.search(text)
        draws = int(count.group(1)) if count else DEFAULT_HOPS_DRAWS
        return ShowHops(draws=draws) if draws >= 1 else Unknown()
    for word, family in _FAMILY_WORDS:
        if word in text:
            return ChangeFamily(family=family)
    action = _fit_action(text, dataset, mentions)
    return action


# -- language-model path ------------------------------------------------------

WIRE_SCHEMA_NOTE = (
    'Reply with exactly one JSON object of the form {"task_id": "<id>", '
    '"slots": {...}} and nothing else. task_id must be one of the listed '
    "tasks; slots may only reference dataset columns by name. Do not "
    "compute or report any numbers."
)


def build_system_prompt(dataset: Dataset, context: ModelSpec | None) -> str:
    from .formula import print_formula

    lines = ["You translate one analysis request into one supported task.", ""]
    lines.append("Supported tasks:")
    for task in TASK_REGISTRY:
        slots = ", ".join(task.required_slots) if task.required_slots else "none"
        lines.append(f"- {task.id}: {task.description} (slots: {slots})")
    lines.append("")
    lines.append("Dataset columns:")
    for entry in dataset.schema_summary():
        if entry["kind"] == CATEGORICAL:
            lines.append(
                f"- {entry['name']} (categorical: {', '.join(entry['levels'])})"
            )
        else:
            lines.append(f"- {entry['name']} (continuous)")
    if context is not None:
        lines.append("")
        lines.append(f"Current model: {print_formula(context)}")
    lines.append("")
    lines.append(WIRE_SCHEMA_NOTE)
    return "\n".join(lines)


class HttpLlmClient:
    """Minimal HTTP client for the translation endpoint.

    POSTs {"system": ..., "query": ...} with a bearer credential and
    expects the reply body to be the task JSON object itself. One retry,
    then the caller falls back to the rule grammar.
    """

    def __init__(self, endpoint: str, credential: str, timeout: float = 10.0, retries: int = 1):
        self.endpoint = endpoint
        self.credential = credential
        self.timeout = timeout
        self.retries = retries

    def translate(self, system_prompt: str, query: str) -> dict:
        import requests

        last_error = None
        for _ in range(self.retries + 1):
            try:
                response = requests.post(
                    self.endpoint,
                    json={"system": system_prompt, "query": query},
                    headers={"Authorization": f"Bearer {self.credential}"},
                    timeout=self.timeout,
                )
                response.raise_for_status()
                return response.json()
            except (requests.RequestException, ValueError) as err:
                last_error = err
        raise ConnectionError(f"language-model endpoint unreachable: {last_error}")


def _slot_str(slots: dict, key: str) -> str:
    value = slots.get(key)
    if not isinstance(value, str) or not value.strip():
        raise SchemaViolation(f"slot {key!r} must be a non-empty string")
    return value


def _slot_vars(slots: dict, key: str) -> list[str]:
    value = slots.get(key, [])
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaViolation(f"slot {key!r} must be a list of strings")
    return value


def validate_llm_reply(reply, dataset: Dataset, synonyms: dict | None = None) -> Action:
    """Validate a model reply against the wire schema; violations raise.

    The reply must be exactly one object naming a registered task whose
    variable slots all resolve against the dataset.
    """
    if not isinstance(reply, dict):
        raise SchemaViolation("reply must be a single JSON object")
    extra = set(reply) - {"task_id", "slots"}
    if extra:
        raise SchemaViolation(f"unexpected reply fields: {sorted(extra)}")
    task_id = reply.get("task_id")
    if task_id not in TASK_IDS:
        raise SchemaViolation(f"unknown task_id {task_id!r}")
    slots = reply.get("slots", {})
    if not isinstance(slots, dict):
        raise SchemaViolation("slots must be an object")

    def resolve(mention: str) -> str:
        return resolve_variable(mention, dataset, synonyms)

    if task_id == "fit_model":
        response = resolve(_slot_str(slots, "response"))
        predictors = [resolve(v) for v in _slot_vars(slots, "predictors")]
        if not predictors:
            raise SchemaViolation("fit_model needs at least one predictor")
        return _build_fit(response, list(dict.fromkeys(predictors)))
    if task_id == "revise_model":
        add = tuple(resolve(v) for v in _slot_vars(slots, "add"))
        remove = tuple(resolve(v) for v in _slot_vars(slots, "remove"))
        if not add and not remove:
            raise SchemaViolation("revise_model needs add or remove entries")
        return ReviseModel(add=add, remove=remove)
    if task_id == "test_pairwise":
        response = resolve(_slot_str(slots, "response"))
        group = resolve(_slot_str(slots, "group"))
        return TestPairwise(response=response, group=group)
    if task_id == "test_slope_by_group":
        return TestSlopeByGroup(
            response=resolve(_slot_str(slots, "response")),
            slope_var=resolve(_slot_str(slots, "slope_var")),
            group=resolve(_slot_str(slots, "group")),
        )
    if task_id == "inspect_residuals":
        return InspectResiduals()
    if task_id == "report_residual_pattern":
        return ReportResidualPattern()
    if task_id == "show_hops":
        draws = slots.get("draws", DEFAULT_HOPS_DRAWS)
        if not isinstance(draws, int) or draws < 1:
            raise SchemaViolation("draws must be a positive integer")
        return ShowHops(draws=draws)
    if task_id == "change_family":
        family = _slot_str(slots, "family").lower().replace("-", "").replace(" ", "")
        mapping = {
            "gaussian": GAUSSIAN,
            "normal": GAUSSIAN,
            "gamma": GAMMA,
            "lognormal": LOGNORMAL,
            "skewed": GAMMA,
        }
        if family not in mapping:
            raise SchemaViolation(f"unknown family {family!r}")
        return ChangeFamily(family=mapping[family])
    raise SchemaViolation(f"unhandled task_id {task_id!r}")


def llm_translate(
    query: str,
    client,
    dataset: Dataset,
    context: ModelSpec | None = None,
    synonyms: dict | None = None,
) -> TranslationResult:
    """Ask the configured client; accept only schema-valid replies.

    Schema violations and unresolvable variables downgrade to Unknown
    (with the raw reply preserved for audit); transport errors propagate
    so the caller can fall back to the rule grammar.
    """
    system_prompt = build_system_prompt(dataset, context)
    reply = client.translate(system_prompt, query)
    raw = json.dumps(reply, sort_keys=True) if not isinstance(reply, str) else reply
    try:
        if isinstance(reply, str):
            reply = json.loads(reply)
        action = validate_llm_reply(reply, dataset, synonyms)
    except (
        SchemaViolation,
        UnresolvedMentionError,
        AmbiguousMentionError,
        json.JSONDecodeError,
    ) as err:
        return TranslationResult(
            action=Unknown(),
            provenance=PROVENANCE_LLM,
            raw_model_output=raw,
            confidence_note=f"reply rejected: {err}",
        )
    return TranslationResult(
        action=action,
        provenance=PROVENANCE_LLM,
        raw_model_output=raw,
        confidence_note="validated language-model reply",
    )


def route(
    query: str,
    dataset: Dataset,
    context: ModelSpec | None = None,
    llm_client=None,
    synonyms: dict | None = None,
) -> TranslationResult:
    """Translate a query via the client when configured, else the grammar.

    Transport failures of the client are invisible to the caller: the
    rule grammar answers instead.
    """
    if llm_client is not None:
        try:
            return llm_translate(query, llm_client, dataset, context, synonyms)
        except (ConnectionError, TimeoutError, OSError):
            pass  # transport trouble: deterministic fallback below
    action = rule_grammar_parse(query, dataset, context, synonyms)
    return TranslationResult(
        action=action,
        provenance=PROVENANCE_GRAMMAR,
        confidence_note="matched by rule grammar",
    )
