"""Session state and query execution.

A session owns one dataset, an append-only model history, and a
transcript. Every user query appends exactly one (query, response) pair;
guidance text comes from a fixed template table, never from a language
model, and every number in a response payload is produced by the
fitting, inference, or draw machinery.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import threading
import time
import uuid
from dataclasses import dataclass, field

from .data import CATEGORICAL, CONTINUOUS, Dataset, complete_cases, load_csv
from .engine import FittedModel, compare_models, fit_model, residual_diagnostics
from .errors import (
    DanglingReferenceError,
    MigrationError,
    NoModelError,
    NotInModelError,
    StatQueryError,
    UnknownVariableError,
    UnsupportedChartError,
)
from .formula import GAMMA, ModelSpec, Term, add_term, print_formula, remove_term, validate_against
from .hops import draw_coefficients, predict_curves
from .inference import model_summary, pairwise_contrasts, slope_by_group
from .intent import (
    Action,
    ChangeFamily,
    FitModel,
    InspectResiduals,
    ReportResidualPattern,
    ReviseModel,
    ShowHops,
    TestPairwise,
    TestSlopeByGroup,
    Unknown,
    action_to_json,
    route,
)

SCHEMA_VERSION = 1

#: Fixed guidance templates; the only system prose a session ever emits
#: besides result descriptions and error reports.
GUIDANCE_AFTER_FIT = (
    "You can inspect residuals, explore prediction variability using HOPs, "
    "or try a different distribution."
)
GUIDANCE_SKEW_OFFER = (
    "A skewed distribution may better capture these patterns. "
    "Would you like to try it?"
)
REJECTION_MESSAGE = "Please try a different query."

TRIGGER_AFTER_FIT = "after_fit"
TRIGGER_SKEW_DETECTED = "skew_detected"
TRIGGER_REJECTION = "rejection"

GUIDANCE_TEMPLATES = {
    TRIGGER_AFTER_FIT: GUIDANCE_AFTER_FIT,
    TRIGGER_SKEW_DETECTED: GUIDANCE_SKEW_OFFER,
    TRIGGER_REJECTION: REJECTION_MESSAGE,
}

_AFFIRMATIVES = frozenset(
    {"yes", "yes please", "sure", "ok", "okay", "yeah", "yep", "y",
     "sounds good", "do it", "try it", "go ahead"}
)


def json_safe(value):
    """Replace non-finite floats with None so payloads serialize cleanly."""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


@dataclass
class TranscriptEntry:
    role: str  # "user" | "system"
    text: str
    action: dict | None = None
    result: dict | None = None
    guidance: list = field(default_factory=list)
    timestamp: float = 0.0

    def to_json(self) -> dict:
        return {
            "role": self.role,
            "text": self.text,
            "action": self.action,
            "result": self.result,
            "guidance": list(self.guidance),
            "timestamp": self.timestamp,
        }

    @staticmethod
    def from_json(obj: dict) -> "TranscriptEntry":
        return TranscriptEntry(
            role=obj["role"],
            text=obj["text"],
            action=obj.get("action"),
            result=obj.get("result"),
            guidance=list(obj.get("guidance", [])),
            timestamp=obj.get("timestamp", 0.0),
        )


@dataclass
class Session:
    id: str
    dataset: Dataset | None = None
    dataset_text: str | None = None  # raw CSV, hashed for storage
    synonyms: dict = field(default_factory=dict)
    model_history: list = field(default_factory=list)
    transcript: list = field(default_factory=list)
    pending_offer: Action | None = None
    default_seed: int = 0
    llm_client: object | None = None

    @property
    def active_model(self) -> FittedModel | None:
        return self.model_history[-1] if self.model_history else None

    @property
    def active_index(self) -> int | None:
        return len(self.model_history) - 1 if self.model_history else None

    def require_dataset(self) -> Dataset:
        if self.dataset is None:
            raise StatQueryError("no dataset loaded into this session")
        return self.dataset

    def require_model(self) -> FittedModel:
        if not self.model_history:
            raise NoModelError("no model has been fit in this session")
        return self.model_history[-1]


def new_session(synonyms=None, default_seed=0, llm_client=None) -> Session:
    return Session(
        id=uuid.uuid4().hex,
        synonyms=dict(synonyms or {}),
        default_seed=default_seed,
        llm_client=llm_client,
    )


def attach_dataset(session: Session, csv_text: str | bytes, source_name: str = "", **load_options) -> dict:
    if isinstance(csv_text, bytes):
        csv_text = csv_text.decode("utf-8")
    dataset = load_csv(csv_text, source_name=source_name, **load_options)
    if session.dataset is not None:
        # a new dataset invalidates models fit on the old one; the
        # transcript itself stays append-only
        session.model_history = []
        session.pending_offer = None
    session.dataset = dataset
    session.dataset_text = csv_text
    return {"source_name": source_name, "n_rows": dataset.n_rows,
            "columns": dataset.schema_summary()}


# -- query handling -----------------------------------------------------------

def _fit_and_record(session: Session, spec: ModelSpec):
    dataset = session.require_dataset()
    validate_against(spec, dataset)
    model = fit_model(spec, dataset)
    previous = session.active_model
    session.model_history.append(model)
    comparison = None
    if previous is not None:
        try:
            comparison = compare_models(previous, model).to_json()
        except StatQueryError:
            comparison = None
    return model, comparison


def _describe_fit(model: FittedModel, comparison) -> tuple[str, dict]:
    summary = model_summary(model)
    text = f"Fitted {summary['formula']} with the {summary['family']} family."
    payload = {"model": summary}
    if comparison is not None:
        payload["comparison"] = comparison
        if comparison["delta_aic"] is not None:
            direction = (
                "improves on" if comparison["preferred"] == "b" else "does not improve on"
            )
            text += f" AIC {direction} the previous model."
    return text, payload


def _dispatch(session: Session, action: Action) -> tuple[str, dict, list[str]]:
    """Execute a routed action; returns (text, payload, guidance)."""
    dataset = session.require_dataset()

    if isinstance(action, Unknown):
        return REJECTION_MESSAGE, {}, []

    if isinstance(action, FitModel):
        model, comparison = _fit_and_record(session, action.spec)
        text, payload = _describe_fit(model, comparison)
        return text, payload, [GUIDANCE_AFTER_FIT]

    if isinstance(action, ReviseModel):
        active = session.require_model()
        spec = active.spec
        for name in action.add:
            dataset.column(name)
            spec = add_term(spec, name)
        for name in action.remove:
            spec = remove_term(spec, name)
        if spec == active.spec:
            return "The model already has those terms.", {}, []
        model, comparison = _fit_and_record(session, spec)
        text, payload = _describe_fit(model, comparison)
        return text, payload, [GUIDANCE_AFTER_FIT]

    if isinstance(action, ChangeFamily):
        active = session.require_model()
        spec = active.spec.with_family(action.family)
        model, comparison = _fit_and_record(session, spec)
        text, payload = _describe_fit(model, comparison)
        return text, payload, [GUIDANCE_AFTER_FIT]

    if isinstance(action, TestPairwise):
        model, note = _model_for_pairwise(session, action)
        table = pairwise_contrasts(model, action.group, dataset)
        text = (
            f"Pairwise comparisons of {action.response} between levels of "
            f"{action.group} ({table.adjustment} adjustment)."
        )
        if note:
            text = note + " " + text
        return text, {"contrasts": table.to_json()}, []

    if isinstance(action, TestSlopeByGroup):
        basis = session.active_model
        if basis is not None and basis.spec.response != action.response:
            basis = None
        comparison = slope_by_group(
            basis if basis is not None else ModelSpec(response=action.response, terms=()),
            dataset,
            action.response,
            action.slope_var,
            action.group,
        )
        note = ""
        if comparison.refitted:
            session.model_history.append(comparison.model)
            note = (
                f"Model updated to {print_formula(comparison.model.spec)} to "
                f"estimate the interaction. "
            )
        text = (
            note
            + f"Slope of {action.slope_var} on {action.response} compared "
            f"between levels of {action.group}."
        )
        return text, {"slopes": comparison.to_json(),
                      "model": model_summary(comparison.model)}, []

    if isinstance(action, InspectResiduals):
        model = session.require_model()
        diag = residual_diagnostics(model)
        payload = _views_payload(model, diag)
        return "Residuals plotted against fitted values.", payload, []

    if isinstance(action, ReportResidualPattern):
        model = session.require_model()
        diag = residual_diagnostics(model)
        payload = {"diagnostics": diag.to_json()}
        if diag.skew_flag:
            session.pending_offer = ChangeFamily(family=GAMMA)
            return (
                "The diagnostics agree: the residual distribution is skewed.",
                payload,
                [GUIDANCE_SKEW_OFFER],
            )
        return (
            "The diagnostics do not flag skewness in the residuals.",
            payload,
            [],
        )

    if isinstance(action, ShowHops):
        model = session.require_model()
        drawset = draw_coefficients(model, action.draws, seed=session.default_seed)
        payload = {"hops": drawset.to_json()}
        focus = next(iter(model.design.continuous_vars), None)
        if focus is not None:
            curves = predict_curves(drawset, dataset, focus)
            payload["curves"] = curves.to_json()
            text = (
                f"{action.draws} plausible fits drawn over {focus} "
                f"(seed {drawset.seed})."
            )
        else:
            text = (
                f"{action.draws} coefficient draws sampled "
                f"(seed {drawset.seed}); no continuous predictor to animate."
            )
        return text, payload, []

    raise StatQueryError(f"unhandled action {action!r}")


def _model_for_pairwise(session: Session, action: TestPairwise):
    """Find or build a model containing the group as a main effect."""
    dataset = session.require_dataset()
    active = session.active_model
    group_term = Term((action.group,))
    if (
        active is not None
        and active.spec.response == action.response
        and active.spec.has_term(group_term)
    ):
        return active, ""
    if active is not None and active.spec.response == action.response:
        spec = add_term(active.spec, action.group)
        model, _ = _fit_and_record(session, spec)
        return model, (
            f"Model updated to {print_formula(spec)} so the contrast is "
            f"covariate-adjusted."
        )
    spec = ModelSpec(response=action.response, terms=(group_term,))
    model, _ = _fit_and_record(session, spec)
    return model, f"Fitted {print_formula(spec)} for this test."


def handle_query(session: Session, text: str) -> TranscriptEntry:
    """Route and execute one user query, appending a transcript pair."""
    session.require_dataset()
    user_entry = TranscriptEntry(role="user", text=text, timestamp=time.time())
    session.transcript.append(user_entry)

    normalized = text.strip().lower().rstrip(".!")
    if normalized in _AFFIRMATIVES and session.pending_offer is not None:
        action = session.pending_offer
        session.pending_offer = None
        provenance = "pending_offer"
        raw_output = ""
    else:
        if normalized in _AFFIRMATIVES:
            session.pending_offer = None
        context = session.active_model.spec if session.active_model else None
        result = route(
            text,
            session.dataset,
            context=context,
            llm_client=session.llm_client,
            synonyms=session.synonyms,
        )
        action = result.action
        provenance = result.provenance
        raw_output = result.raw_model_output
        if not isinstance(action, Unknown):
            session.pending_offer = None

    try:
        reply_text, payload, guidance = _dispatch(session, action)
    except StatQueryError as err:
        reply_text = f"{type(err).__name__}: {err}"
        payload, guidance = {}, []

    entry = TranscriptEntry(
        role="system",
        text=reply_text,
        action={"provenance": provenance, **action_to_json(action)}
        | ({"raw_model_output": raw_output} if raw_output else {}),
        result=json_safe(payload),
        guidance=guidance,
        timestamp=time.time(),
    )
    session.transcript.append(entry)
    return entry


# -- chart data ----------------------------------------------------------------

def _sturges_bins(n: int) -> int:
    return max(1, int(math.floor(math.log2(n))) + 1)


def chart_data(session: Session, variables: list[str], mode: str = "aggregated") -> dict:
    """Chart-ready payload per the selection rule table.

    One continuous variable: histogram. One categorical: level counts.
    Two continuous: scatter. Continuous plus categorical: per-level means,
    or raw points keyed by level when mode="points". Point payloads carry
    row indices for brushing and linking.
    """
    dataset = session.require_dataset()
    if not 1 <= len(variables) <= 2:
        raise UnsupportedChartError("select one or two variables")
    cols = [dataset.column(name) for name in variables]
    rows = complete_cases(dataset, variables)

    if len(cols) == 1:
        col = cols[0]
        values = [col.values[i] for i in rows]
        if col.kind == CONTINUOUS:
            n = len(values)
            bins = _sturges_bins(n)
            lo, hi = min(values), max(values)
            if lo == hi:
                edges = [lo, hi]
                counts = [n]
                bin_rows = [list(rows)]
            else:
                width = (hi - lo) / bins
                edges = [lo + k * width for k in range(bins + 1)]
                counts = [0] * bins
                bin_rows = [[] for _ in range(bins)]
                for i in rows:
                    k = min(int((col.values[i] - lo) / width), bins - 1)
                    counts[k] += 1
                    bin_rows[k].append(i)
            return {
                "chart": "histogram",
                "variable": col.name,
                "bin_edges": edges,
                "counts": counts,
                "bin_rows": bin_rows,
                "n": n,
            }
        counts = {level: 0 for level in col.levels}
        rows_by_level = {level: [] for level in col.levels}
        for i in rows:
            counts[col.values[i]] += 1
            rows_by_level[col.values[i]].append(i)
        return {
            "chart": "bar_counts",
            "variable": col.name,
            "levels": list(col.levels),
            "counts": [counts[level] for level in col.levels],
            "rows_by_level": rows_by_level,
            "n": len(values),
        }

    kinds = {col.kind for col in cols}
    if kinds == {CONTINUOUS}:
        x, y = cols
        return {
            "chart": "scatter",
            "x": x.name,
            "y": y.name,
            "points": [
                {"row": i, "x": x.values[i], "y": y.values[i]} for i in rows
            ],
        }
    if kinds == {CATEGORICAL}:
        raise UnsupportedChartError(
            "no chart rule exists for two categorical variables"
        )

    cat = cols[0] if cols[0].kind == CATEGORICAL else cols[1]
    cont = cols[0] if cols[0].kind == CONTINUOUS else cols[1]
    if mode == "points":
        return {
            "chart": "group_points",
            "group": cat.name,
            "value": cont.name,
            "levels": list(cat.levels),
            "points": [
                {"row": i, "level": cat.values[i], "value": cont.values[i]}
                for i in rows
            ],
        }
    sums = {level: 0.0 for level in cat.levels}
    counts = {level: 0 for level in cat.levels}
    rows_by_level = {level: [] for level in cat.levels}
    for i in rows:
        sums[cat.values[i]] += cont.values[i]
        counts[cat.values[i]] += 1
        rows_by_level[cat.values[i]].append(i)
    observed = [level for level in cat.levels if counts[level] > 0]
    return {
        "chart": "group_means",
        "group": cat.name,
        "value": cont.name,
        "levels": observed,
        "means": [sums[level] / counts[level] for level in observed],
        "counts": [counts[level] for level in observed],
        "rows_by_level": {level: rows_by_level[level] for level in observed},
    }


def model_views(session: Session) -> dict:
    """Predicted-vs-observed and residual-vs-fitted payloads."""
    model = session.require_model()
    diag = residual_diagnostics(model)
    return json_safe(_views_payload(model, diag))


def _views_payload(model: FittedModel, diag) -> dict:
    observed = model.y
    return {
        "predicted_vs_observed": [
            {"row": r, "fitted": float(f), "observed": float(o)}
            for r, f, o in zip(model.row_index, model.fitted, observed)
        ],
        "residuals_vs_fitted": [
            {"row": r, "fitted": float(f), "residual": float(e)}
            for r, f, e in zip(model.row_index, model.fitted, model.residuals_std)
        ],
        "diagnostics": diag.to_json(),
        "formula": print_formula(model.spec),
        "family": model.spec.family,
    }


# -- persistence ----------------------------------------------------------------

class SessionStore:
    """Disk-backed registry of sessions, one JSON document each.

    Datasets are stored once, keyed by content hash; sessions reference
    them by hash so a restore refits the recorded model specs on exactly
    the bytes that produced the originals.
    """

    def __init__(self, data_dir: str, synonyms=None, default_seed: int = 0, llm_client=None):
        self.data_dir = data_dir
        self.synonyms = dict(synonyms or {})
        self.default_seed = default_seed
        self.llm_client = llm_client
        self.sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        os.makedirs(os.path.join(data_dir, "sessions"), exist_ok=True)
        os.makedirs(os.path.join(data_dir, "datasets"), exist_ok=True)

    def lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def create(self) -> Session:
        session = new_session(
            synonyms=self.synonyms,
            default_seed=self.default_seed,
            llm_client=self.llm_client,
        )
        self.sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        if session_id in self.sessions:
            return self.sessions[session_id]
        session = self.restore(session_id)
        self.sessions[session_id] = session
        return session

    def _session_path(self, session_id: str) -> str:
        return os.path.join(self.data_dir, "sessions", f"{session_id}.json")

    def _dataset_path(self, digest: str) -> str:
        return os.path.join(self.data_dir, "datasets", f"{digest}.csv")

    def persist(self, session: Session) -> str:
        """Write the session document; returns its path."""
        record = {
            "schema_version": SCHEMA_VERSION,
            "id": session.id,
            "default_seed": session.default_seed,
            "synonyms": session.synonyms,
            "transcript": [e.to_json() for e in session.transcript],
            "model_specs": [m.spec.to_json() for m in session.model_history],
            "pending_offer": (
                action_to_json(session.pending_offer)
                if session.pending_offer is not None
                else None
            ),
            "dataset": None,
        }
        if session.dataset_text is not None:
            digest = hashlib.sha256(session.dataset_text.encode("utf-8")).hexdigest()
            dataset_path = self._dataset_path(digest)
            if not os.path.exists(dataset_path):
                with open(dataset_path, "w", encoding="utf-8") as fh:
                    fh.write(session.dataset_text)
            record["dataset"] = {
                "hash": digest,
                "source_name": session.dataset.source_name if session.dataset else "",
            }
        path = self._session_path(session.id)
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(record, fh, indent=1, sort_keys=True)
        os.replace(tmp, path)
        return path

    def restore(self, session_id: str) -> Session:
        """Rebuild a session from disk; fits are replayed deterministically."""
        path = self._session_path(session_id)
        if not os.path.exists(path):
            raise MigrationError(f"no stored session {session_id!r}")
        try:
            with open(path, encoding="utf-8") as fh:
                record = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise MigrationError(f"stored session unreadable: {err}") from None
        if record.get("schema_version") != SCHEMA_VERSION:
            raise MigrationError(
                f"stored session has schema_version "
                f"{record.get('schema_version')!r}, expected {SCHEMA_VERSION}"
            )

        session = Session(
            id=record["id"],
            synonyms=record.get("synonyms", {}),
            default_seed=record.get("default_seed", 0),
            llm_client=self.llm_client,
        )
        ref = record.get("dataset")
        if ref is not None:
            dataset_path = self._dataset_path(ref["hash"])
            if not os.path.exists(dataset_path):
                raise DanglingReferenceError(
                    f"dataset {ref['hash']} referenced by session "
                    f"{session_id!r} is missing"
                )
            with open(dataset_path, encoding="utf-8") as fh:
                text = fh.read()
            attach_dataset(session, text, source_name=ref.get("source_name", ""))
        session.transcript = [
            TranscriptEntry.from_json(e) for e in record.get("transcript", [])
        ]
        for spec_json in record.get("model_specs", []):
            spec = ModelSpec.from_json(spec_json)
            session.model_history.append(fit_model(spec, session.require_dataset()))
        offer = record.get("pending_offer")
        if offer is not None:
            from .intent import action_from_json

            session.pending_offer = action_from_json(offer)
        return session
