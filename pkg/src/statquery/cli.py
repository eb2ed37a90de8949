"""Command-line entry point: serve the HTTP API, run an offline query
REPL against a dataset, or replay a transcript of query/expected-action
pairs as a regression gate.

Configuration precedence: built-in defaults, then a JSON config file,
then STATQUERY_* environment variables, then command-line flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace

from .data import load_csv
from .errors import StatQueryError
from .intent import HttpLlmClient, action_from_json, action_to_json, route
from .session import (
    SessionStore,
    attach_dataset,
    handle_query,
    new_session,
)

ENV_PREFIX = "STATQUERY"


@dataclass(frozen=True)
class Config:
    listen: str = "127.0.0.1:8000"
    data_dir: str = "./statquery-data"
    synonyms_path: str | None = None
    default_seed: int = 0
    offline: bool = False
    llm_endpoint_env: str = "STATQUERY_LLM_ENDPOINT"
    llm_credential_env: str = "STATQUERY_LLM_API_KEY"

    def synonyms(self) -> dict:
        if not self.synonyms_path:
            return {}
        with open(self.synonyms_path, encoding="utf-8") as fh:
            return json.load(fh)

    def llm_client(self):
        """The translation client, or None when offline or unconfigured.

        A missing credential simply means rule-grammar-only operation,
        never an error.
        """
        if self.offline:
            return None
        endpoint = os.environ.get(self.llm_endpoint_env)
        credential = os.environ.get(self.llm_credential_env)
        if not endpoint or not credential:
            return None
        return HttpLlmClient(endpoint=endpoint, credential=credential)

    def describe(self) -> str:
        client = self.llm_client()
        mode = (
            "language-model translation with rule-grammar fallback"
            if client is not None
            else "offline (rule grammar only)"
        )
        lines = [
            f"listen        {self.listen}",
            f"data dir      {self.data_dir}",
            f"synonyms      {self.synonyms_path or '(none)'}",
            f"default seed  {self.default_seed}",
            f"translation   {mode}",
        ]
        if client is not None:
            lines.append(f"llm endpoint  {client.endpoint}")
            lines.append("llm credential  <redacted>")
        return "\n".join(lines)


def load_config(path: str | None) -> Config:
    config = Config()
    if path:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        config = replace(
            config,
            **{k: v for k, v in raw.items() if k in Config.__dataclass_fields__},
        )
    env = os.environ
    if f"{ENV_PREFIX}_LISTEN" in env:
        config = replace(config, listen=env[f"{ENV_PREFIX}_LISTEN"])
    if f"{ENV_PREFIX}_DATA_DIR" in env:
        config = replace(config, data_dir=env[f"{ENV_PREFIX}_DATA_DIR"])
    if f"{ENV_PREFIX}_SYNONYMS" in env:
        config = replace(config, synonyms_path=env[f"{ENV_PREFIX}_SYNONYMS"])
    if f"{ENV_PREFIX}_SEED" in env:
        config = replace(config, default_seed=int(env[f"{ENV_PREFIX}_SEED"]))
    if f"{ENV_PREFIX}_OFFLINE" in env:
        config = replace(
            config, offline=env[f"{ENV_PREFIX}_OFFLINE"].lower() in ("1", "true", "yes")
        )
    return config


def apply_flags(config: Config, args: argparse.Namespace) -> Config:
    if getattr(args, "listen", None):
        config = replace(config, listen=args.listen)
    if getattr(args, "data_dir", None):
        config = replace(config, data_dir=args.data_dir)
    if getattr(args, "synonyms", None):
        config = replace(config, synonyms_path=args.synonyms)
    if getattr(args, "seed", None) is not None:
        config = replace(config, default_seed=args.seed)
    if getattr(args, "offline", False):
        config = replace(config, offline=True)
    return config


def _build_store(config: Config) -> SessionStore:
    return SessionStore(
        data_dir=config.data_dir,
        synonyms=config.synonyms(),
        default_seed=config.default_seed,
        llm_client=config.llm_client(),
    )


def cmd_serve(config: Config) -> int:
    import uvicorn

    from .server import create_app

    try:
        os.makedirs(config.data_dir, exist_ok=True)
        probe = os.path.join(config.data_dir, ".writable")
        with open(probe, "w") as fh:
            fh.write("ok")
        os.remove(probe)
    except OSError as err:
        print(f"data directory {config.data_dir!r} is not writable: {err}",
              file=sys.stderr)
        return 1

    host, _, port = config.listen.rpartition(":")
    print(config.describe())
    app = create_app(_build_store(config))
    try:
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="info")
    except (OSError, ValueError, SystemExit) as err:
        print(f"server failed to start: {err}", file=sys.stderr)
        return 1
    return 0


def _format_table(rows: list[dict], columns: list[str]) -> str:
    def fmt(value):
        if isinstance(value, float):
            return f"{value:.6g}"
        return "" if value is None else str(value)

    table = [[fmt(row.get(c)) for c in columns] for row in rows]
    widths = [
        max(len(c), *(len(r[i]) for r in table)) if table else len(c)
        for i, c in enumerate(columns)
    ]
    out = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    for r in table:
        out.append("  ".join(v.ljust(w) for v, w in zip(r, widths)))
    return "\n".join(out)


def _print_entry(entry) -> None:
    print(entry.text)
    result = entry.result or {}
    if "model" in result:
        print(_format_table(result["model"]["coefficients"],
                            ["name", "estimate", "se", "t", "p"]))
        print(f"AIC: {result['model']['aic']}")
    if "contrasts" in result:
        print(_format_table(result["contrasts"]["rows"],
                            ["label", "estimate", "se", "t", "df", "p_raw", "p_adj"]))
    if "slopes" in result:
        print(_format_table(result["slopes"]["rows"],
                            ["level", "slope", "se", "t", "df", "p"]))
        it = result["slopes"]["interaction"]
        print(f"interaction {it['kind']} = {it['statistic']:.6g}, p = {it['p']:.6g}")
    if "diagnostics" in result:
        d = result["diagnostics"]
        skew = d.get("skewness")
        skew_text = f"{skew:.4g}" if isinstance(skew, float) else "undefined"
        print(f"residual skewness: {skew_text} (flag: {d.get('skew_flag')})")
    for line in entry.guidance:
        print(f">> {line}")


def cmd_repl(config: Config, dataset_path: str) -> int:
    try:
        with open(dataset_path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        print(f"cannot read dataset: {err}", file=sys.stderr)
        return 1
    session = new_session(
        synonyms=config.synonyms(),
        default_seed=config.default_seed,
        llm_client=config.llm_client(),
    )
    try:
        attach_dataset(session, text, source_name=os.path.basename(dataset_path))
    except StatQueryError as err:
        print(f"cannot load dataset: {type(err).__name__}: {err}", file=sys.stderr)
        return 1
    mode = "rule grammar only" if session.llm_client is None else "llm + fallback"
    print(f"loaded {dataset_path} ({session.dataset.n_rows} rows); {mode}")
    print('type a query, or ":quit" to exit')
    while True:
        try:
            line = input("query> ")
        except EOFError:
            print()
            return 0
        line = line.strip()
        if not line:
            continue
        if line == ":quit":
            return 0
        entry = handle_query(session, line)
        _print_entry(entry)


def read_transcript_file(path: str) -> list[tuple[str, dict]]:
    """Parse QUERY<TAB>EXPECTED_ACTION_JSON lines; '#' starts a comment."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if "\t" not in line:
                raise ValueError(
                    f"{path}:{lineno}: expected QUERY<TAB>EXPECTED_ACTION_JSON"
                )
            query, _, expected = line.partition("\t")
            try:
                obj = json.loads(expected)
            except json.JSONDecodeError as err:
                raise ValueError(f"{path}:{lineno}: bad JSON: {err}") from None
            pairs.append((query, obj))
    return pairs


def cmd_replay(config: Config, transcript_path: str, dataset_path: str) -> int:
    try:
        pairs = read_transcript_file(transcript_path)
    except (OSError, ValueError) as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 2
    try:
        with open(dataset_path, encoding="utf-8") as fh:
            dataset = load_csv(fh.read(), source_name=dataset_path)
    except (OSError, StatQueryError) as err:
        print(f"cannot load dataset: {err}", file=sys.stderr)
        return 2
    if not pairs:
        print("warning: empty transcript; nothing to replay")
        return 0

    synonyms = config.synonyms()
    failures = 0
    context = None
    for i, (query, expected_json) in enumerate(pairs, start=1):
        expected = action_from_json(expected_json)
        # replay is deliberately offline: the rule grammar only
        result = route(query, dataset, context=context, synonyms=synonyms)
        got = result.action
        if got == expected:
            print(f"PASS {i}: {query}")
        else:
            failures += 1
            print(f"FAIL {i}: {query}")
            print(f"  expected: {json.dumps(action_to_json(expected), sort_keys=True)}")
            print(f"  got:      {json.dumps(action_to_json(got), sort_keys=True)}")
        if got.type == "fit_model":
            context = got.spec
    print(f"{len(pairs) - failures}/{len(pairs)} matched")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="statquery",
        description="natural-language statistical modeling workbench",
    )
    parser.add_argument("--config", help="JSON config file")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--listen", help="host:port for the HTTP API")
        p.add_argument("--data-dir", dest="data_dir", help="session storage directory")
        p.add_argument("--synonyms", help="JSON file mapping mention phrases to columns")
        p.add_argument("--seed", type=int, help="default seed for draw-based payloads")
        p.add_argument("--offline", action="store_true",
                       help="disable the language-model client")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    common(p_serve)

    p_repl = sub.add_parser("repl", help="interactive offline query loop")
    common(p_repl)
    p_repl.add_argument("dataset", help="CSV file to analyze")

    p_replay = sub.add_parser(
        "replay", help="replay a query/expected-action transcript"
    )
    common(p_replay)
    p_replay.add_argument("transcript", help="QUERY<TAB>ACTION_JSON file")
    p_replay.add_argument("dataset", help="CSV file the queries refer to")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = apply_flags(load_config(args.config), args)
    except (OSError, ValueError, json.JSONDecodeError) as err:
        print(f"bad configuration: {err}", file=sys.stderr)
        return 2
    if args.command == "serve":
        return cmd_serve(config)
    if args.command == "repl":
        return cmd_repl(config, args.dataset)
    if args.command == "replay":
        return cmd_replay(config, args.transcript, args.dataset)
    return 2


if __name__ == "__main__":
    sys.exit(main())
