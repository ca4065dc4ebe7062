"""Command-line entry points.

Every subcommand writes ``report.json`` and ``report.md`` under
``<runs-dir>/<run_id>/``. The run id is derived from the serialized run
configuration, so an identical invocation lands in the same directory and,
given the same cache, produces byte-identical reports.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import zlib
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .cache import CACHE_ENV, ProviderCache, ProviderError, canonical_json
from .providers import (
    API_BASE_ENV,
    CachedEmbedder,
    CachedProvider,
    ChatCompletionsProvider,
    HashingEmbedder,
    HTTPEmbedder,
)

log = logging.getLogger("mooddx")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class ConfigError(ValueError):
    """Bad flags, missing inputs or mismatched schemas: exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ConfigError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    command: str
    provider: str | None = None
    model: str | None = None
    api_base_env: str = API_BASE_ENV
    embedder: str = "hashing"
    seed: int = 0
    step_cap: int = 8
    max_rounds: int = 3
    k: int = 5
    ablation: dict | None = None
    paths: dict = field(default_factory=dict)
    jobs: int = 1
    options: dict = field(default_factory=dict)
    code_version: str = __version__

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def run_id(self) -> str:
        digest = hashlib.sha256(canonical_json(self.to_dict()).encode("utf-8")).hexdigest()[:12]
        return f"{self.command}-{digest}"


def substream_seed(seed: int, name: str) -> int:
    """Named, independent sub-stream of the run seed."""
    return int(np.random.SeedSequence([seed, zlib.crc32(name.encode("utf-8"))]).generate_state(1)[0])


def _require_file(path: str | None, flag: str) -> Path:
    if path is None:
        raise ConfigError(f"{flag} is required")
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{flag}: no such file {path!r}")
    return p


def _run_dir(args, cfg: RunConfig) -> Path:
    out = Path(args.runs_dir) / cfg.run_id
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, obj: Any) -> None:
    path.write_text(json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def _emit(out: Path, cfg: RunConfig, body: dict, markdown: str) -> None:
    report = {"config": cfg.to_dict(), "run_id": cfg.run_id, "code_version": __version__, **body}
    _write_json(out / "report.json", report)
    header = f"# {cfg.command} ({cfg.run_id})\n\ncode version {__version__}\n\n"
    (out / "report.md").write_text(header + markdown, encoding="utf-8")
    print(markdown, end="" if markdown.endswith("\n") else "\n")
    print(f"wrote {out}")


# ---------------------------------------------------------------- providers


def _cache(args) -> ProviderCache:
    if args.cache_dir:
        return ProviderCache(args.cache_dir)
    if args.provider == "http":
        return ProviderCache()
    return ProviderCache.memory()


def _chat_provider(args, cache: ProviderCache):
    if args.provider == "scripted":
        from .scripted import ScriptedPolicy

        policy = ScriptedPolicy.load(_require_file(args.script, "--script")) if args.script else ScriptedPolicy()
        inner = policy.provider()
    elif args.provider == "http":
        try:
            inner = ChatCompletionsProvider(model=args.model)
        except ProviderError as exc:
            raise ConfigError(str(exc)) from None
    else:
        raise ConfigError("--provider must be scripted or http")
    return CachedProvider(inner, cache)


def _embedder(args, cache: ProviderCache):
    if args.embedder == "hashing":
        return HashingEmbedder()
    try:
        return CachedEmbedder(HTTPEmbedder(model=args.embed_model), cache)
    except ProviderError as exc:
        raise ConfigError(str(exc)) from None


def _selected(args):
    from .scales import SelectedItemSet, default_selected_items

    if getattr(args, "selection", None):
        return SelectedItemSet.load(_require_file(args.selection, "--selection"))
    return default_selected_items()


def _kb(args):
    from .knowledge_base import default_kb, load_kb

    if getattr(args, "kb", None):
        return load_kb(_require_file(args.kb, "--kb"))
    return default_kb()


# ---------------------------------------------------------------- subcommands


def cmd_ingest(args, cfg: RunConfig) -> int:
    from .corpus import label_counts, load_cases, save_cases
    from .records import process_record

    cases = load_cases(_require_file(args.cases, "--cases"), args.format)
    if args.process:
        provider = _chat_provider(args, _cache(args)) if args.provider else None
        cases = [process_record(c, provider, args.relativize_with_provider) for c in cases]
    out = _run_dir(args, cfg)
    save_cases(cases, out / "cases.jsonl")
    counts = dict(sorted(label_counts(cases).items()))
    stages: dict[str, int] = {}
    for c in cases:
        stages[c.record_stage] = stages.get(c.record_stage, 0) + 1
    md = "| Label | Cases |\n|---|---|\n" + "".join(f"| {k} | {v} |\n" for k, v in counts.items())
    md += "\n| Record stage | Cases |\n|---|---|\n" + "".join(f"| {k} | {v} |\n" for k, v in sorted(stages.items()))
    _emit(out, cfg, {"n_cases": len(cases), "labels": counts, "record_stages": dict(sorted(stages.items()))}, md)
    return EXIT_OK


def cmd_build_kb(args, cfg: RunConfig) -> int:
    from .knowledge_base import KnowledgeBase, default_kb, export_for_review, extract_diagnostic, load_kb, split_differential

    if args.source:
        provider = _chat_provider(args, _cache(args))
        entries = []
        with open(_require_file(args.source, "--source"), encoding="utf-8") as f:
            for n, line in enumerate(f, 1):
                if not line.strip():
                    continue
                obj = json.loads(line)
                kind = obj.get("kind", "diagnostic")
                if kind == "diagnostic":
                    entries.extend(extract_diagnostic(obj["text"], obj["disorder_name"], provider, obj.get("disorder_class"),
                                                      source_note=obj.get("source_note", f"line {n}")))
                elif kind == "differential":
                    entries.extend(split_differential(obj["text"], provider, obj.get("source_note", f"line {n}")))
                else:
                    raise ConfigError(f"--source line {n}: kind must be diagnostic or differential")
        kb = KnowledgeBase(entries)
    elif args.from_review:
        kb = load_kb(_require_file(args.from_review, "--from-review"))
    else:
        kb = default_kb()
    out = _run_dir(args, cfg)
    kb.save(out / "kb.json")
    export_for_review(kb, out / "kb_review.tsv")
    counts = dict(sorted(kb.class_counts().items()))
    missing = kb.missing_mood_classes()
    md = "| Disorder class | Entries |\n|---|---|\n" + "".join(f"| {k} | {v} |\n" for k, v in counts.items())
    if missing:
        md += f"\nMissing mood classes: {', '.join(missing)}\n"
    _emit(out, cfg, {"n_entries": len(kb), "class_counts": counts, "missing_mood_classes": list(missing)}, md)
    return EXIT_OK


def _scale_embedder(args, selected, embedder):
    from .retrieval import NumericScaleEmbedder

    return NumericScaleEmbedder(selected) if args.scale_embedder == "numeric" else embedder


def cmd_build_stores(args, cfg: RunConfig) -> int:
    from .corpus import load_cases
    from .retrieval import build_kb_index, build_record_store, build_scale_store

    history = load_cases(_require_file(args.history, "--history"))
    cache = _cache(args)
    embedder = _embedder(args, cache)
    selected = _selected(args)
    kb = _kb(args)
    out = _run_dir(args, cfg)
    sizes = {}
    stores = {"kb_index": build_kb_index(kb, embedder),
              "record_store_structured": build_record_store(history, embedder, "structured"),
              "record_store_unstructured": build_record_store(history, embedder, "unstructured"),
              "scale_store": build_scale_store(history, _scale_embedder(args, selected, embedder), selected)}
    for name, store in stores.items():
        store.save(out / f"{name}.jsonl")
        sizes[name] = len(store)
    md = "| Store | Rows | Embedder |\n|---|---|---|\n" + "".join(
        f"| {n} | {len(s)} | {s.embedder_id} |\n" for n, s in stores.items())
    _emit(out, cfg, {"stores": sizes, "cache": cache.stats.to_dict()}, md)
    return EXIT_OK


def cmd_select_items(args, cfg: RunConfig) -> int:
    from .scales import CorrelationTable, default_selection_config, select_items
    from .scales.selection import GROUP_TITLES, default_correlations

    base = default_selection_config()
    table = CorrelationTable.read_csv(_require_file(args.correlations, "--correlations")) if args.correlations else default_correlations()
    fraction = args.fraction if args.fraction is not None else base.fraction
    manual = tuple(args.manual) if args.manual is not None else base.manual
    pop = args.population_size if args.population_size is not None else (None if args.correlations else base.population_size)
    sel = select_items(table, fraction, manual, base.groups, population_size=pop, use_abs=args.use_abs)
    out = _run_dir(args, cfg)
    sel.save(out / "selection.json")
    md = f"Threshold: {sel.threshold:.4f}; {len(sel.items)} items\n\n| Group | Items |\n|---|---|\n"
    for group, items in sel.by_group().items():
        md += f"| {GROUP_TITLES.get(group, group)} | {', '.join(items)} |\n"
    _emit(out, cfg, {"selection": sel.to_dict()}, md)
    return EXIT_OK


def _resources(args, cache, setting):
    from .agents import build_resources
    from .corpus import load_cases
    from .retrieval import VectorStore, build_record_store, build_scale_store

    embedder = _embedder(args, cache)
    selected = _selected(args)
    res = build_resources(_kb(args), embedder, selected, k=args.k, step_cap=args.step_cap)
    res = setting.apply(res)
    scale_embedder = _scale_embedder(args, selected, embedder)
    res.scale_embedder = scale_embedder
    if args.stores:
        root = Path(args.stores)
        if not root.is_dir():
            raise ConfigError(f"--stores: no such directory {args.stores!r}")
        res.record_store = VectorStore.load(_require_file(str(root / f"record_store_{res.record_format_agent}.jsonl"), "--stores"),
                                            embedder.embedder_id)
        res.scale_store = VectorStore.load(_require_file(str(root / "scale_store.jsonl"), "--stores"), scale_embedder.embedder_id)
    elif args.history:
        history = load_cases(_require_file(args.history, "--history"))
        res.record_store = build_record_store(history, embedder, res.record_format_agent)
        res.scale_store = build_scale_store(history, scale_embedder, selected, res.catalog)
    return res


def _run_methods(args, cfg: RunConfig, methods: Sequence[str], setting) -> int:
    from .corpus import load_cases
    from .diag_eval import markdown_table, evaluate_run
    from .retrieval import audit_disjoint

    cases = load_cases(_require_file(args.cases, "--cases"), args.format)
    cache = _cache(args)
    res = _resources(args, cache, setting)
    ids = [c.case_id for c in cases]
    for store in (res.record_store, res.scale_store):
        if store is not None:
            audit_disjoint(store, ids)
    provider = _chat_provider(args, cache)
    out = _run_dir(args, cfg)
    reports = []
    for method in methods:
        sub = out / method if len(methods) > 1 else out
        reports.append(evaluate_run(
            method, cases, res, provider, max_rounds=args.max_rounds, failure_policy=args.failure_policy,
            angel_failure_policy=args.angel_failure_policy, debate_dir=sub / "debates" if method == "multi" else None,
            transcript_dir=sub / "transcripts", jobs=args.jobs,
            metadata={"retrieval_store_rows": {"records": len(res.record_store) if res.record_store else 0,
                                               "scales": len(res.scale_store) if res.scale_store else 0}}))
    body = {"reports": [r.to_dict() for r in reports], "cache": cache.stats.to_dict()}
    _emit(out, cfg, body, markdown_table(reports))
    return EXIT_OK


def _setting_for(args):
    from .diag_eval import ABLATION_SETTINGS, AblationSetting

    if getattr(args, "setting", None) is not None:
        return ABLATION_SETTINGS[args.setting]
    return AblationSetting()


def cmd_diagnose(args, cfg: RunConfig) -> int:
    return _run_methods(args, cfg, [args.method], _setting_for(args))


def cmd_evaluate(args, cfg: RunConfig) -> int:
    return _run_methods(args, cfg, args.methods, _setting_for(args))


def cmd_ablate(args, cfg: RunConfig) -> int:
    return _run_methods(args, cfg, [args.method], _setting_for(args))


def cmd_synthesize(args, cfg: RunConfig) -> int:
    from .moodsyn import FeatureSchema, default_schema, fit, postprocess, read_table, sample, to_json_rows, validate, write_table

    schema = FeatureSchema.load(_require_file(args.schema, "--schema")) if args.schema else default_schema()
    real = read_table(_require_file(args.real, "--real"), schema)
    model = fit(real, schema, seed=substream_seed(args.seed, "fit"))
    raw = sample(model, args.n, args.ratio, seed=substream_seed(args.seed, "sample"))
    result = postprocess(raw, schema)
    violations = validate(result.table, schema)
    out = _run_dir(args, cfg)
    write_table(result.table, out / "synthetic.csv")
    _write_json(out / "synthetic.json", to_json_rows(result.table, schema))
    schema.save(out / "schema.json")
    pos = int(result.table[schema.label].sum())
    body = {"postprocess": result.report(), "violations": len(violations), "class_counts": {"1": pos, "0": len(result.table) - pos},
            "fit_ratio": model.priors[1]}
    md = ("| Quantity | Value |\n|---|---|\n"
          f"| Rows sampled | {args.n} |\n| Rows kept | {len(result.table)} |\n| Rows dropped | {result.dropped} |\n"
          f"| Totals raised | {result.repaired} |\n| Schema violations | {len(violations)} |\n"
          f"| Positive / negative | {pos} / {len(result.table) - pos} |\n")
    _emit(out, cfg, body, md)
    return EXIT_OK if not violations else EXIT_RUNTIME


def cmd_syneval(args, cfg: RunConfig) -> int:
    from .moodsyn import FeatureSchema, default_schema, read_table
    from .syn_eval import evaluate

    schema = FeatureSchema.load(_require_file(args.schema, "--schema")) if args.schema else default_schema()
    real = read_table(_require_file(args.real, "real"), schema)
    syn = read_table(_require_file(args.syn, "syn"), schema)
    train = read_table(_require_file(args.real_train, "--real-train"), schema) if args.real_train else None
    test = read_table(_require_file(args.real_test, "--real-test"), schema) if args.real_test else None
    report = evaluate(real, syn, schema, real_train=train, real_test=test, classifier=args.classifier,
                      seed=substream_seed(args.seed, "syneval"), folds=args.folds, k=args.knn, with_folded=args.folded)
    out = _run_dir(args, cfg)
    _emit(out, cfg, {"fidelity": report.to_dict()}, report.markdown())
    return EXIT_OK


def cmd_report(args, cfg: RunConfig) -> int:
    from .diag_eval import METHOD_TITLES

    rows = []
    for run in args.runs:
        path = Path(run) / "report.json" if Path(run).is_dir() else Path(run)
        data = json.loads(_require_file(str(path), "run").read_text(encoding="utf-8"))
        setting = (data.get("config") or {}).get("ablation") or {}
        for r in data.get("reports", []):
            rows.append((data["run_id"], r["method"], setting.get("setting") or "-", r["metrics"], len(r["failures"])))
    if not rows:
        raise ConfigError("no diagnosis reports found in the given runs")
    md = "| Run | Method | Setting | Sensitivity | ACC | MCC | Macro F1 | Failures |\n|---|---|---|---|---|---|---|---|\n"
    for run_id, method, setting, m, nf in rows:
        md += (f"| {run_id} | {METHOD_TITLES.get(method, method)} | {setting} | {m['recall']:.3f} | {m['accuracy']:.3f} | "
               f"{m['mcc']:.3f}{'*' if m['mcc_degenerate'] else ''} | {m['macro_f1']:.3f} | {nf} |\n")
    out = _run_dir(args, cfg)
    _emit(out, cfg, {"rows": [{"run_id": r[0], "method": r[1], "setting": r[2], "metrics": r[3], "failures": r[4]} for r in rows]}, md)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--runs-dir", default="runs", help="root for runs/<run_id>/ output")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1, help="global concurrency bound")
    p.add_argument("--cache-dir", default=None, help=f"response cache root (env {CACHE_ENV}; scripted runs default to memory)")
    p.add_argument("-v", "--verbose", action="store_true")


def _llm(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--provider", choices=("scripted", "http"), default="scripted" if required else None)
    p.add_argument("--script", default=None, help="JSON script for the scripted provider")
    p.add_argument("--model", default=None)
    p.add_argument("--embedder", choices=("hashing", "http"), default="hashing")
    p.add_argument("--embed-model", default=None)


def _diag(p: argparse.ArgumentParser) -> None:
    _llm(p, required=True)
    p.add_argument("--cases", required=True, help="test split (JSONL or score CSV)")
    p.add_argument("--format", choices=("jsonl", "csv"), default=None)
    p.add_argument("--history", default=None, help="retrieval split used to build the case stores")
    p.add_argument("--stores", default=None, help="directory written by build-stores")
    p.add_argument("--kb", default=None)
    p.add_argument("--selection", default=None)
    p.add_argument("--scale-embedder", choices=("text", "numeric"), default="text")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--step-cap", type=int, default=8)
    p.add_argument("--max-rounds", type=int, default=3)
    p.add_argument("--failure-policy", choices=("count_wrong", "exclude"), default="count_wrong")
    p.add_argument("--angel-failure-policy", choices=("fail", "majority"), default="fail")


def build_parser() -> argparse.ArgumentParser:
    from .diag_eval import ABLATION_SETTINGS, METHODS

    parser = _Parser(prog="mooddx", description="Mood-disorder diagnosis agents, synthesis and evaluation.")
    parser.add_argument("--version", action="version", version=f"mooddx {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="load, validate and optionally process a case corpus")
    _common(p)
    _llm(p)
    p.add_argument("--cases", required=True)
    p.add_argument("--format", choices=("jsonl", "csv"), default=None)
    p.add_argument("--process", action="store_true", help="advance records to the structured stage")
    p.add_argument("--relativize-with-provider", action="store_true")

    p = sub.add_parser("build-kb", help="build the criteria knowledge base")
    _common(p)
    _llm(p)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--source", help="JSONL of raw criteria text to extract with the provider")
    src.add_argument("--from-review", help="reviewed TSV or JSON knowledge base")

    p = sub.add_parser("build-stores", help="embed the KB and the retrieval split")
    _common(p)
    _llm(p)
    p.add_argument("--history", required=True)
    p.add_argument("--kb", default=None)
    p.add_argument("--selection", default=None)
    p.add_argument("--scale-embedder", choices=("text", "numeric"), default="text")

    p = sub.add_parser("select-items", help="select label-correlated scale items")
    _common(p)
    p.add_argument("--correlations", default=None, help="CSV item_id,r (default: bundled table)")
    p.add_argument("--fraction", type=float, default=None)
    p.add_argument("--population-size", type=int, default=None)
    p.add_argument("--manual", nargs="*", default=None)
    p.add_argument("--use-abs", action="store_true")

    p = sub.add_parser("diagnose", help="run one diagnosis method over a test split")
    _common(p)
    _diag(p)
    p.add_argument("--method", choices=METHODS, default="multi")
    p.add_argument("--setting", type=int, choices=sorted(ABLATION_SETTINGS), default=None)

    p = sub.add_parser("evaluate", help="run several methods and tabulate metrics")
    _common(p)
    _diag(p)
    p.add_argument("--methods", nargs="+", choices=METHODS, default=list(METHODS))
    p.add_argument("--setting", type=int, choices=sorted(ABLATION_SETTINGS), default=None)

    p = sub.add_parser("ablate", help="run a method under an ablation setting")
    _common(p)
    _diag(p)
    p.add_argument("--setting", type=int, choices=sorted(ABLATION_SETTINGS), required=True)
    p.add_argument("--method", choices=METHODS, default="angel_r")

    p = sub.add_parser("synthesize", help="fit the copula synthesizer and sample a table")
    _common(p)
    p.add_argument("--real", required=True)
    p.add_argument("--schema", default=None)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ratio", type=float, default=None, help="positive-class share (default: fitted prior)")

    p = sub.add_parser("syneval", help="fidelity, utility and privacy report for a synthetic table")
    _syneval_args(p)

    p = sub.add_parser("report", help="combine diagnosis reports from several runs")
    _common(p)
    p.add_argument("runs", nargs="+", help="run directories or report.json files")
    return parser


def _syneval_args(p: argparse.ArgumentParser) -> None:
    _common(p)
    p.add_argument("real")
    p.add_argument("syn")
    p.add_argument("--schema", default=None)
    p.add_argument("--real-train", default=None, help="real rows the synthesizer saw (enables DCR)")
    p.add_argument("--real-test", default=None, help="held-out real rows (enables MLE and DCR)")
    p.add_argument("--classifier", choices=("boosted_stumps", "logistic", "majority"), default="boosted_stumps")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--knn", type=int, default=5)
    p.add_argument("--folded", action="store_true", help="also report 1-2|AUC-0.5|")


_PATH_KEYS = ("cases", "history", "stores", "kb", "selection", "script", "source", "from_review", "correlations",
              "real", "syn", "schema", "real_train", "real_test", "runs", "cache_dir")
_SKIP = {"command", "runs_dir", "provider", "model", "embedder", "seed", "step_cap", "max_rounds", "k", "jobs", "verbose", "setting", "func"}


def config_from_args(args) -> RunConfig:
    from .diag_eval import ABLATION_SETTINGS

    d = vars(args)
    ablation = None
    if d.get("setting") is not None:
        ablation = {"setting": d["setting"], **ABLATION_SETTINGS[d["setting"]].to_dict()}
    elif args.command in ("diagnose", "evaluate"):
        ablation = {"setting": None, **_setting_for(args).to_dict()}
    paths = {k: d[k] for k in _PATH_KEYS if d.get(k) is not None}
    options = {k: v for k, v in d.items() if k not in _SKIP and k not in _PATH_KEYS}
    return RunConfig(
        command=args.command,
        provider=d.get("provider"),
        model=d.get("model"),
        embedder=d.get("embedder") or "hashing",
        seed=d.get("seed", 0),
        step_cap=d.get("step_cap", 8),
        max_rounds=d.get("max_rounds", 3),
        k=d.get("k", 5),
        ablation=ablation,
        paths=paths,
        jobs=d.get("jobs", 1),
        options=options,
    )


COMMANDS = {
    "ingest": cmd_ingest,
    "build-kb": cmd_build_kb,
    "build-stores": cmd_build_stores,
    "select-items": cmd_select_items,
    "diagnose": cmd_diagnose,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
    "synthesize": cmd_synthesize,
    "syneval": cmd_syneval,
    "report": cmd_report,
}


def _dispatch(parse) -> int:
    from .corpus import CaseLoadError
    from .knowledge_base import KnowledgeBaseError
    from .moodsyn import SchemaError
    from .retrieval import RetrievalError
    from .scales import CatalogError, SelectionError

    try:
        args = parse()
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        return COMMANDS[args.command](args, config_from_args(args))
    except (ConfigError, CaseLoadError, SchemaError, CatalogError, SelectionError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ProviderError, KnowledgeBaseError, RetrievalError, RuntimeError, ValueError) as exc:
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main(argv: Sequence[str] | None = None) -> int:
    return _dispatch(lambda: build_parser().parse_args(argv))


def syneval_main(argv: Sequence[str] | None = None) -> int:
    """Standalone ``syneval real.csv syn.csv [--schema ...]``."""
    parser = _Parser(prog="syneval", description="Synthetic tabular data evaluation.")
    _syneval_args(parser)

    def parse():
        args = parser.parse_args(argv)
        args.command = "syneval"
        return args

    return _dispatch(parse)


if __name__ == "__main__":
    sys.exit(main())
