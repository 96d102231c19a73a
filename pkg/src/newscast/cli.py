"""Command line entry point.

Commands cover the whole pipeline: generate or ingest a corpus, pick k,
fit a snapshot, backtest forecasters, evaluate article predictors, run
the descriptive analytics, score a draft, and serve the HTTP API.

Every command that writes artifacts also writes a manifest.json holding
the resolved configuration, the seed and content digests of all inputs
and outputs, so any artifact can be regenerated from its manifest alone.
Report commands render a PNG figure next to each CSV.

Options resolve as: command line flag, then the [newscast] section of
the --config file, then the built-in default.  Artifacts are
byte-reproducible; set SOURCE_DATE_EPOCH to pin the snapshot creation
timestamp as well.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import os
import sys
from datetime import date
from pathlib import Path

from . import __version__
from .articlepred import (ArticlePredictorConfig, PredictionContext,
                          PredictorVariant, TopicVolumeForecasts, analytics,
                          evaluate_article_predictor, evaluation_csv,
                          fit_article_predictor, predictor_key)
from .corpus import load_corpus, write_corpus
from .errors import DomainError, NewscastError, ValidationError
from .forecast import (DEFAULT_HORIZONS, ForecasterKind, backtest, build_panel,
                       fit_forecaster, select_features)
from .snapshot import (SNAPSHOT_VERSION, Snapshot, corpus_digest,
                       creation_timestamp, load_snapshot, save_snapshot)
from .synth import (SynthSpec, coupled_var, diagonal_var, generate_synthetic,
                    write_ground_truth)
from .textproc import build_tfidf
from .topics import DEFAULT_CANDIDATE_KS, LdaConfig, fit_lda, select_k, tokenize_corpus

DEFAULT_BIND = "127.0.0.1:8000"
BIND_ENV_VAR = "NEWSCAST_BIND"


# ---------------------------------------------------------------------------
# option resolution and manifests

_DEFAULTS = {
    "k": 10,
    "lda_alpha": None,           # 50/k when unset
    "lda_beta": 0.01,
    "lda_iterations": 1000,
    "lda_burn_in": 800,
    "horizons": "2,3,7,15,30",
    "window_days": 50,
    "delta": 3,
    "top_topics": 4,
    "forecaster_kind": "SVR",
    "svr_c": 1.0,
    "svr_epsilon": 0.1,
    "svr_tol": 1e-6,
    "article_horizon": 3,
    "article_delta": 3,
    "theta": 0.1,
    "variants": "NN,T,NN_T,NN_T_PT,EARLY,EARLY_NN_T_PT",
    "early_offsets": "5m,1h,6h",
    "extension_offset": "6h",
    "min_history_days": None,
    "pt_window_days": 40,
    "pt_delta": 2,
    "pt_s": 4,
    "pt_kind": "SVR",
    "pt_c": 1.0,
    "pt_epsilon": 0.1,
    "pt_tol": 1e-4,
}


def _load_config_file(path: str | None) -> dict:
    if path is None:
        return {}
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValidationError(f"config file {path!r} not found or unreadable")
    if not parser.has_section("newscast"):
        raise ValidationError(f"config file {path!r} has no [newscast] section")
    return dict(parser.items("newscast"))


def _coerce(key: str, raw):
    default = _DEFAULTS[key]
    if raw is None or isinstance(raw, (int, float)) or not isinstance(raw, str):
        return raw
    if key in ("lda_alpha", "min_history_days") and raw.lower() in ("", "none"):
        return None
    if isinstance(default, int) and not isinstance(default, bool):
        return int(raw)
    if isinstance(default, float) or key in ("lda_alpha", "svr_tol", "pt_tol"):
        return float(raw)
    return raw


def _resolve(args: argparse.Namespace, file_config: dict) -> dict:
    """Flag > config file > default, for every known option."""
    resolved = {}
    for key, default in _DEFAULTS.items():
        flag = getattr(args, key, None)
        if flag is not None:
            resolved[key] = flag
        elif key in file_config:
            resolved[key] = _coerce(key, file_config[key])
        else:
            resolved[key] = default
    return resolved


def _parse_horizons(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(p) for p in str(text).split(",") if p.strip())
    except ValueError:
        raise ValidationError(f"bad horizon list {text!r}") from None
    if not values or any(h < 1 for h in values):
        raise ValidationError(f"horizons must be positive integers, got {text!r}")
    return values


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _digest_tree(path: Path) -> str:
    """Digest of a file, or of a directory's files in sorted relative order."""
    if path.is_file():
        return _sha256(path)
    h = hashlib.sha256()
    for sub in sorted(p for p in path.rglob("*") if p.is_file()):
        h.update(str(sub.relative_to(path)).encode())
        h.update(bytes.fromhex(_sha256(sub)))
    return h.hexdigest()


def _write_manifest(out_dir: Path, command: str, arguments: dict,
                    inputs: dict[str, Path], outputs: list[str]) -> None:
    manifest = {
        "command": command,
        "package_version": __version__,
        "arguments": {k: arguments[k] for k in sorted(arguments)},
        "inputs": {name: _digest_tree(Path(p)) for name, p in sorted(inputs.items())},
        "outputs": {name: _digest_tree(out_dir / name) for name in sorted(outputs)},
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
        encoding="utf-8",
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _load_corpus_args(args):
    early = getattr(args, "early", None)
    return load_corpus(args.articles, args.visits, early)


def _corpus_inputs(args) -> dict[str, Path]:
    inputs = {"articles": Path(args.articles), "visits": Path(args.visits)}
    if getattr(args, "early", None):
        inputs["early"] = Path(args.early)
    return inputs


# ---------------------------------------------------------------------------
# commands


def _cmd_synth(args) -> int:
    out = _out_dir(args)
    k = args.topics
    if args.var_partners > 0:
        coeffs = coupled_var(k, args.var_order, partners=args.var_partners,
                             rho=args.var_rho, seed=args.var_seed)
    else:
        coeffs = diagonal_var(k, args.var_order, rho=args.var_rho)
    spec = SynthSpec(
        k_true=k,
        vocab_size=args.vocab,
        n_articles=args.articles,
        n_days=args.days,
        var_coefficients=coeffs,
        noise_scale=args.noise,
        seed=args.seed,
        doc_topic_alpha=args.doc_alpha,
        topic_block_boost=args.block_boost,
        article_weight_sigma=args.weight_sigma,
        opinion_fraction=args.opinion_fraction,
    )
    corpus, truth = generate_synthetic(spec)
    write_corpus(corpus, out / "articles.jsonl", out / "visits.csv", out / "early.csv")
    write_ground_truth(truth, out / "ground_truth.jsonl")
    arguments = {
        "seed": args.seed, "topics": k, "vocab": args.vocab,
        "articles": args.articles, "days": args.days, "noise": args.noise,
        "doc_alpha": args.doc_alpha, "block_boost": args.block_boost,
        "weight_sigma": args.weight_sigma, "opinion_fraction": args.opinion_fraction,
        "var_order": args.var_order, "var_rho": args.var_rho,
        "var_partners": args.var_partners, "var_seed": args.var_seed,
    }
    _write_manifest(out, "synth", arguments, {},
                    ["articles.jsonl", "visits.csv", "early.csv", "ground_truth.jsonl"])
    print(f"wrote synthetic corpus ({corpus.n} articles, {spec.n_days} days) to {out}")
    return 0


def _cmd_ingest(args) -> int:
    out = _out_dir(args)
    corpus = _load_corpus_args(args)
    has_early = any(s.early for s in corpus.visits.values())
    write_corpus(corpus, out / "articles.jsonl", out / "visits.csv",
                 out / "early.csv" if has_early else None)
    outputs = ["articles.jsonl", "visits.csv"] + (["early.csv"] if has_early else [])
    _write_manifest(out, "ingest", {"digest": corpus_digest(corpus)},
                    _corpus_inputs(args), outputs)
    print(f"ingested {corpus.n} articles "
          f"({corpus.date_range[0]} .. {corpus.date_range[1]}) to {out}")
    return 0


def _cmd_select_k(args) -> int:
    out = _out_dir(args)
    cfg = _resolve(args, _load_config_file(args.config))
    corpus = _load_corpus_args(args)
    if args.candidates:
        candidates = tuple(int(p) for p in args.candidates.split(",") if p.strip())
    else:
        candidates = DEFAULT_CANDIDATE_KS
    report = select_k(
        corpus, candidates, split_seed=args.seed,
        lda_alpha=cfg["lda_alpha"], lda_beta=cfg["lda_beta"],
        lda_iterations=cfg["lda_iterations"], lda_burn_in=cfg["lda_burn_in"],
    )
    _write_text(out / "kselection.csv", report.csv_text())
    from .figures import save_kselection_figure
    save_kselection_figure(report, out / "kselection.png")
    _write_manifest(out, "select-k",
                    {"seed": args.seed, "candidates": list(candidates),
                     "lda_beta": cfg["lda_beta"],
                     "lda_iterations": cfg["lda_iterations"],
                     "lda_burn_in": cfg["lda_burn_in"]},
                    _corpus_inputs(args), ["kselection.csv", "kselection.png"])
    print(f"chosen k = {report.chosen_k}")
    return 0


def _build_predictors(corpus, index, panel, model, cfg, pipeline):
    """Fit every configured article-predictor variant that the corpus supports."""
    has_early = any(s.early for s in corpus.visits.values())
    pt_provider = TopicVolumeForecasts(
        panel=panel, horizon=cfg["article_horizon"] + 1,
        window_days=cfg["pt_window_days"], delta=cfg["pt_delta"], s=cfg["pt_s"],
        kind=ForecasterKind(cfg["pt_kind"]), c=cfg["pt_c"],
        epsilon=cfg["pt_epsilon"], tol=cfg["pt_tol"],
    )
    predictors = {}
    skipped = []
    for name in str(cfg["variants"]).split(","):
        name = name.strip()
        if not name:
            continue
        variant = PredictorVariant(name)
        if variant.uses_early_counts and not has_early:
            skipped.append(name)
            continue
        if variant is PredictorVariant.EARLY:
            offsets = [o.strip() for o in str(cfg["early_offsets"]).split(",")]
        elif variant is PredictorVariant.EARLY_NN_T_PT:
            offsets = [str(cfg["extension_offset"])]
        else:
            offsets = [None]
        for offset in offsets:
            aconf = ArticlePredictorConfig(
                horizon_h=cfg["article_horizon"], delta=cfg["article_delta"],
                theta=cfg["theta"], variant=variant, early_offset=offset,
                min_history_days=cfg["min_history_days"],
            )
            ctx = PredictionContext(
                corpus=corpus, index=index, panel=panel, topic_model=model,
                topic_forecasts=pt_provider if variant.uses_volume_forecast else None,
                pipeline=pipeline,
            )
            predictors[predictor_key(aconf)] = fit_article_predictor(ctx, aconf)
    return predictors, skipped


def _cmd_fit(args) -> int:
    cfg = _resolve(args, _load_config_file(args.config))
    corpus = _load_corpus_args(args)
    digest = corpus_digest(corpus)

    stems = tokenize_corpus(corpus)
    lda = LdaConfig(k=cfg["k"], alpha=cfg["lda_alpha"], beta=cfg["lda_beta"],
                    iterations=cfg["lda_iterations"], burn_in=cfg["lda_burn_in"],
                    seed=args.seed)
    model = fit_lda(corpus, stems, lda)
    index = build_tfidf(corpus)
    panel = build_panel(corpus, model)

    horizons = sorted(set(_parse_horizons(cfg["horizons"]))
                      | set(range(1, cfg["article_horizon"] + 1)))
    window_days = cfg["window_days"]
    if panel.n_days < window_days + 1:
        raise DomainError(
            f"panel spans {panel.n_days} days; need more than {window_days} "
            f"for the training window"
        )
    window = (panel.dates[-window_days], panel.dates[-1])
    kind = ForecasterKind(cfg["forecaster_kind"])
    forecasters = {}
    for u in panel.topics:
        schema = select_features(panel, u, s=cfg["top_topics"], window=window,
                                 delta=cfg["delta"])
        for h in horizons:
            forecasters[(u, h)] = fit_forecaster(
                panel, schema, kind, h, window, c=cfg["svr_c"],
                epsilon=cfg["svr_epsilon"], tol=cfg["svr_tol"],
            )

    predictors, skipped = _build_predictors(corpus, index, panel, model, cfg,
                                            index.config)
    for name in skipped:
        print(f"note: skipping {name}: corpus has no early measurements")

    config = {
        "seed": args.seed,
        "lda": {"k": cfg["k"], "alpha": cfg["lda_alpha"], "beta": cfg["lda_beta"],
                "iterations": cfg["lda_iterations"], "burn_in": cfg["lda_burn_in"]},
        "forecast": {"horizons": horizons, "window_days": window_days,
                     "delta": cfg["delta"], "s": cfg["top_topics"],
                     "kind": kind.value, "c": cfg["svr_c"],
                     "epsilon": cfg["svr_epsilon"], "tol": cfg["svr_tol"]},
        "article": {"horizon_h": cfg["article_horizon"],
                    "delta": cfg["article_delta"], "theta": cfg["theta"],
                    "variants": sorted(predictors),
                    "min_history_days": cfg["min_history_days"]},
        "pt": {"window_days": cfg["pt_window_days"], "delta": cfg["pt_delta"],
               "s": cfg["pt_s"], "kind": cfg["pt_kind"], "c": cfg["pt_c"],
               "epsilon": cfg["pt_epsilon"], "tol": cfg["pt_tol"]},
    }
    snap = Snapshot(
        version=SNAPSHOT_VERSION, corpus_digest=digest, topic_model=model,
        index=index, panel=panel, forecasters=forecasters,
        predictors=predictors, created_at=creation_timestamp(), config=config,
        corpus=corpus,
    )
    save_snapshot(snap, args.out)
    print(f"snapshot written to {args.out} "
          f"({len(forecasters)} forecasters, {len(predictors)} predictors)")
    return 0


def _cmd_backtest_topics(args) -> int:
    out = _out_dir(args)
    cfg = _resolve(args, _load_config_file(args.config))
    inputs: dict[str, Path]
    if args.snapshot:
        snap = load_snapshot(args.snapshot)
        panel = snap.panel
        inputs = {"snapshot": Path(args.snapshot)}
    else:
        if not (args.articles and args.visits):
            raise ValidationError("backtest-topics needs --snapshot or --articles/--visits")
        corpus = _load_corpus_args(args)
        stems = tokenize_corpus(corpus)
        lda = LdaConfig(k=cfg["k"], alpha=cfg["lda_alpha"], beta=cfg["lda_beta"],
                        iterations=cfg["lda_iterations"],
                        burn_in=cfg["lda_burn_in"], seed=args.seed)
        model = fit_lda(corpus, stems, lda)
        panel = build_panel(corpus, model)
        inputs = _corpus_inputs(args)

    report = backtest(
        panel, kind=cfg["forecaster_kind"],
        horizons=_parse_horizons(cfg["horizons"]),
        window_days=cfg["window_days"], delta=cfg["delta"], s=cfg["top_topics"],
        c=cfg["svr_c"], epsilon=cfg["svr_epsilon"],
    )
    _write_text(out / "backtest.csv", report.csv_text())
    from .figures import save_backtest_figure
    save_backtest_figure(report, out / "backtest.png")
    _write_manifest(out, "backtest-topics",
                    {"seed": args.seed, "kind": cfg["forecaster_kind"],
                     "horizons": cfg["horizons"],
                     "window_days": cfg["window_days"], "delta": cfg["delta"],
                     "top_topics": cfg["top_topics"]},
                    inputs, ["backtest.csv", "backtest.png"])
    print(f"grand mean MAPE {report.grand_mean():.2f}% "
          f"over {len(report.cells)} cells")
    return 0


def _cmd_eval_articles(args) -> int:
    out = _out_dir(args)
    snap = load_snapshot(args.snapshot)
    wanted = None
    if args.variant:
        wanted = {v.strip() for v in args.variant.split(",") if v.strip()}
        unknown = wanted - set(snap.predictors)
        if unknown:
            raise ValidationError(
                f"variants not in snapshot: {', '.join(sorted(unknown))} "
                f"(available: {', '.join(sorted(snap.predictors))})"
            )
    from .service import serving_context
    rows = []
    for key in sorted(snap.predictors):
        if wanted is not None and key not in wanted:
            continue
        fitted = snap.predictors[key]
        ctx = serving_context(snap, fitted.config.horizon_h)
        rows.append(evaluate_article_predictor(fitted, ctx))
    _write_text(out / "evaluation.csv", evaluation_csv(rows))
    from .figures import save_evaluation_figure
    save_evaluation_figure(rows, out / "evaluation.png")
    _write_manifest(out, "eval-articles",
                    {"variants": sorted(r.variant for r in rows)},
                    {"snapshot": Path(args.snapshot)},
                    ["evaluation.csv", "evaluation.png"])
    for r in rows:
        print(f"{r.variant}: MAPE {r.mape:.2f}% (n={r.n_test}, skipped {r.n_skipped})")
    return 0


def _cmd_analytics(args) -> int:
    out = _out_dir(args)
    corpus = _load_corpus_args(args)
    report = analytics(corpus)
    _write_text(out / "ccdf.csv", report.ccdf_csv())
    _write_text(out / "growth.csv", report.growth_csv())
    _write_text(out / "shelf.csv", report.shelf_csv())
    from .figures import (save_ccdf_figure, save_growth_figure,
                          save_shelf_life_figure)
    save_ccdf_figure(report, out / "ccdf.png")
    save_growth_figure(report, out / "growth.png")
    save_shelf_life_figure(report, out / "shelf.png")
    _write_manifest(out, "analytics", {}, _corpus_inputs(args),
                    ["ccdf.csv", "growth.csv", "shelf.csv",
                     "ccdf.png", "growth.png", "shelf.png"])
    print(f"analytics over {corpus.n} articles written to {out}")
    return 0


def _read_draft(args) -> dict:
    if args.input:
        if args.input == "-":
            payload = sys.stdin.read()
            source = "<stdin>"
        else:
            try:
                payload = Path(args.input).read_text(encoding="utf-8")
            except OSError as exc:
                raise ValidationError(
                    f"cannot read draft file {args.input!r}: {exc.strerror or exc}"
                ) from None
            source = args.input
        try:
            record = json.loads(payload)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{source}: not valid JSON ({e})") from None
        missing = {"title", "body", "planned_date"} - set(record)
        if missing:
            raise ValidationError(f"{source}: missing fields {sorted(missing)}")
        return record
    if not (args.title and args.body and args.date):
        raise ValidationError("predict needs --input or all of --title/--body/--date")
    return {"title": args.title, "body": args.body, "planned_date": args.date,
            "variant": args.variant}


def _cmd_predict(args) -> int:
    snap = load_snapshot(args.snapshot)
    record = _read_draft(args)
    from .service import build_whatif_response
    response = build_whatif_response(
        snap,
        title=record["title"],
        body=record["body"],
        planned_date=date.fromisoformat(str(record["planned_date"])),
        variant=record.get("variant") or "NN_T_PT",
    )
    text = json.dumps(response, ensure_ascii=False, sort_keys=True, indent=1) + "\n"
    print(text, end="")
    if args.out:
        out = _out_dir(args)
        _write_text(out / "whatif.json", text)
        _write_manifest(out, "predict",
                        {"variant": response["variant"],
                         "planned_date": response["planned_date"]},
                        {"snapshot": Path(args.snapshot)}, ["whatif.json"])
    return 0


def _cmd_serve(args) -> int:
    snap = load_snapshot(args.snapshot)
    bind = args.bind or os.environ.get(BIND_ENV_VAR) or DEFAULT_BIND
    host, _, port_text = bind.rpartition(":")
    if not host or not port_text.isdigit():
        raise ValidationError(f"bad bind address {bind!r}; expected host:port")
    from .service import create_app
    import uvicorn
    app = create_app(snap, static_dir=args.static)
    print(f"serving snapshot {snap.corpus_digest[:12]} on {host}:{port_text}")
    uvicorn.run(app, host=host, port=int(port_text), log_level="warning")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_corpus_arguments(p, required=True):
    p.add_argument("--articles", required=required, help="articles JSONL path")
    p.add_argument("--visits", required=required, help="daily visits CSV path")
    p.add_argument("--early", help="early measurements CSV path")


def _add_common_model_arguments(p):
    p.add_argument("--config", help="INI config file with a [newscast] section")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int)
    p.add_argument("--lda-alpha", dest="lda_alpha", type=float)
    p.add_argument("--lda-beta", dest="lda_beta", type=float)
    p.add_argument("--lda-iterations", dest="lda_iterations", type=int)
    p.add_argument("--lda-burn-in", dest="lda_burn_in", type=int)


def _add_forecast_arguments(p):
    p.add_argument("--horizons")
    p.add_argument("--window-days", dest="window_days", type=int)
    p.add_argument("--delta", type=int)
    p.add_argument("--top-topics", dest="top_topics", type=int)
    p.add_argument("--forecaster-kind", dest="forecaster_kind",
                   choices=["LR", "SVR"])
    p.add_argument("--svr-c", dest="svr_c", type=float)
    p.add_argument("--svr-epsilon", dest="svr_epsilon", type=float)
    p.add_argument("--svr-tol", dest="svr_tol", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newscast",
        description="forecast article popularity before publication",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--topics", type=int, default=5)
    p.add_argument("--vocab", type=int, default=200)
    p.add_argument("--articles", type=int, default=400)
    p.add_argument("--days", type=int, default=120)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--doc-alpha", dest="doc_alpha", type=float, default=0.3)
    p.add_argument("--block-boost", dest="block_boost", type=float)
    p.add_argument("--weight-sigma", dest="weight_sigma", type=float, default=0.5)
    p.add_argument("--opinion-fraction", dest="opinion_fraction", type=float,
                   default=0.35)
    p.add_argument("--var-order", dest="var_order", type=int, default=2)
    p.add_argument("--var-rho", dest="var_rho", type=float, default=0.98)
    p.add_argument("--var-partners", dest="var_partners", type=int, default=0)
    p.add_argument("--var-seed", dest="var_seed", type=int, default=0)
    p.set_defaults(handler=_cmd_synth)

    p = sub.add_parser("ingest", help="validate and canonicalize a corpus")
    _add_corpus_arguments(p)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser("select-k", help="pick the topic count by classification F1")
    _add_corpus_arguments(p)
    p.add_argument("--out", required=True)
    p.add_argument("--candidates", help="comma-separated k values")
    _add_common_model_arguments(p)
    p.set_defaults(handler=_cmd_select_k)

    p = sub.add_parser("fit", help="train everything and write a snapshot")
    _add_corpus_arguments(p)
    p.add_argument("--out", required=True, help="snapshot directory (must not exist)")
    _add_common_model_arguments(p)
    _add_forecast_arguments(p)
    p.add_argument("--article-horizon", dest="article_horizon", type=int)
    p.add_argument("--article-delta", dest="article_delta", type=int)
    p.add_argument("--theta", type=float)
    p.add_argument("--variants")
    p.add_argument("--early-offsets", dest="early_offsets")
    p.add_argument("--min-history-days", dest="min_history_days", type=int)
    p.set_defaults(handler=_cmd_fit)

    p = sub.add_parser("backtest-topics", help="sliding-window forecaster backtest")
    _add_corpus_arguments(p, required=False)
    p.add_argument("--snapshot", help="reuse a snapshot's panel instead of refitting")
    p.add_argument("--out", required=True)
    _add_common_model_arguments(p)
    _add_forecast_arguments(p)
    p.set_defaults(handler=_cmd_backtest_topics)

    p = sub.add_parser("eval-articles", help="test-split MAPE per predictor variant")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--variant", help="comma-separated subset, default all")
    p.set_defaults(handler=_cmd_eval_articles)

    p = sub.add_parser("analytics", help="popularity CCDF, growth curves, shelf-life")
    _add_corpus_arguments(p)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=_cmd_analytics)

    p = sub.add_parser("predict", help="one-shot what-if for a draft")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--input", help="JSON draft file, or - for stdin")
    p.add_argument("--title")
    p.add_argument("--body")
    p.add_argument("--date", help="planned publication date, ISO format")
    p.add_argument("--variant", default="NN_T_PT")
    p.add_argument("--out", help="also write whatif.json and a manifest here")
    p.set_defaults(handler=_cmd_predict)

    p = sub.add_parser("serve", help="serve the what-if HTTP API")
    p.add_argument("--snapshot", required=True)
    p.add_argument("--bind", help=f"host:port (or set {BIND_ENV_VAR})")
    p.add_argument("--static",
                   help="directory of dashboard files to serve at /")
    p.set_defaults(handler=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except NewscastError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
