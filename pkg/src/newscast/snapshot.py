"""Persistence of a full training run as an immutable snapshot directory.

A snapshot bundles everything the service needs to answer what-if
queries: the topic model, the tf-idf index, the volume panel, the
per-(topic, horizon) forecasters and the per-variant article predictors,
plus the corpus digest they were built from.  Loading a snapshot and
predicting gives bit-identical numbers to the in-memory originals;
tests pin that round trip.

Layout (version 1):

    <dir>/
      meta.json            version, corpus digest, creation time, config
      topic_model.json     everything but the two count matrices
      topic_word.npy
      doc_topic.npy
      index.json           vocabulary, per-document sparse vectors, pipeline
      idf.npy
      panel.json           topic list and dates
      panel_values.npy
      forecasters.json
      predictors.json
      corpus/              canonical copy of the training corpus

The corpus rides along because what-if prediction reads neighbor visit
counts and publication days, which no fitted model retains; the digest
in meta.json is recomputed from this copy at load time.

Directories are written to a temporary sibling and renamed into place,
so a failed save never leaves a partial snapshot at the target path.
Small float collections live in JSON: Python prints floats in shortest
round-trip form, so loading reproduces them bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
from dataclasses import dataclass
from datetime import date, datetime, timezone
from pathlib import Path

import numpy as np

from .articlepred import ArticlePredictorConfig, FittedArticlePredictor, PredictorVariant
from .corpus import Corpus, load_corpus, write_corpus
from .errors import SnapshotError
from .forecast import (FeatureSchema, FittedForecaster, ForecasterKind, LagSpec,
                       TopicVolumePanel)
from .textproc import TfIdfIndex, TokenPipelineConfig, load_stopwords
from .topics import LdaConfig, TopicModel

SNAPSHOT_VERSION = "1"


def corpus_digest(corpus: Corpus) -> str:
    """Order-independent content hash of articles and visit series."""
    h = hashlib.sha256()
    for aid in sorted(corpus.articles):
        a = corpus.articles[aid]
        h.update(json.dumps(
            [a.id, a.title, a.body, a.published_at.isoformat(), a.kind.value],
            ensure_ascii=False, sort_keys=True).encode())
        series = corpus.visits[aid]
        h.update(json.dumps(
            [[d.isoformat(), c] for d, c in series.daily]).encode())
        h.update(json.dumps([list(p) for p in series.early]).encode())
    return h.hexdigest()


def creation_timestamp() -> str:
    """Wall-clock UTC time, overridable by SOURCE_DATE_EPOCH for
    byte-reproducible artifacts."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        dt = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        dt = datetime.now(tz=timezone.utc)
    return dt.replace(microsecond=0).isoformat()


@dataclass(eq=False)
class Snapshot:
    version: str
    corpus_digest: str
    topic_model: TopicModel
    index: TfIdfIndex
    panel: TopicVolumePanel
    forecasters: dict[tuple[int, int], FittedForecaster]   # (topic, horizon)
    predictors: dict[str, FittedArticlePredictor]          # keyed by report label
    created_at: str
    config: dict
    corpus: Corpus


def _dump_json(path: Path, obj) -> None:
    path.write_text(
        json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=1) + "\n",
        encoding="utf-8",
    )


def _load_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


def _forecaster_record(key: tuple[int, int], f: FittedForecaster) -> dict:
    return {
        "topic": key[0],
        "horizon": key[1],
        "kind": f.kind.value,
        "schema": {
            "target_topic": f.schema.target_topic,
            "selected_topics": list(f.schema.selected_topics),
            "delta": f.schema.lags.delta,
            "feature_means": [float(v) for v in f.schema.feature_means],
            "feature_stds": [float(v) for v in f.schema.feature_stds],
        },
        "weights": [float(v) for v in f.weights],
        "intercept": f.intercept,
        "hyperparams": f.hyperparams,
        "training_window": [f.training_window[0].isoformat(),
                            f.training_window[1].isoformat()],
        "conditioning_warning": f.conditioning_warning,
        "target_mean": f.target_mean,
        "target_std": f.target_std,
        "kkt_residual": f.kkt_residual,
    }


def _forecaster_from(rec: dict) -> tuple[tuple[int, int], FittedForecaster]:
    schema = FeatureSchema(
        target_topic=rec["schema"]["target_topic"],
        selected_topics=list(rec["schema"]["selected_topics"]),
        lags=LagSpec(delta=rec["schema"]["delta"]),
        feature_means=np.array(rec["schema"]["feature_means"]),
        feature_stds=np.array(rec["schema"]["feature_stds"]),
    )
    f = FittedForecaster(
        kind=ForecasterKind(rec["kind"]),
        schema=schema,
        horizon=rec["horizon"],
        weights=np.array(rec["weights"]),
        intercept=rec["intercept"],
        hyperparams=rec["hyperparams"],
        training_window=(date.fromisoformat(rec["training_window"][0]),
                         date.fromisoformat(rec["training_window"][1])),
        conditioning_warning=rec["conditioning_warning"],
        target_mean=rec["target_mean"],
        target_std=rec["target_std"],
        kkt_residual=rec["kkt_residual"],
    )
    return (rec["topic"], rec["horizon"]), f


def _predictor_record(p: FittedArticlePredictor) -> dict:
    cfg = p.config
    return {
        "config": {
            "horizon_h": cfg.horizon_h,
            "delta": cfg.delta,
            "theta": cfg.theta,
            "variant": cfg.variant.value,
            "early_offset": cfg.early_offset,
            "literal_formula": cfg.literal_formula,
            "min_history_days": cfg.min_history_days,
        },
        "weights": [float(v) for v in p.weights],
        "intercept": p.intercept,
        "feature_names": list(p.feature_names),
        "train_ids": list(p.train_ids),
        "test_ids": list(p.test_ids),
        "log_scale": p.log_scale,
    }


def _predictor_from(rec: dict) -> FittedArticlePredictor:
    c = rec["config"]
    config = ArticlePredictorConfig(
        horizon_h=c["horizon_h"], delta=c["delta"], theta=c["theta"],
        variant=PredictorVariant(c["variant"]), early_offset=c["early_offset"],
        literal_formula=c["literal_formula"],
        min_history_days=c["min_history_days"],
    )
    return FittedArticlePredictor(
        config=config,
        weights=np.array(rec["weights"]),
        intercept=rec["intercept"],
        feature_names=list(rec["feature_names"]),
        train_ids=list(rec["train_ids"]),
        test_ids=list(rec["test_ids"]),
        log_scale=rec["log_scale"],
    )


def save_snapshot(snap: Snapshot, path) -> None:
    """Write the snapshot atomically; refuses to overwrite."""
    target = Path(path)
    if target.exists():
        raise SnapshotError(f"snapshot path {target} already exists; snapshots are immutable")
    tmp = target.with_name(target.name + ".partial")
    if tmp.exists():
        shutil.rmtree(tmp)
    tmp.mkdir(parents=True)
    try:
        _dump_json(tmp / "meta.json", {
            "version": snap.version,
            "corpus_digest": snap.corpus_digest,
            "created_at": snap.created_at,
            "config": snap.config,
        })
        m = snap.topic_model
        _dump_json(tmp / "topic_model.json", {
            "config": {
                "k": m.config.k, "alpha": m.config.alpha, "beta": m.config.beta,
                "iterations": m.config.iterations, "burn_in": m.config.burn_in,
                "seed": m.config.seed,
            },
            "vocabulary": list(m.vocabulary),
            "doc_ids": list(m.doc_ids),
            "primary_topic": m.primary_topic,
            "rejected_ids": list(m.rejected_ids),
            "sweep_token_totals": [int(v) for v in m.sweep_token_totals],
            "n_tokens": m.n_tokens,
        })
        np.save(tmp / "topic_word.npy", m.topic_word)
        np.save(tmp / "doc_topic.npy", m.doc_topic)

        _dump_json(tmp / "index.json", {
            "vocabulary": snap.index.vocabulary,
            "doc_vectors": {
                aid: {str(col): w for col, w in vec.items()}
                for aid, vec in snap.index.doc_vectors.items()
            },
            "pipeline": {
                "min_token_length": snap.index.config.min_token_length,
                "lowercase": snap.index.config.lowercase,
                "default_stopwords": snap.index.config.stopwords == load_stopwords(),
                "stopwords": (None if snap.index.config.stopwords == load_stopwords()
                              else sorted(snap.index.config.stopwords)),
            },
        })
        np.save(tmp / "idf.npy", np.asarray(snap.index.idf))

        _dump_json(tmp / "panel.json", {
            "topics": list(snap.panel.topics),
            "dates": [d.isoformat() for d in snap.panel.dates],
        })
        np.save(tmp / "panel_values.npy", snap.panel.values)

        _dump_json(tmp / "forecasters.json", [
            _forecaster_record(key, f)
            for key, f in sorted(snap.forecasters.items())
        ])
        _dump_json(tmp / "predictors.json", {
            variant: _predictor_record(p)
            for variant, p in sorted(snap.predictors.items())
        })

        corpus_dir = tmp / "corpus"
        corpus_dir.mkdir()
        has_early = any(s.early for s in snap.corpus.visits.values())
        write_corpus(snap.corpus, corpus_dir / "articles.jsonl",
                     corpus_dir / "visits.csv",
                     corpus_dir / "early.csv" if has_early else None)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    os.replace(tmp, target)


def load_snapshot(path) -> Snapshot:
    root = Path(path)
    meta_path = root / "meta.json"
    if not meta_path.exists():
        raise SnapshotError(f"{root} is not a snapshot directory (no meta.json)")
    meta = _load_json(meta_path)
    if meta.get("version") != SNAPSHOT_VERSION:
        raise SnapshotError(
            f"snapshot version {meta.get('version')!r} not supported "
            f"(expected {SNAPSHOT_VERSION!r})"
        )

    tm = _load_json(root / "topic_model.json")
    model = TopicModel(
        config=LdaConfig(**tm["config"]),
        vocabulary=list(tm["vocabulary"]),
        topic_word=np.load(root / "topic_word.npy"),
        doc_topic=np.load(root / "doc_topic.npy"),
        doc_ids=list(tm["doc_ids"]),
        primary_topic=dict(tm["primary_topic"]),
        rejected_ids=list(tm["rejected_ids"]),
        sweep_token_totals=list(tm["sweep_token_totals"]),
        n_tokens=tm["n_tokens"],
    )

    idx = _load_json(root / "index.json")
    pipe = idx["pipeline"]
    config = TokenPipelineConfig(
        stopwords=(load_stopwords() if pipe["default_stopwords"]
                   else frozenset(pipe["stopwords"])),
        min_token_length=pipe["min_token_length"],
        lowercase=pipe["lowercase"],
    )
    index = TfIdfIndex(
        vocabulary=dict(idx["vocabulary"]),
        idf=np.load(root / "idf.npy"),
        doc_vectors={
            aid: {int(col): w for col, w in vec.items()}
            for aid, vec in idx["doc_vectors"].items()
        },
        config=config,
    )

    pn = _load_json(root / "panel.json")
    panel = TopicVolumePanel(
        topics=list(pn["topics"]),
        dates=[date.fromisoformat(d) for d in pn["dates"]],
        values=np.load(root / "panel_values.npy"),
    )

    forecasters = dict(
        _forecaster_from(rec) for rec in _load_json(root / "forecasters.json")
    )
    predictors = {
        variant: _predictor_from(rec)
        for variant, rec in _load_json(root / "predictors.json").items()
    }

    early_path = root / "corpus" / "early.csv"
    corpus = load_corpus(root / "corpus" / "articles.jsonl",
                         root / "corpus" / "visits.csv",
                         early_path if early_path.exists() else None)
    digest = corpus_digest(corpus)
    if digest != meta["corpus_digest"]:
        raise SnapshotError(
            f"snapshot corpus digest mismatch: meta says {meta['corpus_digest'][:12]}, "
            f"bundled corpus hashes to {digest[:12]}"
        )
    return Snapshot(
        version=meta["version"],
        corpus_digest=meta["corpus_digest"],
        topic_model=model,
        index=index,
        panel=panel,
        forecasters=forecasters,
        predictors=predictors,
        created_at=meta["created_at"],
        config=meta["config"],
        corpus=corpus,
    )
