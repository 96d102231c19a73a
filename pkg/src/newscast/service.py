"""HTTP serving of a fitted snapshot.

The service is read-only: every endpoint is a pure function of the
loaded snapshot and the request, so concurrent identical requests get
identical responses.  The what-if response is built by
build_whatif_response, which the CLI predict command calls too; a draft
submitted over HTTP and through the CLI therefore yields bit-identical
numbers.

Status codes: 200 success, 400 malformed request, 404 unknown resource,
422 a request that is well-formed but outside the snapshot's data range
(insufficient history).
"""

from __future__ import annotations

import math
from datetime import date, timedelta
from pathlib import Path

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .articlepred import (Draft, PredictionContext, TopicVolumeForecasts,
                          _neighbors_of_vector, predict_article)
from .corpus import cumulative_visits
from .errors import DomainError, LookupError_, NewscastError, ValidationError
from .forecast import ForecasterKind, forecast
from .snapshot import Snapshot
from .textproc import preprocess
from .topics import infer_doc_topics

TOP_STEMS = 10
TOP_NEIGHBORS = 10
HISTORY_DAYS = 14


class WhatIfRequest(BaseModel):
    title: str = Field(min_length=1)
    body: str = Field(min_length=1)
    planned_date: date
    variant: str = "NN_T_PT"


def _pt_provider(snap: Snapshot, horizon_h: int) -> TopicVolumeForecasts:
    pt = snap.config.get("pt", {})
    return TopicVolumeForecasts(
        panel=snap.panel,
        horizon=horizon_h + 1,
        window_days=pt.get("window_days", 40),
        delta=pt.get("delta", 2),
        s=pt.get("s", 4),
        kind=ForecasterKind(pt.get("kind", "SVR")),
        c=pt.get("c", 1.0),
        epsilon=pt.get("epsilon", 0.1),
        tol=pt.get("tol", 1e-4),
    )


def serving_context(snap: Snapshot, horizon_h: int) -> PredictionContext:
    return PredictionContext(
        corpus=snap.corpus,
        index=snap.index,
        panel=snap.panel,
        topic_model=snap.topic_model,
        topic_forecasts=_pt_provider(snap, horizon_h),
        pipeline=snap.index.config,
    )


def _neighbor_entries(ctx: PredictionContext, vec, planned_date: date,
                      delta: int, theta: float) -> list[dict]:
    merged: list[tuple[str, float]] = []
    for lag in range(delta, 0, -1):
        day = planned_date - timedelta(days=lag)
        merged.extend(_neighbors_of_vector(ctx.index, ctx.corpus, vec, day,
                                           theta, exclude_id=None))
    merged.sort(key=lambda m: (-m[1], m[0]))
    out = []
    for aid, sim in merged[:TOP_NEIGHBORS]:
        art = ctx.corpus.articles[aid]
        out.append({
            "article_id": aid,
            "title": art.title,
            "published_at": art.published_at.isoformat(),
            "similarity": sim,
        })
    return out


def _volume_series(snap: Snapshot, topic: int, history_days: int,
                   horizon_h: int) -> tuple[list[dict], list[dict], list[str]]:
    """History rows, forecast rows and any forecast warnings for a topic."""
    panel = snap.panel
    row = panel.topics.index(topic)
    n = panel.n_days
    history = [
        {"date": panel.dates[i].isoformat(), "visits": float(panel.values[row, i])}
        for i in range(max(0, n - history_days), n)
    ]
    issue_day = panel.dates[-1] + timedelta(days=1)
    fc, warnings = [], []
    for j in range(1, horizon_h + 1):
        fitted = snap.forecasters.get((topic, j))
        if fitted is None:
            warnings.append(f"no horizon-{j} forecaster in snapshot for topic {topic}")
            continue
        value = forecast(panel, fitted, issue_day)
        fc.append({
            "date": (panel.dates[-1] + timedelta(days=j)).isoformat(),
            "visits": value.value,
            "clamped": value.clamped,
        })
    return history, fc, warnings


def build_whatif_response(snap: Snapshot, title: str, body: str,
                          planned_date: date, variant: str) -> dict:
    """Predict a draft's visits plus the context an editor needs.

    Raises ValidationError for unusable variants (mapped to 400) and
    DomainError when the planned date lacks history (mapped to 422).
    """
    predictor = snap.predictors.get(variant)
    if predictor is None:
        available = ", ".join(sorted(snap.predictors))
        raise ValidationError(
            f"variant {variant!r} is not in this snapshot (available: {available})"
        )
    if predictor.config.variant.uses_early_counts:
        raise ValidationError(
            f"variant {variant!r} needs post-publication measurements and cannot "
            f"score an unpublished draft"
        )
    ctx = serving_context(snap, predictor.config.horizon_h)
    draft = Draft(title=title, body=body, planned_date=planned_date)
    prediction = predict_article(predictor, draft, ctx)

    warnings: list[str] = []
    stems = preprocess(title + " " + body, ctx.pipeline)
    if infer_doc_topics(snap.topic_model, stems).all_oov:
        warnings.append("draft shares no vocabulary with the training corpus; "
                        "topic assignment is uniform guesswork")
    if prediction.clamped:
        warnings.append("raw prediction was negative and was clamped to zero")
    n_empty = sum(prediction.nn_empty_flags)
    if n_empty:
        warnings.append(
            f"no sufficiently similar articles on {n_empty} of "
            f"{predictor.config.delta} look-back days"
        )

    u = prediction.primary_topic
    history, fc, fc_warnings = _volume_series(snap, u, HISTORY_DAYS,
                                              predictor.config.horizon_h)
    warnings.extend(fc_warnings)

    vec = ctx.index.vectorize(stems)
    response = {
        "predicted_visits": prediction.predicted_cumulative_visits,
        "variant": variant,
        "planned_date": planned_date.isoformat(),
        "primary_topic": {
            "id": u,
            "top_stems": [w for w, _ in snap.topic_model.top_words(u, TOP_STEMS)],
        },
        "neighbors": _neighbor_entries(ctx, vec, planned_date,
                                       predictor.config.delta,
                                       predictor.config.theta),
        "volume_history": history,
        "volume_forecast": fc,
        "warnings": warnings,
    }
    for key in ("predicted_visits",):
        if not math.isfinite(response[key]):
            raise DomainError(f"non-finite {key} for this draft")
    return response


def create_app(snap: Snapshot, static_dir: str | Path | None = None) -> FastAPI:
    """Build the API app, optionally serving a dashboard build at /.

    API routes are registered first, so the static mount only answers
    paths no endpoint claims.
    """
    app = FastAPI(title="newscast", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request, exc):
        details = [
            {"field": ".".join(str(p) for p in err.get("loc", [])),
             "message": err.get("msg", "invalid")}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400,
                            content={"error": "malformed request", "details": details})

    @app.exception_handler(LookupError_)
    async def _not_found(request, exc):
        return JSONResponse(status_code=404, content={"error": str(exc)})

    @app.exception_handler(DomainError)
    async def _unprocessable(request, exc):
        return JSONResponse(status_code=422, content={"error": str(exc)})

    @app.exception_handler(NewscastError)
    async def _rejected(request, exc):
        return JSONResponse(status_code=400, content={"error": str(exc)})

    @app.get("/health")
    async def health():
        return {"status": "ok", "version": snap.version}

    @app.get("/snapshot")
    async def snapshot_meta():
        return {
            "version": snap.version,
            "corpus_digest": snap.corpus_digest,
            "created_at": snap.created_at,
            "n_articles": snap.corpus.n,
            "n_topics": snap.topic_model.topic_word.shape[0],
            "panel_start": snap.panel.dates[0].isoformat(),
            "panel_end": snap.panel.dates[-1].isoformat(),
            "variants": sorted(snap.predictors),
            "config": snap.config,
        }

    @app.get("/topics")
    async def topics():
        k = snap.topic_model.topic_word.shape[0]
        return [
            {"id": u,
             "top_stems": [w for w, _ in snap.topic_model.top_words(u, TOP_STEMS)]}
            for u in range(k)
        ]

    @app.get("/topics/{topic_id}/volume")
    async def topic_volume(topic_id: int, days: int = HISTORY_DAYS):
        if topic_id not in snap.panel.topics:
            raise LookupError_(f"unknown topic {topic_id}")
        if days < 1:
            raise ValidationError("days must be >= 1")
        horizon_h = snap.config.get("article", {}).get("horizon_h", 3)
        history, fc, warnings = _volume_series(snap, topic_id, days, horizon_h)
        return {"topic": topic_id, "history": history, "forecast": fc,
                "warnings": warnings}

    @app.get("/articles/{article_id}/prediction-vs-actual")
    async def prediction_vs_actual(article_id: str, variant: str = "NN_T_PT"):
        article = snap.corpus.article(article_id)
        predictor = snap.predictors.get(variant)
        if predictor is None:
            raise ValidationError(
                f"variant {variant!r} is not in this snapshot"
            )
        ctx = serving_context(snap, predictor.config.horizon_h)
        prediction = predict_article(predictor, article, ctx)
        h = predictor.config.horizon_h
        target_date = article.published_at + timedelta(days=h)
        last = snap.corpus.date_range[1] if snap.corpus.date_range else None
        return {
            "article_id": article_id,
            "variant": variant,
            "published_at": article.published_at.isoformat(),
            "horizon_days": h,
            "predicted_visits": prediction.predicted_cumulative_visits,
            "actual_visits": cumulative_visits(snap.corpus, article_id, target_date),
            "actual_complete": last is not None and target_date <= last,
        }

    @app.post("/whatif")
    async def whatif(request: WhatIfRequest):
        return build_whatif_response(snap, request.title, request.body,
                                     request.planned_date, request.variant)

    if static_dir is not None:
        root = Path(static_dir)
        if not root.is_dir():
            raise ValidationError(f"static directory {root} does not exist")
        app.mount("/", StaticFiles(directory=root, html=True), name="dashboard")

    return app
