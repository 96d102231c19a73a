"""HTTP endpoints over a fitted snapshot.

Checks the response shapes, the status-code mapping (400 malformed, 404
unknown, 422 out of range) and that the what-if path returns exactly
what the library function computes.
"""

from __future__ import annotations

from datetime import timedelta

import pytest
from fastapi.testclient import TestClient

from newscast.articlepred import predict_article
from newscast.corpus import cumulative_visits
from newscast.forecast import forecast
from newscast.service import build_whatif_response, create_app, serving_context
from newscast.snapshot import load_snapshot


@pytest.fixture(scope="module")
def snap(snapshot_env):
    return load_snapshot(snapshot_env["snapshot"])


@pytest.fixture(scope="module")
def client(snap):
    return TestClient(create_app(snap))


@pytest.fixture(scope="module")
def tomorrow_draft(snap):
    """A draft reusing corpus text, planned for the day after the panel ends."""
    aid = snap.predictors["NN_T_PT"].test_ids[0]
    art = snap.corpus.articles[aid]
    return {
        "title": art.title,
        "body": art.body,
        "planned_date": (snap.panel.dates[-1] + timedelta(days=1)).isoformat(),
        "variant": "NN_T_PT",
    }


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok", "version": "1"}


def test_snapshot_meta(client, snap):
    meta = client.get("/snapshot").json()
    assert meta["version"] == snap.version
    assert meta["corpus_digest"] == snap.corpus_digest
    assert meta["n_articles"] == snap.corpus.n
    assert meta["n_topics"] == 3
    assert meta["variants"] == sorted(snap.predictors)
    assert meta["panel_start"] == snap.panel.dates[0].isoformat()
    assert meta["panel_end"] == snap.panel.dates[-1].isoformat()


def test_topics_lists_every_topic_with_plain_stems(client):
    topics = client.get("/topics").json()
    assert [t["id"] for t in topics] == [0, 1, 2]
    for t in topics:
        assert len(t["top_stems"]) == 10
        assert all(isinstance(w, str) for w in t["top_stems"])


def test_topic_volume_history_window_and_forecast(client, snap):
    resp = client.get("/topics/0/volume", params={"days": 5})
    assert resp.status_code == 200
    body = resp.json()
    history = body["history"]
    assert len(history) == 5
    assert history[-1]["date"] == snap.panel.dates[-1].isoformat()
    dates = [row["date"] for row in history]
    assert dates == sorted(dates)
    # forecast continues seamlessly from the panel end, one row per horizon
    horizon_h = snap.config["article"]["horizon_h"]
    fc = body["forecast"]
    assert [row["date"] for row in fc] == [
        (snap.panel.dates[-1] + timedelta(days=j)).isoformat()
        for j in range(1, horizon_h + 1)
    ]
    issue_day = snap.panel.dates[-1] + timedelta(days=1)
    want = forecast(snap.panel, snap.forecasters[(0, 1)], issue_day).value
    assert fc[0]["visits"] == want
    assert body["warnings"] == []


def test_topic_volume_unknown_topic(client):
    resp = client.get("/topics/99/volume")
    assert resp.status_code == 404
    assert "99" in resp.json()["error"]


def test_topic_volume_rejects_nonpositive_days(client):
    assert client.get("/topics/0/volume", params={"days": 0}).status_code == 400


def test_topic_volume_rejects_non_integer_days(client):
    resp = client.get("/topics/0/volume", params={"days": "soon"})
    assert resp.status_code == 400
    fields = [d["field"] for d in resp.json()["details"]]
    assert "query.days" in fields


def test_prediction_vs_actual_matches_direct_call(client, snap):
    predictor = snap.predictors["NN_T_PT"]
    aid = predictor.test_ids[0]
    resp = client.get(f"/articles/{aid}/prediction-vs-actual")
    assert resp.status_code == 200
    body = resp.json()

    ctx = serving_context(snap, predictor.config.horizon_h)
    article = snap.corpus.articles[aid]
    want = predict_article(predictor, article, ctx).predicted_cumulative_visits
    assert body["predicted_visits"] == want

    target_day = article.published_at + timedelta(days=predictor.config.horizon_h)
    assert body["actual_visits"] == cumulative_visits(snap.corpus, aid, target_day)
    assert body["actual_complete"] is True
    assert body["variant"] == "NN_T_PT"
    assert body["published_at"] == article.published_at.isoformat()


def test_prediction_vs_actual_variant_override(client, snap):
    aid = snap.predictors["NN_T_PT"].test_ids[0]
    resp = client.get(f"/articles/{aid}/prediction-vs-actual",
                      params={"variant": "T"})
    assert resp.status_code == 200
    assert resp.json()["variant"] == "T"


def test_prediction_vs_actual_unknown_article(client):
    resp = client.get("/articles/nope/prediction-vs-actual")
    assert resp.status_code == 404


def test_prediction_vs_actual_unknown_variant(client, snap):
    aid = snap.predictors["NN_T_PT"].test_ids[0]
    resp = client.get(f"/articles/{aid}/prediction-vs-actual",
                      params={"variant": "XXL"})
    assert resp.status_code == 400
    assert "XXL" in resp.json()["error"]


def test_prediction_vs_actual_insufficient_history(client, snap):
    earliest = min(snap.corpus.articles.values(),
                   key=lambda a: (a.published_at, a.id))
    assert earliest.published_at == snap.panel.dates[0]
    resp = client.get(f"/articles/{earliest.id}/prediction-vs-actual")
    assert resp.status_code == 422
    assert "insufficient history" in resp.json()["error"]


def test_whatif_matches_library_response(client, snap, tomorrow_draft):
    resp = client.post("/whatif", json=tomorrow_draft)
    assert resp.status_code == 200
    want = build_whatif_response(
        snap, tomorrow_draft["title"], tomorrow_draft["body"],
        snap.panel.dates[-1] + timedelta(days=1), "NN_T_PT")
    assert resp.json() == want


def test_whatif_response_contract(client, snap, tomorrow_draft):
    body = client.post("/whatif", json=tomorrow_draft).json()
    assert set(body) == {"predicted_visits", "variant", "planned_date",
                         "primary_topic", "neighbors", "volume_history",
                         "volume_forecast", "warnings"}
    assert body["predicted_visits"] >= 0.0
    assert body["primary_topic"]["id"] in snap.panel.topics
    sims = [n["similarity"] for n in body["neighbors"]]
    assert sims == sorted(sims, reverse=True)
    assert len(body["volume_history"]) == 14
    assert len(body["volume_forecast"]) == snap.config["article"]["horizon_h"]


def test_whatif_is_deterministic_across_requests(client, tomorrow_draft):
    first = client.post("/whatif", json=tomorrow_draft)
    second = client.post("/whatif", json=tomorrow_draft)
    assert first.content == second.content


def test_whatif_blank_title_reports_the_field(client, tomorrow_draft):
    resp = client.post("/whatif", json={**tomorrow_draft, "title": ""})
    assert resp.status_code == 400
    body = resp.json()
    assert body["error"] == "malformed request"
    assert any(d["field"].endswith("title") for d in body["details"])


def test_whatif_missing_date_reports_the_field(client, tomorrow_draft):
    incomplete = {k: v for k, v in tomorrow_draft.items() if k != "planned_date"}
    resp = client.post("/whatif", json=incomplete)
    assert resp.status_code == 400
    assert any(d["field"] == "body.planned_date"
               for d in resp.json()["details"])


def test_whatif_malformed_json(client):
    resp = client.post("/whatif", content="{not json",
                       headers={"content-type": "application/json"})
    assert resp.status_code == 400
    assert resp.json()["error"] == "malformed request"


def test_whatif_unknown_variant_lists_available(client, snap, tomorrow_draft):
    resp = client.post("/whatif", json={**tomorrow_draft, "variant": "XXL"})
    assert resp.status_code == 400
    assert "NN_T_PT" in resp.json()["error"]


def test_whatif_rejects_early_variant_for_drafts(client, tomorrow_draft):
    resp = client.post("/whatif", json={**tomorrow_draft, "variant": "EARLY_6h"})
    assert resp.status_code == 400
    assert "unpublished draft" in resp.json()["error"]


def test_whatif_too_early_date(client, snap, tomorrow_draft):
    early = {**tomorrow_draft,
             "planned_date": snap.panel.dates[0].isoformat()}
    resp = client.post("/whatif", json=early)
    assert resp.status_code == 422
    assert "insufficient history" in resp.json()["error"]


# -- optional dashboard mount ------------------------------------------------


def test_static_mount_serves_dashboard_files(snap, tmp_path):
    (tmp_path / "index.html").write_text("<!doctype html><title>console</title>")
    (tmp_path / "style.css").write_text("body { margin: 0 }")
    client = TestClient(create_app(snap, static_dir=tmp_path))
    root = client.get("/")
    assert root.status_code == 200
    assert "console" in root.text
    assert client.get("/style.css").text.startswith("body")
    # API routes keep precedence over the mount
    assert client.get("/health").json()["status"] == "ok"


def test_static_mount_requires_existing_directory(snap, tmp_path):
    from newscast.errors import ValidationError
    with pytest.raises(ValidationError, match="does not exist"):
        create_app(snap, static_dir=tmp_path / "missing")
