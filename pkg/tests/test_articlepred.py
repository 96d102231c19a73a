"""Pre-publication article prediction: neighbor retrieval, the visit
aggregate, feature assembly, fitting, and the early-measurement variant.

Two oracle families anchor this file.  The aggregate hand cases fix the
weighted-average arithmetic exactly.  The early-measurement corpus is
built so the target is 3 * early + 2 on every article, which the
log-space regression must recover to float precision.
"""

from __future__ import annotations

from datetime import timedelta
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from newscast.articlepred import (
    ArticlePredictorConfig,
    Draft,
    FittedArticlePredictor,
    NeighborSet,
    PredictionContext,
    PredictorVariant,
    TopicVolumeForecasts,
    eligible_ids,
    evaluate_article_predictor,
    evaluation_csv,
    fit_article_predictor,
    neighbor_set,
    nn_aggregate,
    predict_article,
    predictor_key,
    report_label,
    topic_forecasts_for,
)
from newscast.corpus import VisitSeries, build_corpus
from newscast.errors import DomainError, ValidationError
from newscast.forecast import build_panel
from newscast.synth import SynthSpec, diagonal_var, generate_synthetic
from newscast.textproc import build_tfidf
from newscast.topics import LdaConfig, fit_lda, tokenize_corpus

from conftest import day, make_article


# ---------------------------------------------------------------------------
# variant bookkeeping


def test_variant_feature_flags():
    v = PredictorVariant
    assert v.NN.uses_neighbors and not v.NN.uses_topic_volume
    assert v.T.uses_topic_volume and not v.T.uses_neighbors
    assert v.NN_T.uses_neighbors and v.NN_T.uses_topic_volume
    assert v.NN_T_PT.uses_volume_forecast and not v.NN_T.uses_volume_forecast
    assert v.EARLY.uses_early_counts and not v.EARLY.uses_neighbors
    assert v.EARLY_NN_T_PT.uses_early_counts and v.EARLY_NN_T_PT.uses_volume_forecast


def test_config_validation():
    with pytest.raises(ValidationError):
        ArticlePredictorConfig(theta=0.0).validate()
    with pytest.raises(ValidationError):
        ArticlePredictorConfig(theta=1.2).validate()
    with pytest.raises(ValidationError):
        ArticlePredictorConfig(variant=PredictorVariant.EARLY).validate()
    with pytest.raises(ValidationError):
        ArticlePredictorConfig(early_offset="6h").validate()
    with pytest.raises(ValidationError):
        ArticlePredictorConfig(variant=PredictorVariant.EARLY,
                               early_offset="2h").validate()
    ArticlePredictorConfig(variant=PredictorVariant.EARLY, early_offset="1h").validate()


def test_predictor_key_and_report_label():
    nn = ArticlePredictorConfig(variant=PredictorVariant.NN)
    early = ArticlePredictorConfig(variant=PredictorVariant.EARLY, early_offset="5m")
    ext = ArticlePredictorConfig(variant=PredictorVariant.EARLY_NN_T_PT,
                                 early_offset="6h")
    assert predictor_key(nn) == "NN"
    assert predictor_key(early) == "EARLY_5m"
    assert predictor_key(ext) == "EARLY_NN_T_PT_6h"
    assert report_label(nn) == "NN"
    assert report_label(ext) == "EARLY_NN_T_PT_6h (extension)"


# ---------------------------------------------------------------------------
# neighbor retrieval and the visit aggregate


@pytest.fixture
def twin_corpus():
    """Two identical texts published on different days, plus filler."""
    articles = [
        make_article("t1", "glacier survey results", "the glacier survey results startled the team", day(0)),
        make_article("t2", "glacier survey results", "the glacier survey results startled the team", day(2)),
        make_article("t3", "harbor expansion vote", "council votes on the harbor expansion plan", day(0)),
        make_article("t4", "orchard frost damage", "late frost damages the orchard crop", day(1)),
    ]
    series = [
        VisitSeries("t1", ((day(0), 100), (day(1), 7), (day(2), 999), (day(3), 50))),
        VisitSeries("t3", ((day(0), 40),)),
        VisitSeries("t4", ((day(1), 60),)),
    ]
    corpus = build_corpus(articles, series)
    return corpus, build_tfidf(corpus)


def test_neighbor_set_sorted_and_excludes_anchor(twin_corpus):
    corpus, index = twin_corpus
    anchor = corpus.article("t2")
    ns = neighbor_set(index, corpus, anchor, day(0), theta=0.01)
    ids = [aid for aid, _ in ns.members]
    sims = [s for _, s in ns.members]
    assert "t2" not in ids
    assert ids[0] == "t1"
    assert sims[0] == pytest.approx(1.0)   # identical text
    assert sims == sorted(sims, reverse=True)


def test_neighbor_day_must_precede_publication(twin_corpus):
    corpus, index = twin_corpus
    anchor = corpus.article("t2")
    with pytest.raises(DomainError):
        neighbor_set(index, corpus, anchor, day(2), theta=0.1)
    with pytest.raises(DomainError):
        neighbor_set(index, corpus, anchor, day(3), theta=0.1)


def test_raising_theta_can_only_shrink_the_set(twin_corpus):
    corpus, index = twin_corpus
    anchor = corpus.article("t2")
    lo = {aid for aid, _ in neighbor_set(index, corpus, anchor, day(0), 0.01).members}
    hi = {aid for aid, _ in neighbor_set(index, corpus, anchor, day(0), 0.9).members}
    assert hi <= lo
    assert "t1" in hi


def test_nn_aggregate_single_neighbor_is_its_visits(twin_corpus):
    corpus, _ = twin_corpus
    ns = NeighborSet(anchor="t2", day=day(0), theta=0.5, members=[("t1", 0.98)])
    # t_a = day 2: cumulative through day 1 is 100 + 7
    agg = nn_aggregate(ns, corpus, t_a=day(2))
    assert agg.value == pytest.approx(107.0)
    assert not agg.empty


def test_nn_aggregate_never_reads_publication_day_or_later(twin_corpus):
    corpus, _ = twin_corpus
    ns = NeighborSet(anchor="t2", day=day(0), theta=0.5, members=[("t1", 0.98)])
    # the 999 on day 2 and 50 on day 3 must be invisible at t_a = day 2
    assert nn_aggregate(ns, corpus, t_a=day(2)).value == pytest.approx(107.0)
    assert nn_aggregate(ns, corpus, t_a=day(1)).value == pytest.approx(100.0)


def test_nn_aggregate_two_neighbor_hand_case():
    corpus = build_corpus([
        make_article("m1", "alpha beta", "alpha beta gamma", day(0)),
        make_article("m2", "delta epsilon", "delta epsilon zeta", day(0)),
        make_article("mx", "eta theta", "eta theta iota", day(1)),
    ], [
        VisitSeries("m1", ((day(0), 100),)),
        VisitSeries("m2", ((day(0), 300),)),
    ])
    ns = NeighborSet(anchor="mx", day=day(0), theta=0.05,
                     members=[("m1", 0.3), ("m2", 0.1)])
    # (0.3 * 100 + 0.1 * 300) / (0.3 + 0.1)
    assert nn_aggregate(ns, corpus, t_a=day(1)).value == pytest.approx(150.0)
    # literal form normalizes by visits instead: 60 / 400
    literal = nn_aggregate(ns, corpus, t_a=day(1), literal_formula=True)
    assert literal.value == pytest.approx(0.15)


def test_nn_aggregate_empty_set_is_flagged_zero(twin_corpus):
    corpus, _ = twin_corpus
    ns = NeighborSet(anchor="t2", day=day(0), theta=0.99, members=[])
    agg = nn_aggregate(ns, corpus, t_a=day(2))
    assert (agg.value, agg.empty) == (0.0, True)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.tuples(st.floats(min_value=0.05, max_value=1.0),
                  st.integers(min_value=0, max_value=1000)),
        min_size=1, max_size=6,
    )
)
def test_nn_aggregate_bounded_by_member_visits(pairs):
    articles = [make_article(f"p{i}", f"word{i} text", f"body word{i}", day(0))
                for i in range(len(pairs))]
    articles.append(make_article("px", "anchor words", "anchor body", day(1)))
    series = [VisitSeries(f"p{i}", ((day(0), visits),))
              for i, (_, visits) in enumerate(pairs)]
    corpus = build_corpus(articles, series)
    ns = NeighborSet(anchor="px", day=day(0), theta=0.01,
                     members=[(f"p{i}", sim) for i, (sim, _) in enumerate(pairs)])
    value = nn_aggregate(ns, corpus, t_a=day(1)).value
    visits = [v for _, v in pairs]
    assert min(visits) - 1e-9 <= value <= max(visits) + 1e-9


# ---------------------------------------------------------------------------
# topic-volume forecast provider


def test_provider_horizon_is_article_horizon_plus_one(var_panel):
    config = ArticlePredictorConfig(horizon_h=3)
    provider = topic_forecasts_for(var_panel, config, window_days=12)
    assert provider.horizon == 4
    assert provider.min_day_index() == 12


def test_provider_rejects_days_without_window(var_panel):
    provider = TopicVolumeForecasts(panel=var_panel, horizon=2, window_days=12)
    with pytest.raises(DomainError):
        provider.value(0, var_panel.dates[5])


def test_provider_caches_per_topic_day(var_panel):
    provider = TopicVolumeForecasts(panel=var_panel, horizon=2, window_days=12,
                                    delta=2, s=2)
    t = var_panel.dates[20]
    first = provider.value(0, t)
    assert len(provider._cache) == 1
    assert provider.value(0, t) == first
    assert len(provider._cache) == 1
    provider.value(1, t)
    assert len(provider._cache) == 2


def test_provider_tracks_noiseless_volumes(var_panel):
    provider = TopicVolumeForecasts(panel=var_panel, horizon=3, window_days=20,
                                    delta=2, s=3, epsilon=0.01)
    for ti in (25, 30):
        t = var_panel.dates[ti]
        want = var_panel.values[0, ti + 2]          # value(u, t) targets t + h - 1
        assert provider.value(0, t) == pytest.approx(want, rel=0.1)


# ---------------------------------------------------------------------------
# fitting on a small synthetic corpus


@pytest.fixture(scope="module")
def ctx():
    spec = SynthSpec(
        k_true=2, vocab_size=80, n_articles=80, n_days=30,
        var_coefficients=diagonal_var(2, 1), noise_scale=0.1,
        shared_vocab_fraction=0.0, doc_topic_alpha=0.12, seed=9,
    )
    corpus, _ = generate_synthetic(spec)
    stems = tokenize_corpus(corpus)
    model = fit_lda(corpus, stems, LdaConfig(k=2, iterations=150, burn_in=75, seed=0))
    index = build_tfidf(corpus)
    panel = build_panel(corpus, model)
    return PredictionContext(corpus=corpus, index=index, panel=panel,
                             topic_model=model)


def test_feature_names_follow_vector_layout():
    nn_t_pt = ArticlePredictorConfig(variant=PredictorVariant.NN_T_PT, delta=2)
    fitted_names = [
        "nn_lag2", "nn_lag1", "nn_empty_lag2", "nn_empty_lag1",
        "volume_lag2", "volume_lag1", "volume_forecast",
    ]
    from newscast.articlepred import _feature_names
    assert _feature_names(nn_t_pt) == fitted_names
    early = ArticlePredictorConfig(variant=PredictorVariant.EARLY,
                                   early_offset="6h")
    assert _feature_names(early) == ["log_early_6h"]


def test_eligible_ids_chronological_and_bounded(ctx):
    config = ArticlePredictorConfig(variant=PredictorVariant.T, horizon_h=2, delta=2)
    ids = eligible_ids(ctx, config)
    assert len(ids) >= 5
    pubs = [ctx.corpus.articles[a].published_at for a in ids]
    assert pubs == sorted(pubs)
    last = ctx.corpus.date_range[1]
    start = ctx.panel.dates[0]
    for aid, pub in zip(ids, pubs):
        assert pub + timedelta(days=2) <= last       # target observable
        assert pub - timedelta(days=2) >= start      # lags available
    # ids with equal dates are ordered lexically
    assert ids == sorted(ids, key=lambda a: (ctx.corpus.articles[a].published_at, a))


def test_split_is_chronological_and_seed_free(ctx):
    config = ArticlePredictorConfig(variant=PredictorVariant.T, horizon_h=2, delta=2)
    a = fit_article_predictor(ctx, config, split_seed=0)
    b = fit_article_predictor(ctx, config, split_seed=99)
    assert a.train_ids == b.train_ids and a.test_ids == b.test_ids
    np.testing.assert_array_equal(a.weights, b.weights)
    last_train = ctx.corpus.articles[a.train_ids[-1]].published_at
    first_test = ctx.corpus.articles[a.test_ids[0]].published_at
    assert last_train <= first_test
    assert len(a.train_ids) == round(0.8 * (len(a.train_ids) + len(a.test_ids)))


@pytest.mark.parametrize("variant", [PredictorVariant.NN, PredictorVariant.T,
                                     PredictorVariant.NN_T])
def test_fit_and_evaluate_each_core_variant(ctx, variant):
    config = ArticlePredictorConfig(variant=variant, horizon_h=2, delta=2,
                                    theta=0.05)
    fitted = fit_article_predictor(ctx, config)
    assert len(fitted.weights) == len(fitted.feature_names)
    row = evaluate_article_predictor(fitted, ctx)
    assert np.isfinite(row.mape) and row.mape >= 0
    assert row.n_test + row.n_skipped == len(fitted.test_ids)
    assert row.variant == variant.value


def test_prediction_identical_for_article_and_equivalent_draft(ctx):
    config = ArticlePredictorConfig(variant=PredictorVariant.NN, horizon_h=2,
                                    delta=2, theta=0.05)
    fitted = fit_article_predictor(ctx, config)
    aid = fitted.test_ids[0]
    art = ctx.corpus.articles[aid]
    by_id = predict_article(fitted, aid, ctx)
    by_article = predict_article(fitted, art, ctx)
    draft = Draft(title=art.title, body=art.body, planned_date=art.published_at)
    by_draft = predict_article(fitted, draft, ctx)
    assert by_id.predicted_cumulative_visits == by_article.predicted_cumulative_visits
    assert by_draft.predicted_cumulative_visits == pytest.approx(
        by_id.predicted_cumulative_visits
    )
    assert by_draft.article_id is None
    assert by_id.article_id == aid


def test_prediction_components_reported(ctx):
    config = ArticlePredictorConfig(variant=PredictorVariant.NN_T, horizon_h=2,
                                    delta=2, theta=0.05)
    fitted = fit_article_predictor(ctx, config)
    pred = predict_article(fitted, fitted.test_ids[0], ctx)
    assert len(pred.nn_aggregates) == 2
    assert len(pred.nn_empty_flags) == 2
    assert len(pred.topic_volumes) == 2
    assert pred.predicted_topic_volume is None
    assert pred.primary_topic in (0, 1)


def test_negative_prediction_clamps(ctx):
    config = ArticlePredictorConfig(variant=PredictorVariant.T, horizon_h=2, delta=2)
    fitted = fit_article_predictor(ctx, config)
    rigged = FittedArticlePredictor(
        config=config, weights=np.zeros_like(fitted.weights), intercept=-10.0,
        feature_names=fitted.feature_names, train_ids=fitted.train_ids,
        test_ids=fitted.test_ids, log_scale=False,
    )
    pred = predict_article(rigged, fitted.test_ids[0], ctx)
    assert pred.predicted_cumulative_visits == 0.0
    assert pred.clamped


def test_too_few_eligible_articles_rejected(twin_corpus):
    corpus, index = twin_corpus
    model = SimpleNamespace(primary_topic={aid: 0 for aid in corpus.articles},
                            topic_word=np.zeros((1, 1)))
    panel = build_panel(corpus, model)
    local = PredictionContext(corpus=corpus, index=index, panel=panel,
                              topic_model=model)
    with pytest.raises(DomainError):
        fit_article_predictor(local, ArticlePredictorConfig(
            variant=PredictorVariant.T, horizon_h=1, delta=1))


# ---------------------------------------------------------------------------
# early-measurement variant


@pytest.fixture(scope="module")
def early_ctx():
    """Synthetic relation: target = 3 * early + 2, exactly, per article.

    In log space that is log1p(target) = ln 3 + log1p(early), which the
    regression must recover to float precision.
    """
    articles = [make_article("pad", "span opener", "anchors the panel start", day(0))]
    series = [VisitSeries("pad", ((day(0), 5),))]
    early_values = [10, 25, 40, 60, 85, 115, 150, 190, 235, 285, 340, 400]
    for i, e in enumerate(early_values):
        pub = day(3 + i // 2)
        aid = f"e{i:02d}"
        articles.append(make_article(aid, f"piece {i} alpha", f"body {i} beta", pub))
        series.append(VisitSeries(aid, ((pub, 3 * e + 2),),
                                  early=((360, e),)))
    articles.append(make_article("ext", "range extender", "keeps the span wide",
                                 day(12)))
    corpus = build_corpus(articles, series)
    model = SimpleNamespace(primary_topic={aid: 0 for aid in corpus.articles},
                            topic_word=np.zeros((1, 1)), vocabulary=[])
    panel = build_panel(corpus, model)
    index = build_tfidf(corpus)
    return PredictionContext(corpus=corpus, index=index, panel=panel,
                             topic_model=model)


def test_early_exact_fraction_recovered(early_ctx):
    config = ArticlePredictorConfig(variant=PredictorVariant.EARLY,
                                    early_offset="6h", horizon_h=3, delta=3)
    fitted = fit_article_predictor(early_ctx, config)
    assert fitted.log_scale
    row = evaluate_article_predictor(fitted, early_ctx)
    assert row.mape < 1e-6
    for aid in fitted.test_ids:
        pred = predict_article(fitted, aid, early_ctx)
        e = dict(early_ctx.corpus.visits[aid].early)[360]
        assert pred.predicted_cumulative_visits == pytest.approx(3 * e + 2)


def test_early_variant_rejects_drafts(early_ctx):
    config = ArticlePredictorConfig(variant=PredictorVariant.EARLY,
                                    early_offset="6h", horizon_h=3, delta=3)
    fitted = fit_article_predictor(early_ctx, config)
    draft = Draft(title="unpublished", body="words here", planned_date=day(8))
    with pytest.raises(DomainError):
        predict_article(fitted, draft, early_ctx)


def test_early_requires_measured_offset(early_ctx):
    config = ArticlePredictorConfig(variant=PredictorVariant.EARLY,
                                    early_offset="1h", horizon_h=3, delta=3)
    # no article carries a 1h measurement, so nothing is eligible
    assert eligible_ids(early_ctx, config) == []


def test_evaluation_csv_layout(ctx):
    config = ArticlePredictorConfig(variant=PredictorVariant.T, horizon_h=2, delta=2)
    fitted = fit_article_predictor(ctx, config)
    rows = [evaluate_article_predictor(fitted, ctx)]
    text = evaluation_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == "variant,theta,delta,mape,n_test,n_skipped"
    assert lines[1].startswith("T,")
    assert len(lines) == 2
