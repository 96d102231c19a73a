"""Pre-publication article popularity prediction.

Predicts the cumulative visits an article will collect in its first h
days, before it is published.  Feature families:

* NN: similarity-weighted visit averages over textual neighbours
  published on each of the delta days before publication;
* T: the recent daily volume of the article's primary topic;
* NN_T: both; NN_T_PT: both plus a forecast of the topic volume at the
  prediction horizon;
* EARLY: post-publication baseline regressing log early visits against
  log target visits, for calibrating how much pre-publication signal is
  worth.

All pre-publication features read only data dated strictly before the
article's publication date; tests pin this by perturbing later data and
asserting bit-identical predictions.

Also houses shelf-life and the descriptive corpus analytics (popularity
CCDF, normalized growth curves, shelf-life distributions).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import date, timedelta
from enum import Enum

import numpy as np

from .corpus import Article, Corpus, Kind, cumulative_visits
from .errors import DomainError, UndefinedStatisticError, ValidationError
from .forecast import FeatureSchema, ForecasterKind, LagSpec, TopicVolumePanel, fit_forecaster, forecast, mape, select_features
from .textproc import TfIdfIndex, TokenPipelineConfig, cosine_sparse, preprocess
from .topics import TopicModel, infer_doc_topics

EARLY_OFFSET_MINUTES = {"5m": 5, "1h": 60, "6h": 360}


class PredictorVariant(str, Enum):
    NN = "NN"
    T = "T"
    NN_T = "NN_T"
    NN_T_PT = "NN_T_PT"
    EARLY = "EARLY"
    # not part of the core variant set: every pre-publication feature plus the
    # early measurement, reported alongside the others for comparison
    EARLY_NN_T_PT = "EARLY_NN_T_PT"

    @property
    def uses_neighbors(self) -> bool:
        return self in (PredictorVariant.NN, PredictorVariant.NN_T,
                        PredictorVariant.NN_T_PT, PredictorVariant.EARLY_NN_T_PT)

    @property
    def uses_topic_volume(self) -> bool:
        return self in (PredictorVariant.T, PredictorVariant.NN_T,
                        PredictorVariant.NN_T_PT, PredictorVariant.EARLY_NN_T_PT)

    @property
    def uses_volume_forecast(self) -> bool:
        return self in (PredictorVariant.NN_T_PT, PredictorVariant.EARLY_NN_T_PT)

    @property
    def uses_early_counts(self) -> bool:
        return self in (PredictorVariant.EARLY, PredictorVariant.EARLY_NN_T_PT)


@dataclass(frozen=True)
class ArticlePredictorConfig:
    horizon_h: int = 3
    delta: int = 3
    theta: float = 0.1
    variant: PredictorVariant = PredictorVariant.NN_T_PT
    early_offset: str | None = None   # one of EARLY_OFFSET_MINUTES, EARLY only
    literal_formula: bool = False     # normalize the NN aggregate by visits, not similarity
    min_history_days: int | None = None   # extra history requirement, e.g. to align test sets

    def validate(self) -> None:
        if self.horizon_h < 1:
            raise ValidationError("horizon_h must be >= 1")
        if self.delta < 1:
            raise ValidationError("delta must be >= 1")
        if not 0 < self.theta <= 1:
            raise ValidationError("theta must be in (0, 1]")
        if self.variant.uses_early_counts != (self.early_offset is not None):
            raise ValidationError("early_offset is required for EARLY variants and forbidden otherwise")
        if self.early_offset is not None and self.early_offset not in EARLY_OFFSET_MINUTES:
            raise ValidationError(f"early_offset must be one of {sorted(EARLY_OFFSET_MINUTES)}")


def predictor_key(config: ArticlePredictorConfig) -> str:
    """Stable identifier for a fitted variant; EARLY carries its offset."""
    if config.variant.uses_early_counts:
        return f"{config.variant.value}_{config.early_offset}"
    return config.variant.value


def report_label(config: ArticlePredictorConfig) -> str:
    """Variant name as shown in reports; the combined early + forecast
    feature set is flagged as an extension of the core variants."""
    key = predictor_key(config)
    if config.variant is PredictorVariant.EARLY_NN_T_PT:
        return f"{key} (extension)"
    return key


@dataclass(frozen=True)
class Draft:
    """An unpublished article: the what-if query surface."""

    title: str
    body: str
    planned_date: date


@dataclass(eq=False)
class NeighborSet:
    anchor: str | None          # None for drafts
    day: date
    theta: float
    members: list[tuple[str, float]]   # (article_id, similarity), similarity descending


@dataclass(frozen=True)
class NnValue:
    value: float
    empty: bool


def _neighbors_of_vector(index: TfIdfIndex, corpus: Corpus, vec: dict[int, float],
                         day: date, theta: float,
                         exclude_id: str | None) -> list[tuple[str, float]]:
    members = []
    for aid in corpus.ids_by_date().get(day, []):
        if aid == exclude_id:
            continue
        sim = cosine_sparse(vec, index.doc_vectors[aid])
        if sim >= theta:
            members.append((aid, sim))
    members.sort(key=lambda m: (-m[1], m[0]))
    return members


def neighbor_set(index: TfIdfIndex, corpus: Corpus, anchor: Article,
                 day: date, theta: float) -> NeighborSet:
    """Same-day-published articles textually close to the anchor.

    Only past days are allowed: neighbour visits feed pre-publication
    features.
    """
    if day >= anchor.published_at:
        raise DomainError(
            f"neighbor day {day.isoformat()} is not before publication "
            f"{anchor.published_at.isoformat()}"
        )
    members = _neighbors_of_vector(index, corpus, index.doc_vectors[anchor.id],
                                   day, theta, exclude_id=anchor.id)
    return NeighborSet(anchor=anchor.id, day=day, theta=theta, members=members)


def nn_aggregate(neighbors: NeighborSet, corpus: Corpus, t_a: date,
                 literal_formula: bool = False) -> NnValue:
    """Similarity-weighted average of neighbours' pre-publication visits.

    Visits accumulate through the day before t_a, so the aggregate never
    reads data from the anchor's publication day onward.  The
    literal_formula switch normalizes by total visits instead of total
    similarity; it exists for comparison only.
    """
    if not neighbors.members:
        return NnValue(value=0.0, empty=True)
    upto = t_a - timedelta(days=1)
    sims = np.array([s for _, s in neighbors.members])
    visits = np.array([
        float(cumulative_visits(corpus, aid, upto)) for aid, _ in neighbors.members
    ])
    if literal_formula:
        denom = visits.sum()
        return NnValue(value=float((sims * visits).sum() / denom) if denom else 0.0,
                       empty=False)
    return NnValue(value=float((sims * visits).sum() / sims.sum()), empty=False)


# ---------------------------------------------------------------------------
# topic-volume forecasts for the PT term


@dataclass(eq=False)
class TopicVolumeForecasts:
    """Cached sliding-window SVR forecasts of topic volume.

    value(u, t) predicts V(u, t + horizon - 1) from data before day t,
    fitting one model per (topic, day) on the window ending the day
    before t.
    """

    panel: TopicVolumePanel
    horizon: int
    window_days: int = 40
    delta: int = 2
    s: int = 4
    kind: ForecasterKind = ForecasterKind.SVR
    c: float = 1.0
    epsilon: float = 0.1
    tol: float = 1e-4          # looser than the backtest default; hundreds of fits
    _cache: dict = field(default_factory=dict, repr=False)

    def min_day_index(self) -> int:
        return self.window_days

    def value(self, topic: int, t: date) -> float:
        key = (topic, t)
        if key not in self._cache:
            t_index = (t - self.panel.dates[0]).days
            if t_index < self.window_days:
                raise DomainError(
                    f"day {t.isoformat()} lacks the {self.window_days} days of "
                    f"history needed for a topic forecast"
                )
            window = (self.panel.dates[t_index - self.window_days],
                      self.panel.dates[t_index - 1])
            schema = select_features(self.panel, topic, s=self.s,
                                     window=window, delta=self.delta)
            fitted = fit_forecaster(self.panel, schema, self.kind, self.horizon,
                                    window, c=self.c, epsilon=self.epsilon,
                                    tol=self.tol)
            self._cache[key] = forecast(self.panel, fitted, t).value
        return self._cache[key]


def topic_forecasts_for(panel: TopicVolumePanel, config: ArticlePredictorConfig,
                        **kwargs) -> TopicVolumeForecasts:
    """Provider whose forecasts land exactly on the article horizon.

    Predicting V(u, t_a + h) from day t_a takes a direct forecaster with
    horizon h + 1, since a horizon-h' model issued at t predicts day
    t + h' - 1.
    """
    return TopicVolumeForecasts(panel=panel, horizon=config.horizon_h + 1, **kwargs)


# ---------------------------------------------------------------------------
# the predictor


@dataclass(eq=False)
class PredictionContext:
    corpus: Corpus
    index: TfIdfIndex
    panel: TopicVolumePanel
    topic_model: TopicModel
    topic_forecasts: TopicVolumeForecasts | None = None
    pipeline: TokenPipelineConfig = field(default_factory=TokenPipelineConfig)


@dataclass(eq=False)
class FittedArticlePredictor:
    config: ArticlePredictorConfig
    weights: np.ndarray
    intercept: float
    feature_names: list[str]
    train_ids: list[str]
    test_ids: list[str]
    log_scale: bool              # EARLY fits in log space


@dataclass(eq=False)
class ArticlePrediction:
    article_id: str | None       # None for drafts
    predicted_cumulative_visits: float
    clamped: bool
    variant: PredictorVariant
    nn_aggregates: list[float]
    nn_empty_flags: list[bool]
    topic_volumes: list[float]
    predicted_topic_volume: float | None
    primary_topic: int


def _resolve_topic(ctx: PredictionContext, item: Article | Draft) -> int:
    if isinstance(item, Draft):
        stems = preprocess(item.title + " " + item.body, ctx.pipeline)
        return int(np.argmax(infer_doc_topics(ctx.topic_model, stems).relevance))
    try:
        return ctx.topic_model.primary_topic[item.id]
    except KeyError:
        raise DomainError(f"article {item.id!r} has no topic assignment") from None


def _vector_for(ctx: PredictionContext, item: Article | Draft) -> dict[int, float]:
    if isinstance(item, Draft):
        stems = preprocess(item.title + " " + item.body, ctx.pipeline)
        return ctx.index.vectorize(stems)
    return ctx.index.doc_vectors[item.id]


def _pub_date(item: Article | Draft) -> date:
    return item.planned_date if isinstance(item, Draft) else item.published_at


def _check_history(ctx: PredictionContext, config: ArticlePredictorConfig,
                   t_a: date) -> None:
    need = config.delta
    if config.variant.uses_volume_forecast and ctx.topic_forecasts is not None:
        need = max(need, ctx.topic_forecasts.min_day_index())
    if config.min_history_days is not None:
        need = max(need, config.min_history_days)
    start = ctx.panel.dates[0]
    first_needed = t_a - timedelta(days=need)
    if first_needed < start:
        missing = [
            (start - timedelta(days=d)).isoformat()
            for d in range(1, (start - first_needed).days + 1)
        ]
        missing.reverse()
        raise DomainError(
            f"insufficient history before {t_a.isoformat()}: panel is missing "
            + ", ".join(missing)
        )


def _feature_vector(ctx: PredictionContext, config: ArticlePredictorConfig,
                    item: Article | Draft):
    """Features, NN components, topic components for one article or draft."""
    t_a = _pub_date(item)
    _check_history(ctx, config, t_a)
    u = _resolve_topic(ctx, item)
    variant = config.variant
    nn_vals: list[float] = []
    nn_empty: list[bool] = []
    topic_vals: list[float] = []
    pt_val: float | None = None
    feats: list[float] = []
    exclude = None if isinstance(item, Draft) else item.id

    if variant.uses_neighbors:
        vec = _vector_for(ctx, item)
        for lag in range(config.delta, 0, -1):
            day = t_a - timedelta(days=lag)
            members = _neighbors_of_vector(ctx.index, ctx.corpus, vec, day,
                                           config.theta, exclude)
            ns = NeighborSet(anchor=exclude, day=day, theta=config.theta,
                             members=members)
            agg = nn_aggregate(ns, ctx.corpus, t_a, config.literal_formula)
            nn_vals.append(agg.value)
            nn_empty.append(agg.empty)
        feats.extend(nn_vals)
        feats.extend(1.0 if e else 0.0 for e in nn_empty)

    if variant.uses_topic_volume:
        ui = ctx.panel.topics.index(u)
        for lag in range(config.delta, 0, -1):
            day_index = (t_a - timedelta(days=lag) - ctx.panel.dates[0]).days
            if not 0 <= day_index < ctx.panel.n_days:
                raise DomainError(
                    f"panel lacks volume for {(t_a - timedelta(days=lag)).isoformat()}"
                )
            topic_vals.append(float(ctx.panel.values[ui, day_index]))
        feats.extend(topic_vals)

    if variant.uses_volume_forecast:
        if ctx.topic_forecasts is None:
            raise DomainError(f"{variant.value} needs a topic forecast provider in the context")
        pt_val = ctx.topic_forecasts.value(u, t_a)
        feats.append(pt_val)

    if variant.uses_early_counts:
        if isinstance(item, Draft):
            raise DomainError("EARLY variants need measured early visits; drafts have none")
        offset = EARLY_OFFSET_MINUTES[config.early_offset]
        early = dict(ctx.corpus.visits[item.id].early)
        if offset not in early:
            raise DomainError(
                f"article {item.id!r} has no early count at {config.early_offset}"
            )
        feats.append(math.log1p(float(early[offset])))

    return np.asarray(feats), nn_vals, nn_empty, topic_vals, pt_val, u


def _feature_names(config: ArticlePredictorConfig) -> list[str]:
    names: list[str] = []
    v = config.variant
    if v.uses_neighbors:
        names += [f"nn_lag{lag}" for lag in range(config.delta, 0, -1)]
        names += [f"nn_empty_lag{lag}" for lag in range(config.delta, 0, -1)]
    if v.uses_topic_volume:
        names += [f"volume_lag{lag}" for lag in range(config.delta, 0, -1)]
    if v.uses_volume_forecast:
        names.append("volume_forecast")
    if v.uses_early_counts:
        names.append(f"log_early_{config.early_offset}")
    return names


def _target(corpus: Corpus, aid: str, t_a: date, horizon: int) -> float:
    return float(cumulative_visits(corpus, aid, t_a + timedelta(days=horizon)))


def eligible_ids(ctx: PredictionContext, config: ArticlePredictorConfig) -> list[str]:
    """Articles with full feature history and an observable target, in
    chronological (publication date, id) order."""
    if ctx.corpus.date_range is None:
        raise DomainError("corpus has no dated articles")
    last = ctx.corpus.date_range[1]
    out = []
    for aid in sorted(ctx.corpus.articles,
                      key=lambda a: (ctx.corpus.articles[a].published_at, a)):
        art = ctx.corpus.articles[aid]
        t_a = art.published_at
        if t_a + timedelta(days=config.horizon_h) > last:
            continue
        try:
            _check_history(ctx, config, t_a)
        except DomainError:
            continue
        if config.variant.uses_early_counts:
            early = dict(ctx.corpus.visits[aid].early)
            if EARLY_OFFSET_MINUTES[config.early_offset] not in early:
                continue
        out.append(aid)
    return out


def fit_article_predictor(ctx: PredictionContext, config: ArticlePredictorConfig,
                          split_seed: int = 0) -> FittedArticlePredictor:
    """Fit the variant's linear regression on the chronologically earliest
    80% of eligible articles.

    The split is chronological, so split_seed is accepted for interface
    stability but never changes the outcome.
    """
    del split_seed
    config.validate()
    ids = eligible_ids(ctx, config)
    n = len(ids)
    if n < 5:
        raise DomainError(f"only {n} eligible articles; cannot split")
    n_train = min(n - 1, max(1, int(round(0.8 * n))))
    train_ids, test_ids = ids[:n_train], ids[n_train:]

    rows, targets = [], []
    for aid in train_ids:
        art = ctx.corpus.articles[aid]
        feats, *_ = _feature_vector(ctx, config, art)
        rows.append(feats)
        y = _target(ctx.corpus, aid, art.published_at, config.horizon_h)
        targets.append(math.log1p(y) if config.variant is PredictorVariant.EARLY else y)
    x = np.stack(rows)
    y = np.asarray(targets)
    if x.shape[0] < x.shape[1] + 2:
        raise DomainError(
            f"{x.shape[0]} training articles for {x.shape[1]} features; need "
            f"at least {x.shape[1] + 2}"
        )
    design = np.column_stack([x, np.ones(x.shape[0])])
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    return FittedArticlePredictor(
        config=config,
        weights=coef[:-1],
        intercept=float(coef[-1]),
        feature_names=_feature_names(config),
        train_ids=train_ids,
        test_ids=test_ids,
        log_scale=config.variant is PredictorVariant.EARLY,
    )


def predict_article(fitted: FittedArticlePredictor, item: Article | Draft | str,
                    ctx: PredictionContext) -> ArticlePrediction:
    """Apply the fitted regression to an article or draft.

    Deterministic; negative predictions clamp to zero with a flag.
    """
    if isinstance(item, str):
        item = ctx.corpus.article(item)
    feats, nn_vals, nn_empty, topic_vals, pt_val, u = _feature_vector(
        ctx, fitted.config, item
    )
    raw = float(feats @ fitted.weights + fitted.intercept)
    if fitted.log_scale:
        raw = math.expm1(raw)
    clamped = raw < 0
    return ArticlePrediction(
        article_id=None if isinstance(item, Draft) else item.id,
        predicted_cumulative_visits=max(raw, 0.0),
        clamped=clamped,
        variant=fitted.config.variant,
        nn_aggregates=nn_vals,
        nn_empty_flags=nn_empty,
        topic_volumes=topic_vals,
        predicted_topic_volume=pt_val,
        primary_topic=u,
    )


@dataclass(frozen=True)
class EvaluationRow:
    variant: str
    theta: float
    delta: int
    mape: float
    n_test: int
    n_skipped: int


def evaluate_article_predictor(fitted: FittedArticlePredictor,
                               ctx: PredictionContext) -> EvaluationRow:
    """Test-split MAPE of the fitted predictor.

    Articles whose observed target is zero are skipped by the MAPE
    definition and tallied.
    """
    observed, predicted = [], []
    for aid in fitted.test_ids:
        art = ctx.corpus.articles[aid]
        observed.append(_target(ctx.corpus, aid, art.published_at,
                                fitted.config.horizon_h))
        predicted.append(
            predict_article(fitted, art, ctx).predicted_cumulative_visits
        )
    value, n_terms, n_skipped = mape(observed, predicted)
    return EvaluationRow(
        variant=report_label(fitted.config),
        theta=fitted.config.theta,
        delta=fitted.config.delta,
        mape=value,
        n_test=n_terms,
        n_skipped=n_skipped,
    )


def evaluation_csv(rows: list[EvaluationRow]) -> str:
    lines = ["variant,theta,delta,mape,n_test,n_skipped"]
    for r in rows:
        lines.append(
            f"{r.variant},{r.theta},{r.delta},{r.mape:.6f},{r.n_test},{r.n_skipped}"
        )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# descriptive analytics


def shelf_life(corpus: Corpus, article_id: str, q: float = 0.9,
               horizon_days: int = 30) -> int:
    """Days until the article holds the fraction q of its horizon visits.

    Smallest d >= 0 with N(t_a + d) >= q * N(t_a + horizon).
    """
    if not 0 < q <= 1:
        raise ValidationError("q must be in (0, 1]")
    art = corpus.article(article_id)
    total = cumulative_visits(corpus, article_id, art.published_at + timedelta(days=horizon_days))
    if total == 0:
        raise UndefinedStatisticError(
            f"article {article_id!r} has no visits within {horizon_days} days"
        )
    threshold = q * total
    for d in range(horizon_days + 1):
        if cumulative_visits(corpus, article_id, art.published_at + timedelta(days=d)) >= threshold:
            return d
    return horizon_days


@dataclass(eq=False)
class AnalyticsReport:
    ccdf: dict[str, tuple[np.ndarray, np.ndarray]]   # kind -> (x, P(X >= x))
    growth: dict[str, np.ndarray]                    # kind -> mean normalized cumulative curve
    growth_days: int
    growth_normalizer: float
    shelf: dict[int, dict[str, object]]              # horizon -> {values, mean, by_kind, n_undefined}

    def ccdf_csv(self) -> str:
        lines = ["kind,visits,ccdf"]
        for kind in sorted(self.ccdf):
            xs, ps = self.ccdf[kind]
            for x, p in zip(xs, ps):
                lines.append(f"{kind},{x:.0f},{p:.6f}")
        return "\n".join(lines) + "\n"

    def growth_csv(self) -> str:
        lines = ["kind,day,mean_normalized_visits"]
        for kind in sorted(self.growth):
            for d, v in enumerate(self.growth[kind]):
                lines.append(f"{kind},{d},{v:.6f}")
        return "\n".join(lines) + "\n"

    def shelf_csv(self) -> str:
        lines = ["horizon,kind,shelf_days,n_articles"]
        for h in sorted(self.shelf):
            by_kind: dict = self.shelf[h]["by_kind"]   # type: ignore[assignment]
            for kind in sorted(by_kind):
                values = by_kind[kind]
                for d in sorted(set(values)):
                    lines.append(f"{h},{kind},{d},{values.count(d)}")
        return "\n".join(lines) + "\n"


def _ccdf(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    xs = np.unique(np.concatenate([[0.0], values]))
    n = values.shape[0]
    ps = np.array([(values >= x).sum() / n for x in xs])
    return xs, ps


def analytics(corpus: Corpus, ccdf_days: int = 30, growth_days: int = 30,
              shelf_horizons=(7, 15, 30, 60), q: float = 0.9) -> AnalyticsReport:
    """Corpus-level popularity descriptives, plot-ready.

    Growth curves are normalized by the mean visits of News articles at
    the end of day 3 so curves are comparable across kinds; an all-Opinion
    corpus falls back to the overall mean.
    """
    if corpus.n == 0:
        raise DomainError("empty corpus")
    ids = sorted(corpus.articles)
    kinds = {aid: corpus.articles[aid].kind.value for aid in ids}

    totals30 = {
        aid: cumulative_visits(corpus, aid,
                               corpus.articles[aid].published_at + timedelta(days=ccdf_days))
        for aid in ids
    }
    ccdf = {}
    for kind in sorted({*kinds.values()}):
        vals = np.array([totals30[aid] for aid in ids if kinds[aid] == kind], dtype=float)
        if vals.shape[0]:
            ccdf[kind] = _ccdf(vals)

    day3 = np.array([
        cumulative_visits(corpus, aid, corpus.articles[aid].published_at + timedelta(days=3))
        for aid in ids
    ], dtype=float)
    news_mask = np.array([kinds[aid] == Kind.NEWS.value for aid in ids])
    normalizer = float(day3[news_mask].mean()) if news_mask.any() else float(day3.mean())
    if normalizer == 0:
        normalizer = 1.0
    growth = {}
    for kind in sorted({*kinds.values()}):
        members = [aid for aid in ids if kinds[aid] == kind]
        curves = np.array([
            [
                cumulative_visits(corpus, aid,
                                  corpus.articles[aid].published_at + timedelta(days=d))
                for d in range(growth_days + 1)
            ]
            for aid in members
        ], dtype=float)
        growth[kind] = curves.mean(axis=0) / normalizer

    shelf: dict[int, dict[str, object]] = {}
    for h in shelf_horizons:
        values, by_kind, undefined = [], {}, 0
        for aid in ids:
            try:
                d = shelf_life(corpus, aid, q=q, horizon_days=h)
            except UndefinedStatisticError:
                undefined += 1
                continue
            values.append(d)
            by_kind.setdefault(kinds[aid], []).append(d)
        shelf[h] = {
            "values": values,
            "mean": float(np.mean(values)) if values else float("nan"),
            "by_kind": by_kind,
            "n_undefined": undefined,
        }
    return AnalyticsReport(ccdf=ccdf, growth=growth, growth_days=growth_days,
                           growth_normalizer=normalizer, shelf=shelf)
