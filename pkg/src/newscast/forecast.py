"""Topic-volume forecasting.

Builds the daily topic-volume panel from the corpus and a topic model,
selects correlated predictor topics, and fits direct multi-step-ahead
forecasters (one model per horizon) over sliding windows.  Two model
kinds: ordinary least squares and linear epsilon-SVR, both on per-window
standardized features.  Accuracy is reported as mean absolute percentage
error with observed-zero terms skipped and tallied.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import date, timedelta
from enum import Enum

import numpy as np

from .corpus import Corpus
from .errors import DomainError, UndefinedStatisticError, ValidationError
from .svr import fit_svr
from .topics import TopicModel

DEFAULT_HORIZONS = (2, 3, 7, 15, 30)
DEFAULT_WINDOW_DAYS = 50
DEFAULT_DELTA = 3
DEFAULT_TOP_TOPICS = 4


class ForecasterKind(str, Enum):
    LR = "LR"
    SVR = "SVR"


@dataclass(eq=False)
class TopicVolumePanel:
    topics: list[int]
    dates: list[date]       # contiguous, one column per day
    values: np.ndarray      # (k, T), non-negative daily visit sums

    @property
    def n_days(self) -> int:
        return len(self.dates)

    def index_of(self, day: date) -> int:
        i = (day - self.dates[0]).days
        if i < 0 or i >= len(self.dates):
            raise DomainError(f"date {day.isoformat()} outside the panel range")
        return i

    def csv_text(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["date"] + [f"topic_{u}" for u in self.topics])
        for t, day in enumerate(self.dates):
            writer.writerow([day.isoformat()] + [f"{v:.1f}" for v in self.values[:, t]])
        return buf.getvalue()


@dataclass(frozen=True)
class LagSpec:
    delta: int   # lags used are t-delta .. t-1

    def __post_init__(self):
        if self.delta < 1:
            raise ValidationError("delta must be >= 1")


@dataclass(eq=False)
class FeatureSchema:
    target_topic: int
    selected_topics: list[int]      # ordered by correlation rank, target forced in
    lags: LagSpec
    feature_means: np.ndarray       # per feature, order: topic-major then lag
    feature_stds: np.ndarray        # zero-variance features get std 1

    @property
    def n_features(self) -> int:
        return len(self.selected_topics) * self.lags.delta

    def feature_row(self, panel: TopicVolumePanel, t_index: int) -> np.ndarray:
        """Raw lag features for a sample at day index t: V(v, t-delta..t-1)."""
        row = np.empty(self.n_features)
        pos = 0
        for v in self.selected_topics:
            vi = panel.topics.index(v)
            for lag in range(self.lags.delta, 0, -1):
                row[pos] = panel.values[vi, t_index - lag]
                pos += 1
        return row

    def standardize(self, rows: np.ndarray) -> np.ndarray:
        return (rows - self.feature_means) / self.feature_stds


@dataclass(eq=False)
class FittedForecaster:
    kind: ForecasterKind
    schema: FeatureSchema
    horizon: int
    weights: np.ndarray
    intercept: float
    hyperparams: dict
    training_window: tuple[date, date]
    conditioning_warning: bool      # least-norm fallback used on a singular system
    target_mean: float              # SVR fits on a standardized target
    target_std: float
    kkt_residual: float | None      # SVR only


@dataclass(frozen=True)
class ForecastValue:
    value: float
    clamped: bool


def build_panel(corpus: Corpus, model: TopicModel) -> TopicVolumePanel:
    """Daily visit totals per primary topic, zero-filled over the date span.

    Every visit in the corpus lands in exactly one topic row, so column
    sums reproduce corpus-wide daily totals exactly.
    """
    if corpus.date_range is None:
        raise DomainError("corpus has no dated articles")
    missing = [aid for aid in corpus.articles if aid not in model.primary_topic]
    if missing:
        raise DomainError(
            f"{len(missing)} articles lack a topic assignment (first: {missing[0]!r})"
        )
    first, last = corpus.date_range
    n_days = (last - first).days + 1
    k = model.topic_word.shape[0]
    values = np.zeros((k, n_days))
    for aid, series in corpus.visits.items():
        u = model.primary_topic[aid]
        for day, count in series.daily:
            values[u, (day - first).days] += count
    return TopicVolumePanel(
        topics=list(range(k)),
        dates=[first + timedelta(days=d) for d in range(n_days)],
        values=values,
    )


def _pearson_r2(a: np.ndarray, b: np.ndarray) -> float:
    sa, sb = a.std(), b.std()
    if sa == 0 or sb == 0:
        raise UndefinedStatisticError("correlation undefined for a constant series")
    r = float(np.mean((a - a.mean()) * (b - b.mean())) / (sa * sb))
    return r * r


def autocorrelation(panel: TopicVolumePanel, topic: int, delta: int) -> float:
    """Squared Pearson correlation between V(u,t) and V(u,t-delta)."""
    if delta < 1:
        raise ValidationError("delta must be >= 1")
    ui = panel.topics.index(topic) if topic in panel.topics else -1
    if ui < 0:
        raise DomainError(f"topic {topic} not in panel")
    series = panel.values[ui]
    if series.shape[0] <= delta + 2:
        raise DomainError(f"series of length {series.shape[0]} too short for lag {delta}")
    return _pearson_r2(series[delta:], series[:-delta])


def select_features(panel: TopicVolumePanel, target: int,
                    s: int = DEFAULT_TOP_TOPICS,
                    window: tuple[date, date] | None = None,
                    delta: int = DEFAULT_DELTA) -> FeatureSchema:
    """Rank topics by zero-lag r^2 against the target on the window.

    The target always occupies one of the s slots.  Ties rank the smaller
    topic index first.  Standardization statistics are captured from the
    window, per topic, and replicated across that topic's lag features.
    """
    if window is None:
        window = (panel.dates[0], panel.dates[-1])
    w0, w1 = panel.index_of(window[0]), panel.index_of(window[1])
    if w1 - w0 + 1 < 10:
        raise DomainError("feature-selection window shorter than 10 days")
    ti = panel.topics.index(target) if target in panel.topics else -1
    if ti < 0:
        raise DomainError(f"topic {target} not in panel")
    tgt = panel.values[ti, w0 : w1 + 1]

    scored = []
    for pos, v in enumerate(panel.topics):
        if v == target:
            continue
        try:
            r2 = _pearson_r2(panel.values[pos, w0 : w1 + 1], tgt)
        except UndefinedStatisticError:
            r2 = -1.0   # constant series can never be informative
        scored.append((-r2, v))
    scored.sort()
    chosen = [target] + [v for _, v in scored[: max(0, min(s, len(panel.topics))) - 1]]

    lags = LagSpec(delta=delta)
    means = np.empty(len(chosen) * delta)
    stds = np.empty(len(chosen) * delta)
    for ci, v in enumerate(chosen):
        pos = panel.topics.index(v)
        seg = panel.values[pos, w0 : w1 + 1]
        mu, sd = float(seg.mean()), float(seg.std())
        if sd == 0:
            sd = 1.0
        means[ci * delta : (ci + 1) * delta] = mu
        stds[ci * delta : (ci + 1) * delta] = sd
    return FeatureSchema(target_topic=target, selected_topics=chosen,
                         lags=lags, feature_means=means, feature_stds=stds)


def _window_samples(panel: TopicVolumePanel, schema: FeatureSchema, horizon: int,
                    window: tuple[date, date]):
    """Sample days t with lags and target inside [start, end].

    Features: V(v, t-delta .. t-1); target: V(target, t+h-1).
    """
    w0, w1 = panel.index_of(window[0]), panel.index_of(window[1])
    delta = schema.lags.delta
    ti = panel.topics.index(schema.target_topic)
    t_first = w0 + delta
    t_last = w1 - horizon + 1
    if t_last < t_first:
        return np.zeros((0, schema.n_features)), np.zeros(0), []
    t_indices = list(range(t_first, t_last + 1))
    rows = np.stack([schema.feature_row(panel, t) for t in t_indices])
    targets = np.array([panel.values[ti, t + horizon - 1] for t in t_indices])
    return rows, targets, t_indices


def fit_forecaster(panel: TopicVolumePanel, schema: FeatureSchema,
                   kind: ForecasterKind | str, horizon: int,
                   window: tuple[date, date],
                   c: float = 1.0, epsilon: float = 0.1,
                   tol: float = 1e-6) -> FittedForecaster:
    """Fit one direct h-step-ahead model on a window of the panel.

    LR solves least squares on standardized features; a rank-deficient
    system falls back to the least-norm solution and sets the
    conditioning flag.  SVR additionally standardizes the target.
    """
    kind = ForecasterKind(kind)
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    rows, targets, _ = _window_samples(panel, schema, horizon, window)
    n_feat = schema.n_features
    if rows.shape[0] < n_feat + 2:
        raise DomainError(
            f"window yields {rows.shape[0]} samples; need at least {n_feat + 2} "
            f"for {n_feat} features"
        )
    x = schema.standardize(rows)
    warning = False
    if kind is ForecasterKind.LR:
        design = np.column_stack([x, np.ones(x.shape[0])])
        coef, _, rank, _ = np.linalg.lstsq(design, targets, rcond=None)
        warning = rank < design.shape[1]
        weights, intercept = coef[:-1], float(coef[-1])
        t_mean, t_std, kkt = 0.0, 1.0, None
        hyper: dict = {}
    else:
        t_mean = float(targets.mean())
        t_std = float(targets.std())
        if t_std == 0:
            t_std = 1.0
        model = fit_svr(x, (targets - t_mean) / t_std, c=c, epsilon=epsilon, tol=tol)
        weights, intercept = model.weights, model.intercept
        kkt = model.kkt_residual
        hyper = {"C": c, "epsilon": epsilon}
    return FittedForecaster(kind=kind, schema=schema, horizon=horizon,
                            weights=weights, intercept=intercept,
                            hyperparams=hyper, training_window=window,
                            conditioning_warning=bool(warning),
                            target_mean=t_mean, target_std=t_std,
                            kkt_residual=kkt)


def forecast(panel: TopicVolumePanel, fitted: FittedForecaster, t: date) -> ForecastValue:
    """Predict V(target, t+h-1) from the lags before day t.

    Negative predictions clamp to zero with a flag.
    """
    delta = fitted.schema.lags.delta
    t_index = (t - panel.dates[0]).days
    if t_index - delta < 0 or t_index - 1 >= panel.n_days:
        missing = [
            (t - timedelta(days=lag)).isoformat()
            for lag in range(delta, 0, -1)
            if not 0 <= t_index - lag < panel.n_days
        ]
        raise DomainError(f"lag dates missing from panel: {', '.join(missing)}")
    row = fitted.schema.feature_row(panel, t_index)
    z = fitted.schema.standardize(row[None, :])[0]
    raw = float(z @ fitted.weights + fitted.intercept)
    raw = raw * fitted.target_std + fitted.target_mean
    if raw < 0:
        return ForecastValue(value=0.0, clamped=True)
    return ForecastValue(value=raw, clamped=False)


def mape(observed, predicted) -> tuple[float, int, int]:
    """Mean absolute percentage error over pairs with observed != 0.

    Returns (percentage, counted terms, skipped zero-observation terms).
    """
    observed = np.asarray(observed, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if observed.shape != predicted.shape:
        raise ValidationError("observed and predicted lengths differ")
    nz = observed != 0
    n_terms = int(nz.sum())
    n_skipped = int(observed.shape[0] - n_terms)
    if n_terms == 0:
        raise UndefinedStatisticError("all observations are zero; MAPE undefined")
    value = float(np.mean(np.abs(predicted[nz] - observed[nz]) / np.abs(observed[nz]))) * 100.0
    return value, n_terms, n_skipped


@dataclass(frozen=True)
class BacktestCell:
    topic: int
    horizon: int
    mape: float
    n_terms: int
    n_skipped: int


@dataclass(eq=False)
class BacktestReport:
    cells: list[BacktestCell]
    kind: ForecasterKind
    window_days: int
    delta: int
    top_topics: int

    def by_horizon(self) -> dict[int, float]:
        """Average MAPE per horizon, weighting each topic cell equally."""
        acc: dict[int, list[float]] = {}
        for cell in self.cells:
            acc.setdefault(cell.horizon, []).append(cell.mape)
        return {h: float(np.mean(v)) for h, v in sorted(acc.items())}

    def by_topic(self) -> dict[int, float]:
        acc: dict[int, list[float]] = {}
        for cell in self.cells:
            acc.setdefault(cell.topic, []).append(cell.mape)
        return {u: float(np.mean(v)) for u, v in sorted(acc.items())}

    def grand_mean(self) -> float:
        return float(np.mean([cell.mape for cell in self.cells]))

    def csv_text(self) -> str:
        lines = ["topic,horizon,mape,n_terms,n_skipped"]
        for cell in self.cells:
            lines.append(
                f"{cell.topic},{cell.horizon},{cell.mape:.6f},{cell.n_terms},{cell.n_skipped}"
            )
        return "\n".join(lines) + "\n"


def backtest(panel: TopicVolumePanel, kind: ForecasterKind | str = ForecasterKind.LR,
             horizons=DEFAULT_HORIZONS, window_days: int = DEFAULT_WINDOW_DAYS,
             delta: int = DEFAULT_DELTA, s: int = DEFAULT_TOP_TOPICS,
             c: float = 1.0, epsilon: float = 0.1,
             topics=None) -> BacktestReport:
    """Sliding-window evaluation: fit on the window ending yesterday,
    predict each horizon, accumulate per-(topic, horizon) MAPE.

    Evaluation days with an observed volume of zero are skipped and
    tallied, never silently dropped.
    """
    kind = ForecasterKind(kind)
    max_h = max(horizons)
    if panel.n_days < window_days + max_h + delta:
        raise DomainError(
            f"panel has {panel.n_days} days; need at least {window_days + max_h + delta}"
        )
    eval_topics = list(panel.topics) if topics is None else list(topics)
    cells = []
    first_eval = window_days   # day index t: window [t-W, t-1] must fit
    for u in eval_topics:
        ui = panel.topics.index(u)
        for h in horizons:
            observed, predicted = [], []
            for t in range(first_eval, panel.n_days - h + 1):
                window = (panel.dates[t - window_days], panel.dates[t - 1])
                schema = select_features(panel, u, s=s, window=window, delta=delta)
                fitted = fit_forecaster(panel, schema, kind, h, window,
                                        c=c, epsilon=epsilon)
                observed.append(panel.values[ui, t + h - 1])
                predicted.append(forecast(panel, fitted, panel.dates[t]).value)
            value, n_terms, n_skipped = mape(observed, predicted)
            cells.append(BacktestCell(topic=u, horizon=h, mape=value,
                                      n_terms=n_terms, n_skipped=n_skipped))
    return BacktestReport(cells=cells, kind=kind, window_days=window_days,
                          delta=delta, top_topics=s)
