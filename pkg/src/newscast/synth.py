"""Ground-truth synthetic corpus generator.

Generates a corpus with fully known structure so estimators can be tested
against planted truth:

* topics are planted word distributions over a synthetic vocabulary, with
  an optional shared word pool to blur topic boundaries;
* daily topic volumes follow a vector-autoregressive recurrence with
  multiplicative lognormal noise (exact recurrence when noise_scale=0);
* each article's daily visits are its topic's volume split across the
  same-topic cohort by exponentially decaying, per-kind weights, so the
  per-topic visit sums reconstruct the planted volumes up to rounding;
* early visit counts follow a fixed fraction schedule of day-0 visits,
  jittered less at longer observation offsets.

The GroundTruth sidecar is consumed only by tests, never by estimators.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from .corpus import Article, Corpus, Kind, VisitSeries, build_corpus
from .errors import ValidationError

DEFAULT_HALFLIVES = {Kind.NEWS: 3.0, Kind.OPINION: 7.0}
DEFAULT_EARLY_FRACTIONS = ((5, 0.02), (60, 0.15), (360, 0.5))


@dataclass(eq=False)
class SynthSpec:
    k_true: int
    vocab_size: int
    n_articles: int
    n_days: int
    var_coefficients: np.ndarray  # (k, k, p); [i, j, lag] couples topic j at lag+1 days to topic i
    noise_scale: float = 0.0
    decay_halflife_days: dict = field(default_factory=lambda: dict(DEFAULT_HALFLIVES))
    seed: int = 0
    # shape knobs, defaults tuned for desk-scale tests
    start_date: date = date(2023, 1, 2)
    base_volume: float = 5000.0
    doc_length_mean: int = 60
    title_tokens: int = 5
    doc_topic_alpha: float = 0.3
    shared_vocab_fraction: float = 0.25
    shared_weight: float = 0.3
    chain_overlap: float = 0.0  # mass each topic borrows from its cyclic neighbour
    # soft topics: all topics share the full vocabulary support and differ
    # only in rates (own block boosted by this factor); None keeps the
    # hard block structure
    topic_block_boost: float | None = None
    # relative soft-block widths, length k_true; None means equal widths
    block_fractions: tuple | None = None
    # when set, each document mixes its planted topic with one cyclic
    # neighbour at a weight drawn from this (lo, hi) range instead of a
    # Dirichlet draw; keeps the planted topic dominant for hi < 0.5
    secondary_range: tuple | None = None
    opinion_fraction: float = 0.35
    burn_in_days: int = 60
    early_fractions: tuple = DEFAULT_EARLY_FRACTIONS
    article_weight_sigma: float = 0.5

    def validate(self) -> None:
        if self.k_true < 1 or self.vocab_size < 2 * self.k_true:
            raise ValidationError("need k_true >= 1 and vocab_size >= 2 * k_true")
        if self.n_articles < self.k_true or self.n_days < 1:
            raise ValidationError("need n_articles >= k_true and n_days >= 1")
        if self.noise_scale < 0:
            raise ValidationError("noise_scale must be non-negative")
        if any(h <= 0 for h in self.decay_halflife_days.values()):
            raise ValidationError("half-lives must be positive")
        a = np.asarray(self.var_coefficients, dtype=float)
        if a.ndim != 3 or a.shape[0] != self.k_true or a.shape[1] != self.k_true:
            raise ValidationError("var_coefficients must have shape (k_true, k_true, lags)")
        radius = companion_spectral_radius(a)
        if radius >= 1.0:
            raise ValidationError(
                f"var_coefficients are non-stationary: companion spectral radius {radius:.4f} >= 1"
            )


@dataclass
class GroundTruth:
    """Planted structure of a synthetic corpus; for tests only."""

    topic_word: np.ndarray          # (k, vocab_size)
    vocabulary: list[str]
    volumes: np.ndarray             # (k, n_days) real-valued daily topic volumes
    dates: list[date]
    primary_topic: dict[str, int]
    mixing_weights: np.ndarray      # (k,) expected primary-topic frequencies
    doc_topic: np.ndarray           # (n, k) planted theta, rows ordered by article_ids
    article_ids: list[str]


def truth_matrix_for_vocabulary(truth: GroundTruth, vocabulary) -> np.ndarray:
    """Planted topic-word rows re-indexed onto a fitted stem vocabulary.

    Generator tokens survive the text pipeline unchanged, so each stem maps
    back to at most one planted word; stems without a planted source get a
    zero column, and planted words absent from every document are dropped.
    """
    col_of = {w: j for j, w in enumerate(truth.vocabulary)}
    out = np.zeros((truth.topic_word.shape[0], len(vocabulary)))
    for j, stem in enumerate(vocabulary):
        src = col_of.get(stem)
        if src is not None:
            out[:, j] = truth.topic_word[:, src]
    return out


def greedy_topic_match(true_topic_word: np.ndarray,
                       fitted_topic_word: np.ndarray) -> list[tuple[int, int, float]]:
    """Pair planted and fitted topics by descending cosine, each used once.

    Returns (true_index, fitted_index, cosine) triples, one per planted
    topic, for scoring how well a fit recovered the planted structure.
    """
    a = np.asarray(true_topic_word, dtype=float)
    b = np.asarray(fitted_topic_word, dtype=float)
    an = a / np.maximum(np.linalg.norm(a, axis=1, keepdims=True), 1e-300)
    bn = b / np.maximum(np.linalg.norm(b, axis=1, keepdims=True), 1e-300)
    sims = an @ bn.T
    pairs = []
    used_true, used_fit = set(), set()
    order = np.dstack(np.unravel_index(np.argsort(-sims, axis=None), sims.shape))[0]
    for i, j in order:
        if i in used_true or j in used_fit:
            continue
        used_true.add(int(i))
        used_fit.add(int(j))
        pairs.append((int(i), int(j), float(sims[i, j])))
        if len(pairs) == min(sims.shape):
            break
    return sorted(pairs)


def companion_spectral_radius(coeffs: np.ndarray) -> float:
    """Spectral radius of the VAR companion matrix."""
    k, _, p = coeffs.shape
    companion = np.zeros((k * p, k * p))
    for lag in range(p):
        companion[:k, lag * k : (lag + 1) * k] = coeffs[:, :, lag]
    if p > 1:
        companion[k:, :-k] = np.eye(k * (p - 1))
    return float(np.max(np.abs(np.linalg.eigvals(companion))))


def var_step(coeffs: np.ndarray, history: np.ndarray) -> np.ndarray:
    """One noiseless VAR step. history[:, -1] is yesterday, [:, -2] the day before.

    Shared by the generator and the exactness tests so both sides use the
    identical floating-point evaluation order.
    """
    p = coeffs.shape[2]
    acc = coeffs[:, :, 0] @ history[:, -1]
    for lag in range(1, p):
        acc += coeffs[:, :, lag] @ history[:, -1 - lag]
    return acc


def diagonal_var(k: int, p: int, rho: float = 0.98) -> np.ndarray:
    """Self-coupled coefficients: each topic follows its own recent history."""
    weights = np.array([0.6**lag for lag in range(p)])
    weights = weights / weights.sum() * rho
    coeffs = np.zeros((k, k, p))
    for lag in range(p):
        coeffs[:, :, lag] = np.eye(k) * weights[lag]
    return coeffs


def coupled_var(k: int, p: int, partners: int, rho: float = 0.97, seed: int = 0) -> np.ndarray:
    """Each topic driven by itself plus `partners` other topics.

    Row masses sum to rho; the result is rescaled if the companion radius
    still reaches 1.
    """
    rng = np.random.default_rng(seed)
    coeffs = np.zeros((k, k, p))
    lag_weights = np.array([0.6**lag for lag in range(p)])
    lag_weights /= lag_weights.sum()
    for i in range(k):
        others = [j for j in range(k) if j != i]
        chosen = rng.choice(others, size=min(partners, len(others)), replace=False)
        row = np.zeros(k)
        row[i] = 0.55
        row[chosen] = rng.uniform(0.5, 1.0, size=len(chosen))
        row = row / row.sum() * rho
        for lag in range(p):
            coeffs[i, :, lag] = row * lag_weights[lag]
    while companion_spectral_radius(coeffs) >= 0.999:
        coeffs *= 0.95
    return coeffs


def _planted_topics(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    """Topic-word distributions: a private word block per topic plus a shared pool."""
    if spec.topic_block_boost is not None:
        return _soft_topics(spec, rng)
    n_shared = int(round(spec.vocab_size * spec.shared_vocab_fraction))
    n_private = spec.vocab_size - n_shared
    block = n_private // spec.k_true
    shared_dist = rng.dirichlet(np.full(n_shared, 0.8)) if n_shared else np.zeros(0)
    topic_word = np.zeros((spec.k_true, spec.vocab_size))
    for u in range(spec.k_true):
        start = n_shared + u * block
        end = n_shared + (u + 1) * block if u < spec.k_true - 1 else spec.vocab_size
        own = rng.dirichlet(np.full(end - start, 0.8))
        if n_shared:
            topic_word[u, :n_shared] = spec.shared_weight * shared_dist
            topic_word[u, start:end] = (1.0 - spec.shared_weight) * own
        else:
            topic_word[u, start:end] = own
    if spec.chain_overlap > 0 and spec.k_true > 1:
        # cyclic borrowing: no partition of topics into fewer groups is clean
        c = spec.chain_overlap
        topic_word = (1.0 - c) * topic_word + c * np.roll(topic_word, -1, axis=0)
    return topic_word


def _soft_topics(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    """Rate-tilted topics over one shared support.

    Every word occurs under every topic; a topic only multiplies the base
    rate of its own word block.  Classifier margins then come from rate
    ratios rather than disjoint supports.
    """
    base = rng.dirichlet(np.full(spec.vocab_size, 0.8))
    if spec.block_fractions is not None:
        if len(spec.block_fractions) != spec.k_true:
            raise ValidationError("block_fractions must have one entry per topic")
        fracs = np.asarray(spec.block_fractions, dtype=float)
        fracs = fracs / fracs.sum()
    else:
        fracs = np.full(spec.k_true, 1.0 / spec.k_true)
    bounds = np.concatenate([[0], np.round(np.cumsum(fracs) * spec.vocab_size)]).astype(int)
    bounds[-1] = spec.vocab_size
    topic_word = np.empty((spec.k_true, spec.vocab_size))
    for u in range(spec.k_true):
        weights = base.copy()
        weights[bounds[u] : bounds[u + 1]] *= 1.0 + spec.topic_block_boost
        topic_word[u] = weights / weights.sum()
    return topic_word


def generate_synthetic(spec: SynthSpec) -> tuple[Corpus, GroundTruth]:
    """Generate a corpus with planted topics, volumes and visit curves.

    Deterministic given spec.seed: running twice yields identical output.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    k, n = spec.k_true, spec.n_articles
    coeffs = np.asarray(spec.var_coefficients, dtype=float)
    p = coeffs.shape[2]

    vocabulary = [f"w{j:04d}" for j in range(spec.vocab_size)]
    topic_word = _planted_topics(spec, rng)

    # planted primary topics round-robin; theta drawn conditioned on the
    # primary by swapping the argmax coordinate (exchangeable Dirichlet)
    planted = np.arange(n) % k
    doc_topic = np.empty((n, k))
    for i in range(n):
        u = planted[i]
        if spec.secondary_range is not None and k > 1:
            lo, hi = spec.secondary_range
            s = rng.uniform(lo, hi)
            nb = (u + 1) % k if rng.random() < 0.5 else (u - 1) % k
            theta = np.zeros(k)
            theta[u] = 1.0 - s
            theta[nb] = s
        else:
            theta = rng.dirichlet(np.full(k, spec.doc_topic_alpha))
            j = int(np.argmax(theta))
            theta[j], theta[u] = theta[u], theta[j]
        doc_topic[i] = theta

    # publication dates: one article per topic on day 0, the rest uniform
    offsets = np.sort(rng.integers(0, spec.n_days, size=n - k))
    day_offsets = np.concatenate([np.zeros(k, dtype=int), offsets])
    kinds = [Kind.OPINION if b else Kind.NEWS for b in rng.random(n) < spec.opinion_fraction]

    # article text from the LDA generative process
    ids = [f"a{i:04d}" for i in range(n)]
    articles = []
    for i in range(n):
        length = max(spec.title_tokens + 5, int(rng.poisson(spec.doc_length_mean)))
        z_counts = rng.multinomial(length, doc_topic[i])
        tokens = []
        for u in range(k):
            if z_counts[u]:
                words = rng.choice(spec.vocab_size, size=z_counts[u], p=topic_word[u])
                tokens.extend(vocabulary[w] for w in words)
        tokens = [tokens[j] for j in rng.permutation(len(tokens))]
        articles.append(
            Article(
                id=ids[i],
                title=" ".join(tokens[: spec.title_tokens]),
                body=" ".join(tokens[spec.title_tokens :]),
                published_at=spec.start_date + timedelta(days=int(day_offsets[i])),
                kind=kinds[i],
            )
        )

    # daily topic volumes: VAR recurrence with multiplicative noise
    history = spec.base_volume * rng.uniform(0.8, 1.2, size=(k, p))
    volumes = np.empty((k, spec.n_days))
    for t in range(-spec.burn_in_days, spec.n_days):
        nxt = var_step(coeffs, history)
        if spec.noise_scale > 0:
            nxt = nxt * np.exp(spec.noise_scale * rng.standard_normal(k))
        nxt = np.maximum(nxt, 1e-9)
        if t >= 0:
            volumes[:, t] = nxt
        history = np.column_stack([history[:, 1:], nxt]) if p > 1 else nxt[:, None]

    # split each topic's volume across its article cohort by decayed weights
    base_weight = np.exp(spec.article_weight_sigma * rng.standard_normal(n))
    halflife = np.array([spec.decay_halflife_days[kinds[i]] for i in range(n)])
    daily_visits = np.zeros((n, spec.n_days), dtype=int)
    idx = np.arange(n)
    for d in range(spec.n_days):
        for u in range(k):
            cohort = idx[(planted == u) & (day_offsets <= d)]
            if cohort.size == 0:
                continue
            age = d - day_offsets[cohort]
            w = base_weight[cohort] * np.power(2.0, -age / halflife[cohort])
            if spec.noise_scale > 0:
                w = w * np.exp(spec.noise_scale * rng.standard_normal(cohort.size))
            share = w / w.sum()
            daily_visits[cohort, d] = np.rint(volumes[u, d] * share).astype(int)

    # early counts: noisy fraction schedule of day-0 visits, noisier at
    # shorter offsets, forced monotone and capped at the day-0 total
    offsets_m = np.array([o for o, _ in spec.early_fractions], dtype=float)
    fracs = np.array([f for _, f in spec.early_fractions])
    sigma = spec.noise_scale * 3.0 / np.sqrt(offsets_m)
    series_list = []
    dates = [spec.start_date + timedelta(days=d) for d in range(spec.n_days)]
    for i in range(n):
        t0 = int(day_offsets[i])
        daily = tuple(
            (dates[d], int(daily_visits[i, d]))
            for d in range(t0, spec.n_days)
            if daily_visits[i, d] > 0
        )
        day0 = int(daily_visits[i, t0])
        noisy = fracs * np.exp(sigma * rng.standard_normal(len(fracs)))
        noisy = np.minimum(np.maximum.accumulate(noisy), 1.0)
        counts = np.minimum(np.rint(day0 * noisy).astype(int), day0)
        counts = np.maximum.accumulate(counts)
        early = tuple((int(offsets_m[j]), int(counts[j])) for j in range(len(fracs)))
        series_list.append(VisitSeries(article_id=ids[i], daily=daily, early=early))

    corpus = build_corpus(articles, series_list)
    truth = GroundTruth(
        topic_word=topic_word,
        vocabulary=vocabulary,
        volumes=volumes,
        dates=dates,
        primary_topic={ids[i]: int(planted[i]) for i in range(n)},
        mixing_weights=np.full(k, 1.0 / k),
        doc_topic=doc_topic,
        article_ids=ids,
    )
    return corpus, truth


def write_ground_truth(truth: GroundTruth, path) -> None:
    """Line-delimited sidecar: meta row, topic-word rows, volume rows, primary rows."""
    with open(path, "w", encoding="utf-8") as fh:
        meta = {
            "type": "meta",
            "k": int(truth.topic_word.shape[0]),
            "vocabulary": truth.vocabulary,
            "dates": [d.isoformat() for d in truth.dates],
            "mixing_weights": list(truth.mixing_weights),
        }
        fh.write(json.dumps(meta, sort_keys=True) + "\n")
        for u in range(truth.topic_word.shape[0]):
            fh.write(
                json.dumps({"type": "topic_word", "topic": u, "probs": list(truth.topic_word[u])})
                + "\n"
            )
        for u in range(truth.volumes.shape[0]):
            fh.write(
                json.dumps({"type": "volume", "topic": u, "values": list(truth.volumes[u])}) + "\n"
            )
        for aid in truth.article_ids:
            fh.write(
                json.dumps({"type": "primary", "article_id": aid, "topic": truth.primary_topic[aid]})
                + "\n"
            )


def read_ground_truth(path) -> GroundTruth:
    meta = None
    topic_rows, volume_rows, primary = {}, {}, {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            if rec["type"] == "meta":
                meta = rec
            elif rec["type"] == "topic_word":
                topic_rows[rec["topic"]] = rec["probs"]
            elif rec["type"] == "volume":
                volume_rows[rec["topic"]] = rec["values"]
            elif rec["type"] == "primary":
                primary[rec["article_id"]] = rec["topic"]
    k = meta["k"]
    article_ids = sorted(primary)
    return GroundTruth(
        topic_word=np.array([topic_rows[u] for u in range(k)]),
        vocabulary=list(meta["vocabulary"]),
        volumes=np.array([volume_rows[u] for u in range(k)]),
        dates=[date.fromisoformat(d) for d in meta["dates"]],
        primary_topic=primary,
        mixing_weights=np.array(meta["mixing_weights"]),
        doc_topic=np.zeros((len(article_ids), k)),  # not serialized
        article_ids=article_ids,
    )
