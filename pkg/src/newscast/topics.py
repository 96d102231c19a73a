"""Topic discovery over the article corpus.

Latent Dirichlet Allocation fit by collapsed Gibbs sampling, with the
posterior means averaged over post-burn-in sweeps.  The sampler core is
numba-compiled; it seeds numba's RNG explicitly so a fit is reproducible
bit for bit given the same config.

Also provides the topic-count selection sweep: fit candidate models, label
every article with its dominant topic, and score how well a multinomial
Naive Bayes classifier recovers those labels from tf-idf features on a
held-out split.  Too few topics merge distinct word distributions into
incoherent classes; too many fragment them; the classification F1 peaks
near the real structure.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .corpus import Corpus
from .errors import DomainError, ValidationError
from .textproc import TokenPipelineConfig, build_tfidf, document_text, preprocess


@dataclass(frozen=True)
class LdaConfig:
    k: int
    alpha: float | None = None   # doc-topic prior; None selects the 50/k heuristic
    beta: float = 0.01
    iterations: int = 1000
    burn_in: int = 800
    seed: int = 0

    @property
    def effective_alpha(self) -> float:
        return self.alpha if self.alpha is not None else 50.0 / self.k

    def validate(self) -> None:
        if self.k < 2:
            raise ValidationError("k must be >= 2")
        if self.alpha is not None and self.alpha <= 0:
            raise ValidationError("alpha must be positive")
        if self.beta <= 0:
            raise ValidationError("beta must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise ValidationError("need 0 <= burn_in < iterations")


@dataclass(eq=False)
class TopicModel:
    config: LdaConfig
    vocabulary: list[str]            # column order of topic_word
    topic_word: np.ndarray           # (k, V) rows sum to 1
    doc_topic: np.ndarray            # (n, k) rows sum to 1
    doc_ids: list[str]               # row order of doc_topic
    primary_topic: dict[str, int]    # argmax topic per article, ties to smaller index
    rejected_ids: list[str]          # articles excluded for having no stems
    sweep_token_totals: np.ndarray   # assigned-token count after every sweep
    n_tokens: int

    def top_words(self, topic: int, n: int = 10) -> list[tuple[str, float]]:
        if not 0 <= topic < self.topic_word.shape[0]:
            raise DomainError(f"topic {topic} out of range")
        row = self.topic_word[topic]
        order = np.argsort(-row, kind="stable")[:n]
        return [(self.vocabulary[j], float(row[j])) for j in order]

    def relevance(self, article_id: str) -> np.ndarray:
        try:
            i = self.doc_ids.index(article_id)
        except ValueError:
            raise DomainError(f"article {article_id!r} not in the fitted model") from None
        return self.doc_topic[i]


@dataclass(frozen=True)
class InferredTopics:
    relevance: np.ndarray
    all_oov: bool    # true when no stem was in the model vocabulary


@njit(cache=True)
def _gibbs(doc_of, word_of, z, n_dk, n_kw, n_k, doc_len, alpha, beta,
           iterations, burn_in, seed, token_totals, phi_acc, theta_acc):
    np.random.seed(seed)
    n_tokens = doc_of.shape[0]
    k = n_kw.shape[0]
    vocab = n_kw.shape[1]
    probs = np.empty(k)
    for sweep in range(iterations):
        for t in range(n_tokens):
            d = doc_of[t]
            w = word_of[t]
            old = z[t]
            n_dk[d, old] -= 1
            n_kw[old, w] -= 1
            n_k[old] -= 1
            total = 0.0
            for topic in range(k):
                p = (n_dk[d, topic] + alpha) * (n_kw[topic, w] + beta) / (n_k[topic] + vocab * beta)
                probs[topic] = p
                total += p
            r = np.random.random() * total
            acc = 0.0
            new = k - 1
            for topic in range(k):
                acc += probs[topic]
                if r < acc:
                    new = topic
                    break
            z[t] = new
            n_dk[d, new] += 1
            n_kw[new, w] += 1
            n_k[new] += 1
        token_totals[sweep] = n_k.sum()
        if sweep >= burn_in:
            for topic in range(k):
                denom = n_k[topic] + vocab * beta
                for w in range(vocab):
                    phi_acc[topic, w] += (n_kw[topic, w] + beta) / denom
            for d in range(n_dk.shape[0]):
                denom = doc_len[d] + k * alpha
                for topic in range(k):
                    theta_acc[d, topic] += (n_dk[d, topic] + alpha) / denom


@njit(cache=True)
def _fold_in(word_of, phi, alpha, iterations, burn_in, seed, theta_acc):
    np.random.seed(seed)
    n_tokens = word_of.shape[0]
    k = phi.shape[0]
    n_dk = np.zeros(k)
    z = np.empty(n_tokens, dtype=np.int64)
    probs = np.empty(k)
    for t in range(n_tokens):
        z[t] = np.random.randint(0, k)
        n_dk[z[t]] += 1
    for sweep in range(iterations):
        for t in range(n_tokens):
            w = word_of[t]
            n_dk[z[t]] -= 1
            total = 0.0
            for topic in range(k):
                p = (n_dk[topic] + alpha) * phi[topic, w]
                probs[topic] = p
                total += p
            r = np.random.random() * total
            acc = 0.0
            new = k - 1
            for topic in range(k):
                acc += probs[topic]
                if r < acc:
                    new = topic
                    break
            z[t] = new
            n_dk[new] += 1
        if sweep >= burn_in:
            denom = n_tokens + k * alpha
            for topic in range(k):
                theta_acc[topic] += (n_dk[topic] + alpha) / denom


def tokenize_corpus(corpus: Corpus,
                    pipeline: TokenPipelineConfig | None = None) -> dict[str, list[str]]:
    """Stems per article over title and body, ready for fitting."""
    pipeline = pipeline or TokenPipelineConfig()
    return {
        aid: preprocess(document_text(corpus.articles[aid]), pipeline)
        for aid in sorted(corpus.articles)
    }


def fit_lda(corpus: Corpus, stems_by_doc: Mapping[str, Sequence[str]],
            config: LdaConfig) -> TopicModel:
    """Fit a topic model on pre-tokenized articles.

    Articles with no stems are excluded from the fit and listed in
    rejected_ids.  Deterministic given config.seed.
    """
    config.validate()
    doc_ids, rejected = [], []
    for aid in sorted(corpus.articles):
        if stems_by_doc.get(aid):
            doc_ids.append(aid)
        else:
            rejected.append(aid)
    if config.k > len(doc_ids):
        raise DomainError(f"k={config.k} exceeds the {len(doc_ids)} usable articles")
    vocab = sorted({s for aid in doc_ids for s in stems_by_doc[aid]})
    col = {w: j for j, w in enumerate(vocab)}
    k = config.k
    alpha = config.effective_alpha

    doc_of, word_of = [], []
    for i, aid in enumerate(doc_ids):
        for s in stems_by_doc[aid]:
            doc_of.append(i)
            word_of.append(col[s])
    doc_of = np.asarray(doc_of, dtype=np.int64)
    word_of = np.asarray(word_of, dtype=np.int64)
    n_tokens = doc_of.shape[0]

    # deterministic initial assignment, separate from the sampler stream
    init_rng = np.random.default_rng(config.seed)
    z = init_rng.integers(0, k, size=n_tokens)
    n_dk = np.zeros((len(doc_ids), k), dtype=np.int64)
    n_kw = np.zeros((k, len(vocab)), dtype=np.int64)
    n_k = np.zeros(k, dtype=np.int64)
    for t in range(n_tokens):
        n_dk[doc_of[t], z[t]] += 1
        n_kw[z[t], word_of[t]] += 1
        n_k[z[t]] += 1
    doc_len = n_dk.sum(axis=1)

    token_totals = np.zeros(config.iterations, dtype=np.int64)
    phi_acc = np.zeros((k, len(vocab)))
    theta_acc = np.zeros((len(doc_ids), k))
    _gibbs(doc_of, word_of, z, n_dk, n_kw, n_k, doc_len,
           alpha, config.beta, config.iterations, config.burn_in,
           config.seed, token_totals, phi_acc, theta_acc)

    n_avg = config.iterations - config.burn_in
    theta = theta_acc / n_avg
    primary = {aid: int(np.argmax(theta[i])) for i, aid in enumerate(doc_ids)}
    return TopicModel(
        config=config,
        vocabulary=vocab,
        topic_word=phi_acc / n_avg,
        doc_topic=theta,
        doc_ids=doc_ids,
        primary_topic=primary,
        rejected_ids=rejected,
        sweep_token_totals=token_totals,
        n_tokens=int(n_tokens),
    )


def infer_doc_topics(model: TopicModel, stems: Sequence[str],
                     iterations: int = 200, burn_in: int = 100) -> InferredTopics:
    """Topic mixture for an unseen document with topics held fixed.

    Out-of-vocabulary stems are ignored; a document with no known stems
    gets the uniform mixture and a warning flag.  Deterministic given the
    model seed.
    """
    col = {w: j for j, w in enumerate(model.vocabulary)}
    word_of = np.asarray([col[s] for s in stems if s in col], dtype=np.int64)
    k = model.topic_word.shape[0]
    if word_of.shape[0] == 0:
        return InferredTopics(relevance=np.full(k, 1.0 / k), all_oov=True)
    theta_acc = np.zeros(k)
    _fold_in(word_of, model.topic_word, model.config.effective_alpha,
             iterations, burn_in, model.config.seed, theta_acc)
    return InferredTopics(relevance=theta_acc / (iterations - burn_in), all_oov=False)


# ---------------------------------------------------------------------------
# topic-count selection


DEFAULT_CANDIDATE_KS = tuple(range(10, 101, 10))


@dataclass(frozen=True)
class KSelectionRow:
    k: int
    precision: float
    recall: float
    f1: float
    n_train: int
    n_test: int
    n_classes_scored: int
    n_classes_dropped: int   # classes missing from the test split


@dataclass(eq=False)
class KSelectionReport:
    rows: list[KSelectionRow]
    chosen_k: int
    models: dict[int, TopicModel] = field(repr=False, default_factory=dict)

    def csv_text(self) -> str:
        lines = ["k,precision,recall,f1"]
        for row in self.rows:
            lines.append(f"{row.k},{row.precision:.6f},{row.recall:.6f},{row.f1:.6f}")
        return "\n".join(lines) + "\n"


def _stratified_split(labels: np.ndarray, train_frac: float, seed: int):
    """Per-class shuffled split. Singleton classes go entirely to train."""
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        members = members[rng.permutation(members.shape[0])]
        if members.shape[0] == 1:
            train_idx.extend(members)
            continue
        n_train = min(members.shape[0] - 1, max(1, int(round(train_frac * members.shape[0]))))
        train_idx.extend(members[:n_train])
        test_idx.extend(members[n_train:])
    return np.sort(np.asarray(train_idx)), np.sort(np.asarray(test_idx))


class MultinomialNaiveBayes:
    """Multinomial NB over non-negative feature vectors with add-one smoothing.

    Accepts fractional counts (tf-idf weights) as-is.
    """

    def __init__(self):
        self.classes_: np.ndarray | None = None
        self.log_prior_: np.ndarray | None = None
        self.log_like_: np.ndarray | None = None

    def fit(self, x: np.ndarray, y: np.ndarray) -> "MultinomialNaiveBayes":
        if x.ndim != 2 or x.shape[0] != y.shape[0]:
            raise ValidationError("feature matrix and labels disagree")
        if np.any(x < 0):
            raise ValidationError("features must be non-negative")
        self.classes_ = np.unique(y)
        n_classes, n_feat = self.classes_.shape[0], x.shape[1]
        self.log_prior_ = np.empty(n_classes)
        self.log_like_ = np.empty((n_classes, n_feat))
        for c, cls in enumerate(self.classes_):
            rows = x[y == cls]
            self.log_prior_[c] = np.log(rows.shape[0] / x.shape[0])
            counts = rows.sum(axis=0) + 1.0
            self.log_like_[c] = np.log(counts / counts.sum())
        return self

    def predict(self, x: np.ndarray) -> np.ndarray:
        if self.classes_ is None:
            raise DomainError("classifier is not fitted")
        scores = x @ self.log_like_.T + self.log_prior_
        return self.classes_[np.argmax(scores, axis=1)]


def _macro_prf(y_true: np.ndarray, y_pred: np.ndarray) -> tuple[float, float, float, int]:
    """Macro precision/recall/F1 over classes present in y_true.

    Per-class ratios with zero denominators count as 0, never NaN.
    """
    classes = np.unique(y_true)
    ps, rs, fs = [], [], []
    for cls in classes:
        tp = np.sum((y_pred == cls) & (y_true == cls))
        fp = np.sum((y_pred == cls) & (y_true != cls))
        fn = np.sum((y_pred != cls) & (y_true == cls))
        p = tp / (tp + fp) if tp + fp else 0.0
        r = tp / (tp + fn) if tp + fn else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        ps.append(p)
        rs.append(r)
        fs.append(f)
    return float(np.mean(ps)), float(np.mean(rs)), float(np.mean(fs)), int(classes.shape[0])


def select_k(corpus: Corpus, candidate_ks: Sequence[int] = DEFAULT_CANDIDATE_KS,
             split_seed: int = 0, *,
             pipeline: TokenPipelineConfig | None = None,
             lda_alpha: float | None = None, lda_beta: float = 0.01,
             lda_iterations: int = 1000, lda_burn_in: int = 800,
             train_frac: float = 0.8,
             keep_models: bool = False) -> KSelectionReport:
    """Choose the topic count whose labels a text classifier can recover best.

    Each candidate fit gets its own derived seed so candidates stay
    independent.  Ties break toward the smaller candidate.
    """
    if not candidate_ks:
        raise DomainError("need at least one candidate topic count")
    pipeline = pipeline or TokenPipelineConfig()
    stems = tokenize_corpus(corpus, pipeline)
    index = build_tfidf(corpus, pipeline)
    doc_ids = sorted(corpus.articles)
    n_feat = len(index.vocabulary)
    features = {}
    for aid in doc_ids:
        row = np.zeros(n_feat)
        for j, wt in index.doc_vectors[aid].items():
            row[j] = wt
        features[aid] = row

    rows = []
    models: dict[int, TopicModel] = {}
    for k in sorted(set(candidate_ks)):
        config = LdaConfig(k=k, alpha=lda_alpha, beta=lda_beta,
                           iterations=lda_iterations, burn_in=lda_burn_in,
                           seed=split_seed + k)
        model = fit_lda(corpus, stems, config)
        if keep_models:
            models[k] = model
        kept = model.doc_ids
        labels = np.asarray([model.primary_topic[aid] for aid in kept])
        x = np.stack([features[aid] for aid in kept])
        train_idx, test_idx = _stratified_split(labels, train_frac, split_seed)
        if test_idx.shape[0] == 0:
            raise DomainError("stratified split left no test documents")
        clf = MultinomialNaiveBayes().fit(x[train_idx], labels[train_idx])
        pred = clf.predict(x[test_idx])
        p, r, f, n_scored = _macro_prf(labels[test_idx], pred)
        n_dropped = int(np.unique(labels).shape[0]) - n_scored
        rows.append(KSelectionRow(k=k, precision=p, recall=r, f1=f,
                                  n_train=int(train_idx.shape[0]),
                                  n_test=int(test_idx.shape[0]),
                                  n_classes_scored=n_scored,
                                  n_classes_dropped=n_dropped))
    best = max(rows, key=lambda row: (row.f1, -row.k))
    return KSelectionReport(rows=rows, chosen_k=best.k, models=models)
