"""Shared fixtures.

The hand corpus is small enough to verify with pencil and paper; the
synthetic ones are seeded so every run sees identical data.  Expensive
artifacts (a fitted snapshot on disk) are session-scoped.
"""

from __future__ import annotations

from datetime import date, timedelta

import pytest

from newscast.cli import main as cli_main
from newscast.corpus import Article, Kind, VisitSeries, build_corpus
from newscast.forecast import TopicVolumePanel
from newscast.synth import SynthSpec, coupled_var, diagonal_var, generate_synthetic

D0 = date(2023, 3, 6)


def day(n: int) -> date:
    return D0 + timedelta(days=n)


def make_article(aid, title, body, pub, kind=Kind.NEWS):
    return Article(id=aid, title=title, body=body, published_at=pub, kind=kind)


@pytest.fixture
def tiny_corpus():
    """Six articles over three publication days, visits chosen for hand
    arithmetic (n4 carries the 5/4/1 shelf-life case)."""
    articles = [
        make_article("n1", "striker transfer saga",
                     "the striker transfer saga continues at the club", day(0)),
        make_article("n2", "market rally pauses",
                     "stocks pause after a long market rally", day(0)),
        make_article("n3", "striker signs contract",
                     "the striker signs a long contract with the club", day(0)),
        make_article("n4", "quiet coastal town",
                     "a quiet coastal town draws painters every spring",
                     day(1), Kind.OPINION),
        make_article("n5", "rally extends gains",
                     "the market rally extends gains into a second week", day(1)),
        make_article("n6", "transfer window shuts",
                     "clubs rush as the transfer window finally shuts", day(2)),
    ]
    series = [
        VisitSeries("n1", ((day(0), 50), (day(1), 30), (day(2), 10), (day(3), 5)),
                    early=((5, 1), (60, 8), (360, 25))),
        VisitSeries("n2", ((day(0), 100), (day(1), 40), (day(3), 10))),
        VisitSeries("n3", ((day(0), 300),)),
        VisitSeries("n4", ((day(1), 5), (day(2), 4), (day(3), 1))),
        VisitSeries("n5", ((day(1), 80), (day(2), 20))),
        VisitSeries("n6", ((day(2), 60), (day(3), 25), (day(4), 15))),
    ]
    return build_corpus(articles, series)


@pytest.fixture(scope="session")
def planted():
    """(corpus, truth) with three well-separated topic blocks."""
    spec = SynthSpec(
        k_true=3, vocab_size=120, n_articles=150, n_days=40,
        var_coefficients=diagonal_var(3, 2),
        noise_scale=0.05, shared_vocab_fraction=0.0,
        doc_topic_alpha=0.12, seed=42,
    )
    return generate_synthetic(spec)


@pytest.fixture(scope="session")
def var_panel():
    """Noiseless coupled vector-autoregression volumes as a panel: every
    value is an exact affine function of its lags."""
    spec = SynthSpec(
        k_true=3, vocab_size=60, n_articles=30, n_days=40,
        var_coefficients=coupled_var(3, 2, partners=1, rho=0.95, seed=2),
        noise_scale=0.0, seed=11,
    )
    _, truth = generate_synthetic(spec)
    return TopicVolumePanel(topics=[0, 1, 2], dates=list(truth.dates),
                            values=truth.volumes)


@pytest.fixture(scope="session")
def snapshot_env(tmp_path_factory):
    """A synthetic corpus plus a fitted snapshot, built once through the CLI.

    Fast settings: small corpus, short LDA chain.  Everything downstream
    (service, snapshot round-trip, CLI reports) reads from here.
    """
    root = tmp_path_factory.mktemp("snapenv")
    corpus_dir = root / "corpus"
    snap_dir = root / "snap"
    rc = cli_main([
        "synth", "--out", str(corpus_dir), "--seed", "3",
        "--topics", "3", "--vocab", "120", "--articles", "200", "--days", "80",
    ])
    assert rc == 0
    rc = cli_main([
        "fit",
        "--articles", str(corpus_dir / "articles.jsonl"),
        "--visits", str(corpus_dir / "visits.csv"),
        "--early", str(corpus_dir / "early.csv"),
        "--out", str(snap_dir),
        "--k", "3", "--lda-iterations", "300", "--lda-burn-in", "200",
    ])
    assert rc == 0
    return {"root": root, "corpus": corpus_dir, "snapshot": snap_dir}
