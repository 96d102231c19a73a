"""Synthetic corpus generator: determinism, planted-truth bookkeeping,
and the vector-autoregression utilities."""

from __future__ import annotations

from datetime import timedelta

import numpy as np
import pytest

from newscast.corpus import Kind
from newscast.errors import ValidationError
from newscast.synth import (
    SynthSpec,
    companion_spectral_radius,
    coupled_var,
    diagonal_var,
    generate_synthetic,
    greedy_topic_match,
    read_ground_truth,
    var_step,
    write_ground_truth,
)


def small_spec(**overrides):
    base = dict(k_true=3, vocab_size=60, n_articles=40, n_days=20,
                var_coefficients=diagonal_var(3, 1), noise_scale=0.1, seed=5)
    base.update(overrides)
    return SynthSpec(**base)


def test_generation_is_deterministic():
    a_corpus, a_truth = generate_synthetic(small_spec())
    b_corpus, b_truth = generate_synthetic(small_spec())
    assert set(a_corpus.articles) == set(b_corpus.articles)
    for aid in a_corpus.articles:
        assert a_corpus.articles[aid] == b_corpus.articles[aid]
        assert a_corpus.visits[aid].daily == b_corpus.visits[aid].daily
        assert a_corpus.visits[aid].early == b_corpus.visits[aid].early
    np.testing.assert_array_equal(a_truth.volumes, b_truth.volumes)
    np.testing.assert_array_equal(a_truth.topic_word, b_truth.topic_word)
    assert a_truth.primary_topic == b_truth.primary_topic


def test_seed_changes_the_corpus():
    a_corpus, _ = generate_synthetic(small_spec(seed=5))
    b_corpus, _ = generate_synthetic(small_spec(seed=6))
    a_daily = [a_corpus.visits[aid].daily for aid in sorted(a_corpus.articles)]
    b_daily = [b_corpus.visits[aid].daily for aid in sorted(b_corpus.articles)]
    assert a_daily != b_daily


def test_truth_shapes_and_coverage():
    spec = small_spec()
    corpus, truth = generate_synthetic(spec)
    assert corpus.n == spec.n_articles
    assert truth.topic_word.shape == (3, 60)
    assert truth.volumes.shape == (3, 20)
    assert len(truth.dates) == 20
    assert set(truth.primary_topic) == set(corpus.articles)
    assert all(0 <= u < 3 for u in truth.primary_topic.values())
    assert truth.mixing_weights.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(truth.doc_topic.sum(axis=1), 1.0, atol=1e-9)
    np.testing.assert_allclose(truth.topic_word.sum(axis=1), 1.0, atol=1e-9)


def test_publications_start_at_start_date_and_stay_in_range():
    spec = small_spec()
    corpus, _ = generate_synthetic(spec)
    pubs = [a.published_at for a in corpus.articles.values()]
    assert min(pubs) == spec.start_date
    assert max(pubs) < spec.start_date + timedelta(days=spec.n_days)


def test_kind_fraction_extremes():
    all_news, _ = generate_synthetic(small_spec(opinion_fraction=0.0))
    assert {a.kind for a in all_news.articles.values()} == {Kind.NEWS}
    all_opinion, _ = generate_synthetic(small_spec(opinion_fraction=1.0))
    assert {a.kind for a in all_opinion.articles.values()} == {Kind.OPINION}


def test_early_counts_present_and_consistent():
    corpus, _ = generate_synthetic(small_spec())
    saw_any = False
    for s in corpus.visits.values():
        if not s.early:
            continue
        saw_any = True
        offsets = [o for o, _ in s.early]
        cums = [c for _, c in s.early]
        assert offsets == [5, 60, 360]
        assert cums == sorted(cums)
    assert saw_any


def test_ground_truth_round_trip(tmp_path):
    _, truth = generate_synthetic(small_spec())
    path = tmp_path / "truth.jsonl"
    write_ground_truth(truth, path)
    back = read_ground_truth(path)
    np.testing.assert_allclose(back.topic_word, truth.topic_word)
    np.testing.assert_allclose(back.volumes, truth.volumes)
    np.testing.assert_allclose(back.mixing_weights, truth.mixing_weights)
    assert back.primary_topic == truth.primary_topic
    assert back.dates == truth.dates
    assert back.article_ids == truth.article_ids
    assert back.vocabulary == truth.vocabulary
    # per-document mixtures are in-process only; the sidecar stores a placeholder
    assert np.all(back.doc_topic == 0.0)


def test_spec_validation():
    with pytest.raises(ValidationError):
        small_spec(vocab_size=4).validate()
    with pytest.raises(ValidationError):
        small_spec(noise_scale=-0.1).validate()
    with pytest.raises(ValidationError):
        small_spec(var_coefficients=diagonal_var(3, 1, rho=1.01)).validate()
    with pytest.raises(ValidationError):
        small_spec(var_coefficients=np.zeros((2, 2, 1))).validate()


# ---------------------------------------------------------------------------
# vector autoregression helpers


def test_diagonal_var_radius_equals_rho():
    assert companion_spectral_radius(diagonal_var(4, 1, rho=0.9)) == pytest.approx(0.9)


def test_coupled_var_is_stationary_and_coupled():
    coeffs = coupled_var(5, 2, partners=2, rho=0.97, seed=3)
    assert coeffs.shape == (5, 5, 2)
    assert companion_spectral_radius(coeffs) < 1.0
    off_diagonal = coeffs.copy()
    for lag in range(2):
        np.fill_diagonal(off_diagonal[:, :, lag], 0.0)
    assert np.abs(off_diagonal).sum() > 0


def test_var_step_is_matrix_product():
    coeffs = np.zeros((2, 2, 2))
    coeffs[:, :, 0] = [[0.5, 0.1], [0.0, 0.4]]
    coeffs[:, :, 1] = [[0.2, 0.0], [0.1, 0.3]]
    history = np.array([[10.0, 20.0], [30.0, 40.0]])   # columns: t-2, t-1
    got = var_step(coeffs, history)
    want = coeffs[:, :, 0] @ history[:, 1] + coeffs[:, :, 1] @ history[:, 0]
    np.testing.assert_allclose(got, want)


def test_greedy_topic_match_recovers_a_permutation():
    true = np.eye(3)
    fitted = true[[2, 0, 1]]
    pairs = greedy_topic_match(true, fitted)
    assert pairs == [(0, 1, pytest.approx(1.0)),
                     (1, 2, pytest.approx(1.0)),
                     (2, 0, pytest.approx(1.0))]


def test_greedy_topic_match_each_side_used_once():
    rng = np.random.default_rng(0)
    true = rng.uniform(size=(4, 10))
    fitted = rng.uniform(size=(4, 10))
    pairs = greedy_topic_match(true, fitted)
    assert len(pairs) == 4
    assert len({i for i, _, _ in pairs}) == 4
    assert len({j for _, j, _ in pairs}) == 4
    for _, _, cos in pairs:
        assert 0.0 <= cos <= 1.0 + 1e-12
