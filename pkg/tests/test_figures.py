"""PNG rendering for the report commands.

The module promises byte-identical output for identical inputs; every
saver is rendered twice and compared, and the PNGs must carry no
Software metadata chunk (that chunk would embed library versions).
"""

from __future__ import annotations

import pytest

from newscast.articlepred import EvaluationRow, analytics
from newscast.figures import (save_backtest_figure, save_ccdf_figure,
                              save_evaluation_figure, save_growth_figure,
                              save_kselection_figure, save_panel_figure,
                              save_shelf_life_figure)
from newscast.forecast import backtest
from newscast.topics import KSelectionReport, KSelectionRow

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def render_twice(save, tmp_path, *args) -> bytes:
    first, second = tmp_path / "a.png", tmp_path / "b.png"
    save(*args, first)
    save(*args, second)
    data = first.read_bytes()
    assert data.startswith(PNG_MAGIC)
    assert data == second.read_bytes(), "re-render changed the image"
    assert b"Software" not in data
    return data


def test_panel_figure(var_panel, tmp_path):
    render_twice(save_panel_figure, tmp_path, var_panel)


def test_panel_figure_topic_subset(var_panel, tmp_path):
    everything = render_twice(save_panel_figure, tmp_path, var_panel)
    out = tmp_path / "subset.png"
    save_panel_figure(var_panel, out, topics=[0])
    assert out.read_bytes() != everything


def test_backtest_figure(var_panel, tmp_path):
    report = backtest(var_panel, kind="LR", horizons=(2, 3),
                      window_days=20, delta=2, s=3)
    render_twice(save_backtest_figure, tmp_path, report)


def test_kselection_figure(tmp_path):
    report = KSelectionReport(
        rows=[KSelectionRow(2, 0.6, 0.5, 0.55, 80, 20, 2, 0),
              KSelectionRow(3, 0.9, 0.8, 0.85, 80, 20, 3, 0)],
        chosen_k=3)
    render_twice(save_kselection_figure, tmp_path, report)


def test_evaluation_figure(tmp_path):
    rows = [EvaluationRow("NN", 0.1, 3, 42.0, 20, 1),
            EvaluationRow("NN_T", 0.1, 3, 35.5, 20, 1)]
    render_twice(save_evaluation_figure, tmp_path, rows)


@pytest.fixture
def tiny_report(tiny_corpus):
    return analytics(tiny_corpus)


def test_ccdf_figure(tiny_report, tmp_path):
    render_twice(save_ccdf_figure, tmp_path, tiny_report)


def test_growth_figure(tiny_report, tmp_path):
    render_twice(save_growth_figure, tmp_path, tiny_report)


def test_shelf_life_figure(tiny_report, tmp_path):
    render_twice(save_shelf_life_figure, tmp_path, tiny_report)
