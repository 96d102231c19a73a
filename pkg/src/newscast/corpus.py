"""Article corpus: data model, line-delimited/CSV ingestion, validation.

File formats
------------
Articles: UTF-8, one JSON object per line with fields
    id, title, body, published_at (ISO-8601 date), kind ("News" | "Opinion")
Visits: CSV with header ``article_id,date,visits``.
Early visits (optional): CSV with header
    ``article_id,offset_minutes,cumulative_visits`` and offsets in {5, 60, 360}.

Missing days in a visit series mean zero visits, not missing data.
"""

from __future__ import annotations

import bisect
import csv
import json
from dataclasses import dataclass, field
from datetime import date, timedelta
from enum import Enum
from pathlib import Path

from .errors import DomainError, LookupError_, ParseError, ReferentialIntegrityError, ValidationError

EARLY_OFFSETS = (5, 60, 360)  # minutes after publication


class Kind(str, Enum):
    NEWS = "News"
    OPINION = "Opinion"


@dataclass(frozen=True)
class Article:
    id: str
    title: str
    body: str
    published_at: date
    kind: Kind


@dataclass(frozen=True)
class VisitSeries:
    """Daily visit counts for one article, dates strictly increasing."""

    article_id: str
    daily: tuple[tuple[date, int], ...]
    early: tuple[tuple[int, int], ...] = ()  # (offset_minutes, cumulative_visits)

    def day_counts(self) -> dict[date, int]:
        return dict(self.daily)

    def total(self) -> int:
        return sum(c for _, c in self.daily)


@dataclass
class Corpus:
    articles: dict[str, Article]
    visits: dict[str, VisitSeries]
    date_range: tuple[date, date] | None

    # memoized per-article cumulative lookup tables, built lazily
    _cumsums: dict[str, tuple[tuple[date, ...], tuple[int, ...]]] = field(
        default_factory=dict, repr=False, compare=False
    )

    @property
    def n(self) -> int:
        return len(self.articles)

    def article(self, article_id: str) -> Article:
        try:
            return self.articles[article_id]
        except KeyError:
            raise LookupError_(f"unknown article id {article_id!r}") from None

    def ids_by_date(self) -> dict[date, list[str]]:
        """Article ids grouped by publication date, ids sorted within a day."""
        by_date: dict[date, list[str]] = {}
        for a in self.articles.values():
            by_date.setdefault(a.published_at, []).append(a.id)
        for ids in by_date.values():
            ids.sort()
        return by_date


def _validate_series(article: Article, series: VisitSeries) -> None:
    prev = None
    for d, count in series.daily:
        if count < 0:
            raise ValidationError(f"article {article.id!r}: negative visit count on {d}")
        if d < article.published_at:
            raise ValidationError(
                f"article {article.id!r}: visit on {d} precedes publication {article.published_at}"
            )
        if prev is not None and d <= prev:
            raise ValidationError(f"article {article.id!r}: dates not strictly increasing at {d}")
        prev = d
    if series.early:
        day0 = dict(series.daily).get(article.published_at, 0)
        prev_off, prev_cum = None, None
        for off, cum in series.early:
            if off not in EARLY_OFFSETS:
                raise ValidationError(
                    f"article {article.id!r}: early offset {off} not in {EARLY_OFFSETS}"
                )
            if cum < 0:
                raise ValidationError(f"article {article.id!r}: negative early count")
            if prev_off is not None and (off <= prev_off or cum < prev_cum):
                raise ValidationError(
                    f"article {article.id!r}: early counts must be non-decreasing in offset"
                )
            if cum > day0:
                raise ValidationError(
                    f"article {article.id!r}: early count {cum} exceeds day-0 visits {day0}"
                )
            prev_off, prev_cum = off, cum


def build_corpus(articles: list[Article], series_list: list[VisitSeries]) -> Corpus:
    """Assemble and validate a corpus from in-memory parts.

    Articles without a visit series get an empty one.  All type invariants
    are enforced here, so every constructed Corpus is valid.
    """
    by_id: dict[str, Article] = {}
    for a in articles:
        if a.id in by_id:
            raise ValidationError(f"duplicate article id {a.id!r}")
        if not a.title.strip() or not a.body.strip():
            raise ValidationError(f"article {a.id!r}: empty title or body")
        by_id[a.id] = a

    visits: dict[str, VisitSeries] = {}
    for s in series_list:
        if s.article_id not in by_id:
            raise ReferentialIntegrityError(
                f"visit series references unknown article {s.article_id!r}"
            )
        if s.article_id in visits:
            raise ValidationError(f"duplicate visit series for article {s.article_id!r}")
        _validate_series(by_id[s.article_id], s)
        visits[s.article_id] = s
    for aid in by_id:
        if aid not in visits:
            visits[aid] = VisitSeries(article_id=aid, daily=())

    all_dates = [a.published_at for a in by_id.values()]
    for s in visits.values():
        all_dates.extend(d for d, _ in s.daily)
    date_range = (min(all_dates), max(all_dates)) if all_dates else None
    return Corpus(articles=by_id, visits=visits, date_range=date_range)


def load_corpus(articles_path, visits_path, early_path=None) -> Corpus:
    """Load and validate a corpus from its on-disk representation."""
    try:
        articles = _read_articles(Path(articles_path))
        rows = _read_visit_rows(Path(visits_path))
        early = _read_early_rows(Path(early_path)) if early_path else {}
    except OSError as exc:
        raise ParseError(exc.filename or "?", 0,
                         exc.strerror or str(exc)) from None

    known = {a.id for a in articles}
    daily: dict[str, list[tuple[date, int]]] = {}
    for aid, d, count in rows:
        if aid not in known:
            raise ReferentialIntegrityError(f"visit row references unknown article {aid!r}")
        daily.setdefault(aid, []).append((d, count))
    for aid in early:
        if aid not in known:
            raise ReferentialIntegrityError(f"early row references unknown article {aid!r}")

    series = []
    for aid in sorted(set(daily) | set(early)):
        days = sorted(daily.get(aid, ()))
        series.append(
            VisitSeries(article_id=aid, daily=tuple(days), early=tuple(sorted(early.get(aid, ()))))
        )
    return build_corpus(articles, series)


def _read_articles(path: Path) -> list[Article]:
    articles = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, line_no, f"invalid JSON: {exc.msg}") from None
            try:
                articles.append(
                    Article(
                        id=str(rec["id"]),
                        title=str(rec["title"]),
                        body=str(rec["body"]),
                        published_at=date.fromisoformat(rec["published_at"]),
                        kind=Kind(rec["kind"]),
                    )
                )
            except KeyError as exc:
                raise ParseError(path, line_no, f"missing field {exc.args[0]!r}") from None
            except ValueError as exc:
                raise ParseError(path, line_no, str(exc)) from None
    return articles


def _read_visit_rows(path: Path) -> list[tuple[str, date, int]]:
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["article_id", "date", "visits"]:
            raise ParseError(path, 1, "expected header 'article_id,date,visits'")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(path, line_no, f"expected 3 fields, got {len(row)}")
            try:
                d = date.fromisoformat(row[1])
                count = int(row[2])
            except ValueError as exc:
                raise ParseError(path, line_no, str(exc)) from None
            if count < 0:
                raise ValidationError(f"{path}:{line_no}: negative visit count")
            rows.append((row[0], d, count))
    return rows


def _read_early_rows(path: Path) -> dict[str, list[tuple[int, int]]]:
    early: dict[str, list[tuple[int, int]]] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["article_id", "offset_minutes", "cumulative_visits"]:
            raise ParseError(path, 1, "expected header 'article_id,offset_minutes,cumulative_visits'")
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(path, line_no, f"expected 3 fields, got {len(row)}")
            try:
                off = int(row[1])
                cum = int(row[2])
            except ValueError as exc:
                raise ParseError(path, line_no, str(exc)) from None
            early.setdefault(row[0], []).append((off, cum))
    return early


def write_corpus(corpus: Corpus, articles_path, visits_path, early_path=None) -> None:
    """Inverse of load_corpus; output is deterministic (sorted by id/date)."""
    with open(articles_path, "w", encoding="utf-8") as fh:
        for aid in sorted(corpus.articles):
            a = corpus.articles[aid]
            rec = {
                "id": a.id,
                "title": a.title,
                "body": a.body,
                "published_at": a.published_at.isoformat(),
                "kind": a.kind.value,
            }
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")
    with open(visits_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["article_id", "date", "visits"])
        for aid in sorted(corpus.visits):
            for d, count in corpus.visits[aid].daily:
                writer.writerow([aid, d.isoformat(), count])
    if early_path is not None:
        with open(early_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["article_id", "offset_minutes", "cumulative_visits"])
            for aid in sorted(corpus.visits):
                for off, cum in corpus.visits[aid].early:
                    writer.writerow([aid, off, cum])


def cumulative_visits(corpus: Corpus, article_id: str, upto_date: date) -> int:
    """Total visits for an article on days published_at..upto_date inclusive.

    Days with no recorded row count as zero.
    """
    article = corpus.article(article_id)
    if upto_date < article.published_at:
        raise DomainError(
            f"upto_date {upto_date} precedes publication {article.published_at} "
            f"of article {article_id!r}"
        )
    table = corpus._cumsums.get(article_id)
    if table is None:
        dates, counts = [], []
        running = 0
        for d, c in corpus.visits[article_id].daily:
            running += c
            dates.append(d)
            counts.append(running)
        table = (tuple(dates), tuple(counts))
        corpus._cumsums[article_id] = table
    dates, cums = table
    # rightmost recorded date <= upto_date
    i = bisect.bisect_right(dates, upto_date)
    return cums[i - 1] if i else 0


def span_days(first: date, last: date) -> list[date]:
    """Inclusive list of calendar days between two dates."""
    n = (last - first).days + 1
    return [first + timedelta(days=i) for i in range(n)]
