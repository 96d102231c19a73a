/** HTML renderers for the dashboard panels.
 *
 * Each function turns state into a markup string; the DOM layer only
 * assigns innerHTML. Service-provided text is escaped, numeric fields are
 * rendered through format.ts so the screen shows the response values
 * untouched.
 */

import type { SessionEntry } from "./session.js";
import type { CompareRow } from "./compare.js";
import { ServiceError, TimeoutError } from "./api.js";
import { floatText, intText, topicLabel } from "./format.js";
import { trendChart } from "./chart.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

/** Full result panel for one recorded run. */
export function renderResult(entry: SessionEntry): string {
  const r = entry.response;
  const parts: string[] = [];
  parts.push('<article class="run">');
  parts.push(
    `<header><span class="visits">${floatText(r.predicted_visits)}</span>` +
      ` predicted visits <span class="variant">${escapeHtml(r.variant)}</span>` +
      ` for <time>${escapeHtml(r.planned_date)}</time></header>`,
  );
  parts.push(
    `<p class="topic">${escapeHtml(topicLabel(r.primary_topic.id, r.primary_topic.top_stems))}</p>`,
  );

  parts.push('<table class="neighbors"><thead><tr>');
  parts.push(
    "<th>article</th><th>title</th><th>published</th><th>similarity</th>",
  );
  parts.push("</tr></thead><tbody>");
  for (const n of r.neighbors) {
    parts.push(
      `<tr><td>${escapeHtml(n.article_id)}</td>` +
        `<td>${escapeHtml(n.title)}</td>` +
        `<td>${escapeHtml(n.published_at)}</td>` +
        `<td class="similarity">${floatText(n.similarity)}</td></tr>`,
    );
  }
  parts.push("</tbody></table>");

  parts.push(
    trendChart({
      history: r.volume_history,
      forecast: r.volume_forecast,
      publicationDate: r.planned_date,
    }),
  );

  if (r.warnings.length > 0) {
    parts.push('<ul class="warnings">');
    for (const w of r.warnings) {
      parts.push(`<li>${escapeHtml(w)}</li>`);
    }
    parts.push("</ul>");
  }
  parts.push("</article>");
  return parts.join("");
}

/** Visible failure panel; every service error ends up here. */
export function renderError(err: unknown): string {
  if (err instanceof TimeoutError) {
    return `<div class="error"><p>request timed out: ${escapeHtml(err.message)}</p></div>`;
  }
  if (err instanceof ServiceError) {
    const parts: string[] = ['<div class="error">'];
    const label = err.status > 0 ? `service error ${err.status}` : "service error";
    parts.push(`<p>${label}: ${escapeHtml(err.message)}</p>`);
    if (err.details.length > 0) {
      parts.push('<ul class="error-details">');
      for (const d of err.details) {
        parts.push(
          `<li><code>${escapeHtml(d.field)}</code>: ${escapeHtml(d.message)}</li>`,
        );
      }
      parts.push("</ul>");
    }
    parts.push("</div>");
    return parts.join("");
  }
  return `<div class="error"><p>${escapeHtml(String(err))}</p></div>`;
}

/** Comparison table; the best row is highlighted, ties say so. */
export function renderCompare(rows: CompareRow[]): string {
  const parts: string[] = ['<table class="compare"><thead><tr>'];
  parts.push(
    "<th>run</th><th>variant</th><th>topic</th><th>planned</th><th>predicted visits</th>",
  );
  parts.push("</tr></thead><tbody>");
  for (const row of rows) {
    const cls = row.best ? ' class="best"' : "";
    const note = row.tie ? " (tie)" : "";
    parts.push(
      `<tr${cls}><td>run ${row.index + 1}</td>` +
        `<td>${escapeHtml(row.variant)}</td>` +
        `<td>${intText(row.topicId)}</td>` +
        `<td>${escapeHtml(row.plannedDate)}</td>` +
        `<td class="visits">${floatText(row.predictedVisits)}${note}</td></tr>`,
    );
  }
  parts.push("</tbody></table>");
  return parts.join("");
}

/** Selectable history list feeding the compare control. */
export function renderHistoryList(
  history: readonly SessionEntry[],
  selection: ReadonlySet<number>,
): string {
  if (history.length === 0) {
    return '<p class="empty">no runs yet</p>';
  }
  const parts: string[] = ['<ol class="history">'];
  for (const [index, entry] of history.entries()) {
    const checked = selection.has(index) ? " checked" : "";
    const r = entry.response;
    parts.push(
      `<li><label><input type="checkbox" data-index="${index}"${checked}>` +
        ` ${escapeHtml(r.variant)} on ${escapeHtml(r.planned_date)},` +
        ` ${floatText(r.predicted_visits)} visits</label></li>`,
    );
  }
  parts.push("</ol>");
  return parts.join("");
}
