/** Side-by-side comparison of recorded runs. */

import type { SessionEntry } from "./session.js";

export interface CompareRow {
  /** Position of the run in the session history. */
  index: number;
  variant: string;
  topicId: number;
  plannedDate: string;
  predictedVisits: number;
  /** Highest predicted visits among the selected runs. */
  best: boolean;
  /** True on the best row when another selected run matches it exactly. */
  tie: boolean;
}

/** The compare control only makes sense with at least two runs picked. */
export function canCompare(selection: readonly number[]): boolean {
  return selection.length >= 2;
}

/**
 * Build comparison rows for the selected history entries, in selection
 * order. Exactly one row is marked best: the first one reaching the
 * maximum predicted visits. Equal maxima set the tie flag on that row.
 */
export function compareRuns(
  history: readonly SessionEntry[],
  selection: readonly number[],
): CompareRow[] {
  if (!canCompare(selection)) {
    throw new Error("comparison needs at least two runs");
  }
  const picked = selection.map((index) => {
    const entry = history[index];
    if (entry === undefined) {
      throw new Error(`no run at history index ${index}`);
    }
    return { index, entry };
  });

  const values = picked.map(({ entry }) => entry.response.predicted_visits);
  const top = Math.max(...values);
  const bestAt = values.indexOf(top);
  const tied = values.filter((v) => v === top).length > 1;

  return picked.map(({ index, entry }, position) => ({
    index,
    variant: entry.response.variant,
    topicId: entry.response.primary_topic.id,
    plannedDate: entry.response.planned_date,
    predictedVisits: entry.response.predicted_visits,
    best: position === bestAt,
    tie: position === bestAt && tied,
  }));
}
