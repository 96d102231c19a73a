/** DOM wiring for the what-if console.
 *
 * All state lives in a WhatIfSession; this module only moves values
 * between form controls, the ApiClient and the renderers in view.ts.
 */

import { ApiClient } from "./api.js";
import { WhatIfSession } from "./session.js";
import { canCompare, compareRuns } from "./compare.js";
import {
  renderCompare,
  renderError,
  renderHistoryList,
  renderResult,
  escapeHtml,
} from "./view.js";

const api = new ApiClient("", 15_000);
const session = new WhatIfSession();
const selection = new Set<number>();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const titleInput = el<HTMLInputElement>("title");
const bodyInput = el<HTMLTextAreaElement>("body");
const dateInput = el<HTMLInputElement>("planned-date");
const variantSelect = el<HTMLSelectElement>("variant");
const submitButton = el<HTMLButtonElement>("submit");
const compareButton = el<HTMLButtonElement>("compare");
const errorPanel = el<HTMLDivElement>("error");
const resultPanel = el<HTMLDivElement>("result");
const historyPanel = el<HTMLDivElement>("history-list");
const comparePanel = el<HTMLDivElement>("compare-out");
const statusLine = el<HTMLParagraphElement>("status");

function syncControls(): void {
  session.draft.title = titleInput.value;
  session.draft.body = bodyInput.value;
  session.draft.plannedDate = dateInput.value;
  session.draft.variant = variantSelect.value;
  submitButton.disabled = !session.canSubmit();
  compareButton.disabled = !canCompare([...selection]);
}

function refreshHistory(): void {
  historyPanel.innerHTML = renderHistoryList(session.history, selection);
}

async function submitDraft(): Promise<void> {
  if (!session.canSubmit()) {
    return;
  }
  const request = session.toRequest();
  session.pending = true;
  syncControls();
  errorPanel.innerHTML = "";
  try {
    const response = await api.whatIf(request);
    const index = session.record(request, response);
    resultPanel.innerHTML = renderResult(session.history[index]);
    refreshHistory();
  } catch (err) {
    // failed submissions never enter the history
    errorPanel.innerHTML = renderError(err);
  } finally {
    session.pending = false;
    syncControls();
  }
}

function compareSelected(): void {
  const picked = [...selection].sort((a, b) => a - b);
  if (!canCompare(picked)) {
    return;
  }
  comparePanel.innerHTML = renderCompare(compareRuns(session.history, picked));
}

function dayAfter(date: string): string {
  const stamp = new Date(`${date}T00:00:00Z`).getTime() + 86_400_000;
  return new Date(stamp).toISOString().slice(0, 10);
}

async function boot(): Promise<void> {
  for (const control of [titleInput, bodyInput, dateInput, variantSelect]) {
    control.addEventListener("input", syncControls);
    control.addEventListener("change", syncControls);
  }
  submitButton.addEventListener("click", () => {
    void submitDraft();
  });
  compareButton.addEventListener("click", compareSelected);
  historyPanel.addEventListener("change", (event) => {
    const target = event.target;
    if (target instanceof HTMLInputElement && target.dataset.index) {
      const index = Number(target.dataset.index);
      if (target.checked) {
        selection.add(index);
      } else {
        selection.delete(index);
      }
      syncControls();
    }
  });

  try {
    const snapshot = await api.snapshot();
    variantSelect.innerHTML = snapshot.variants
      .map((v) => `<option value="${escapeHtml(v)}">${escapeHtml(v)}</option>`)
      .join("");
    variantSelect.value = session.draft.variant;
    if (dateInput.value === "") {
      dateInput.value = dayAfter(snapshot.panel_end);
    }
    statusLine.textContent =
      `model ${snapshot.corpus_digest.slice(0, 12)}, ` +
      `${snapshot.n_articles} articles, ${snapshot.n_topics} topics, ` +
      `panel ${snapshot.panel_start} to ${snapshot.panel_end}`;
  } catch (err) {
    errorPanel.innerHTML = renderError(err);
  }
  syncControls();
  refreshHistory();
}

void boot();
