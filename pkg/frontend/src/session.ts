/** Client-side what-if session state.
 *
 * A session is the ordered list of (request, response) pairs the user has
 * accumulated, plus the draft currently being edited. History is
 * append-only: entries are recorded after each successful submission and
 * never rewritten, so run N always refers to the same prediction. Nothing
 * here is persisted; closing the page discards the session.
 */

import type { WhatIfRequest, WhatIfResponse } from "./types.js";

export const DEFAULT_VARIANT = "NN_T_PT";

export interface Draft {
  title: string;
  body: string;
  plannedDate: string;
  variant: string;
}

export interface SessionEntry {
  request: WhatIfRequest;
  response: WhatIfResponse;
}

export class WhatIfSession {
  draft: Draft = {
    title: "",
    body: "",
    plannedDate: "",
    variant: DEFAULT_VARIANT,
  };

  /** True while a submission is on the wire; at most one at a time. */
  pending = false;

  private entries: SessionEntry[] = [];

  get history(): readonly SessionEntry[] {
    return this.entries;
  }

  /** A draft is submittable once title, body and date are all filled in
   * and no other request is in flight. */
  canSubmit(): boolean {
    return (
      !this.pending &&
      this.draft.title.trim() !== "" &&
      this.draft.body.trim() !== "" &&
      this.draft.plannedDate !== ""
    );
  }

  /** Freeze the current draft into the wire format. */
  toRequest(): WhatIfRequest {
    return {
      title: this.draft.title,
      body: this.draft.body,
      planned_date: this.draft.plannedDate,
      variant: this.draft.variant,
    };
  }

  /** Append a completed run and return its index in the history. */
  record(request: WhatIfRequest, response: WhatIfResponse): number {
    this.entries.push({ request, response });
    return this.entries.length - 1;
  }
}
