/** Text rendering for service values.
 *
 * The dashboard never does arithmetic on model numbers; what the service
 * sent is what the user sees. These helpers reproduce the exact decimal
 * text the service wrote into the JSON body: floats always carry a
 * fractional part (1 -> "1.0"), counts stay bare integers.
 */

/** Render a float field exactly as it appeared in the response body. */
export function floatText(value: number): string {
  // Integral doubles serialize with a trailing ".0" on the wire.
  if (Number.isInteger(value) && Number.isFinite(value)) {
    return `${value}.0`;
  }
  return String(value);
}

/** Render an integer field (ids, counts). */
export function intText(value: number): string {
  return String(value);
}

/** Human label for a topic: its id plus the stems that define it. */
export function topicLabel(id: number, stems: string[]): string {
  return `topic ${id}: ${stems.join(", ")}`;
}
