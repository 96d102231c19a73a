/** Inline SVG trend chart for a topic's daily volume.
 *
 * Observed history is drawn as a solid line, the forecast beyond the
 * publication date as a dashed one, and the publication date itself as a
 * vertical marker. The chart is a pure function of its input, so the same
 * response always yields byte-identical markup.
 */

import type { ForecastPoint, VolumePoint } from "./types.js";
import { floatText } from "./format.js";

export interface TrendChartInput {
  history: VolumePoint[];
  forecast: ForecastPoint[];
  /** Planned publication date, marked with a vertical rule. */
  publicationDate: string;
}

const WIDTH = 640;
const HEIGHT = 220;
const PAD_LEFT = 46;
const PAD_RIGHT = 16;
const PAD_TOP = 18;
const PAD_BOTTOM = 24;

const round = (v: number): number => Math.round(v * 100) / 100;

export function trendChart(input: TrendChartInput): string {
  const { history, forecast, publicationDate } = input;
  if (history.length === 0 && forecast.length === 0) {
    return `<svg class="trend" viewBox="0 0 ${WIDTH} ${HEIGHT}"><text x="${WIDTH / 2}" y="${HEIGHT / 2}" text-anchor="middle">no volume data</text></svg>`;
  }

  const dates = [
    ...history.map((p) => p.date),
    ...forecast.map((p) => p.date),
  ];
  const values = [
    ...history.map((p) => p.visits),
    ...forecast.map((p) => p.visits),
  ];
  const maxValue = Math.max(...values, 1);

  const innerW = WIDTH - PAD_LEFT - PAD_RIGHT;
  const innerH = HEIGHT - PAD_TOP - PAD_BOTTOM;
  const step = dates.length > 1 ? innerW / (dates.length - 1) : 0;
  const x = (i: number): number => round(PAD_LEFT + i * step);
  const y = (v: number): number =>
    round(PAD_TOP + (1 - v / maxValue) * innerH);

  const pointsAttr = (pts: Array<{ i: number; v: number }>): string =>
    pts.map(({ i, v }) => `${x(i)},${y(v)}`).join(" ");

  const parts: string[] = [];
  parts.push(
    `<svg class="trend" viewBox="0 0 ${WIDTH} ${HEIGHT}" role="img" aria-label="daily topic volume with forecast">`,
  );

  // faint frame and scale hints
  const floor = HEIGHT - PAD_BOTTOM;
  parts.push(
    `<line class="axis" x1="${PAD_LEFT}" y1="${floor}" x2="${WIDTH - PAD_RIGHT}" y2="${floor}"/>`,
  );
  parts.push(
    `<text class="axis-label" x="${PAD_LEFT - 6}" y="${PAD_TOP + 4}" text-anchor="end">${floatText(maxValue)}</text>`,
  );
  parts.push(
    `<text class="axis-label" x="${PAD_LEFT - 6}" y="${floor + 4}" text-anchor="end">0</text>`,
  );
  if (dates.length > 0) {
    parts.push(
      `<text class="axis-label" x="${PAD_LEFT}" y="${HEIGHT - 6}">${dates[0]}</text>`,
    );
    parts.push(
      `<text class="axis-label" x="${WIDTH - PAD_RIGHT}" y="${HEIGHT - 6}" text-anchor="end">${dates[dates.length - 1]}</text>`,
    );
  }

  if (history.length > 0) {
    const pts = history.map((p, i) => ({ i, v: p.visits }));
    parts.push(
      `<polyline class="history" fill="none" points="${pointsAttr(pts)}"/>`,
    );
  }

  if (forecast.length > 0) {
    // start the dashed segment at the last observed point so the line
    // reads as one continuous trajectory
    const offset = history.length;
    const pts = forecast.map((p, i) => ({ i: offset + i, v: p.visits }));
    if (history.length > 0) {
      pts.unshift({ i: offset - 1, v: history[history.length - 1].visits });
    }
    parts.push(
      `<polyline class="forecast" fill="none" stroke-dasharray="6 4" points="${pointsAttr(pts)}"/>`,
    );
    for (const [i, p] of forecast.entries()) {
      if (p.clamped) {
        parts.push(
          `<circle class="clamped" cx="${x(offset + i)}" cy="${y(p.visits)}" r="3"/>`,
        );
      }
    }
  }

  const pubIndex = dates.indexOf(publicationDate);
  if (pubIndex >= 0) {
    const px = x(pubIndex);
    parts.push(
      `<line class="pubdate" x1="${px}" y1="${PAD_TOP}" x2="${px}" y2="${floor}"/>`,
    );
    parts.push(
      `<text class="pubdate-label" x="${px}" y="${PAD_TOP - 5}" text-anchor="middle">publication</text>`,
    );
  }

  parts.push("</svg>");
  return parts.join("");
}
