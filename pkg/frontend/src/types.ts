/** Wire types for the prediction service.
 *
 * Field names mirror the JSON payloads exactly (snake_case) so that values
 * pass from response to screen without any renaming or reshaping layer.
 */

export interface TopicSummary {
  id: number;
  top_stems: string[];
}

export interface NeighborEntry {
  article_id: string;
  title: string;
  published_at: string;
  similarity: number;
}

export interface VolumePoint {
  date: string;
  visits: number;
}

export interface ForecastPoint {
  date: string;
  visits: number;
  clamped: boolean;
}

export interface WhatIfRequest {
  title: string;
  body: string;
  planned_date: string;
  variant: string;
}

export interface WhatIfResponse {
  predicted_visits: number;
  variant: string;
  planned_date: string;
  primary_topic: TopicSummary;
  neighbors: NeighborEntry[];
  volume_history: VolumePoint[];
  volume_forecast: ForecastPoint[];
  warnings: string[];
}

export interface SnapshotInfo {
  version: string;
  corpus_digest: string;
  created_at: string;
  n_articles: number;
  n_topics: number;
  panel_start: string;
  panel_end: string;
  variants: string[];
  config: Record<string, unknown>;
}

export interface VolumeSeries {
  topic: number;
  history: VolumePoint[];
  forecast: ForecastPoint[];
  warnings: string[];
}

/** One field-level complaint from a 400 response. */
export interface FieldIssue {
  field: string;
  message: string;
}
