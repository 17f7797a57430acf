// Wire types mirroring the service JSON bodies. The UI never computes scores;
// every number rendered comes verbatim from one of these payloads.

export interface PurchaseItem {
  name: string;
  quantity?: number | null;
  unit?: string | null;
  spec?: string | null;
}

export interface FieldScore {
  embedding: number;
  vocabulary: number;
}

export interface ItemMatch {
  current_index: number;
  best_index: number | null;
  dist: number;
}

export interface ListDist {
  value: number;
  per_item: ItemMatch[];
}

export interface Candidate {
  doc_id: string;
  d_score: number;
  field_scores: Record<string, FieldScore>;
  list_dist: ListDist | null;
}

export type SessionState = "collecting" | "ready" | "generated";

export interface SessionView {
  session_id: string;
  template_id: string;
  accumulated_info: Record<string, string>;
  missing: string[];
  transcript: [string, string][];
  state: SessionState;
}

export interface TableView {
  field_names: string[];
  rows: string[][];
}

export interface DocumentView {
  id: string;
  fields: Record<string, string>;
  paragraphs: string[];
  tables: TableView[];
  purchase_items: PurchaseItem[];
}

export interface EvaluationView {
  para_score: number;
  table_score: number;
  score: number;
  per_paragraph: number[];
  per_table: number[];
  table_matching: Record<string, number>;
  warnings: string[];
}

export interface DroppedItem {
  item: { name: string };
  dist: number;
  best_match: string;
}

export interface RefineView {
  document: DocumentView;
  dropped: DroppedItem[];
  warnings: string[];
  source: string;
  theta: number;
}

export interface Health {
  corpus_size: number;
  index_fingerprint: string | null;
}
