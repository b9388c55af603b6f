export interface ResultPayload {
  question_id: number;
  title: string | null;
  url: string;
  similarity: number;
  summary: string | null;
  has_accepted_answer: boolean;
  view_count: number | null;
  score: number | null;
}

export interface SearchResponse {
  results: ResultPayload[];
  query_tokens_total: number;
  query_tokens_known: number;
  elapsed_ms: number;
  reason?: string;
}
