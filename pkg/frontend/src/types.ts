/** Response shapes of the /api/v1 JSON surface, as served. */

export interface Recommendation {
  name: string;
  confidence: number;
  vocabulary: string;
}

export interface RecommendResponse {
  term: string;
  metric: string;
  snapshot: string;
  recommendations: Recommendation[];
}

export interface ExpandResponse {
  term: string;
  metric: string;
  snapshot: string;
  n: number;
  original: string[];
  added: string[];
  expanded: string[];
}

export interface CloudEntry {
  term: string;
  weight: number;
  bucket: number;
}

export interface CloudResponse {
  term: string;
  metric: string;
  snapshot: string;
  k: number;
  entries: CloudEntry[];
}

export interface VocabularySummary {
  name: string;
  terms: number;
  explicit: boolean;
}

export interface RepositoryProfile {
  repository_id: string;
  oai_url: string;
  set_spec: string | null;
  language: string;
  chosen_metric: string;
  vocabulary: VocabularySummary | null;
  last_harvest: string | null;
  snapshot: string | null;
  created_at: string;
}

export interface JobView {
  job_id: string;
  repository_id: string;
  mode: string;
  state: string;
  stage: string | null;
  records_seen: number;
  error: string | null;
  created_at: string;
  started_at: string | null;
  finished_at: string | null;
}

export interface AccountCreated {
  account_id: string;
  api_key: string;
}

export interface RegistrationForm {
  oai_url: string;
  language: string;
  set_spec?: string | null;
}

/** Job states after which polling can stop. */
export const TERMINAL_JOB_STATES = ["done", "failed"];

/** Metrics the service can rank with right now. */
export const SELECTABLE_METRICS = ["jaccard", "nwd"];

/** Reserved for the external machine-learning module; shown but disabled. */
export const RESERVED_METRIC = "ml";
