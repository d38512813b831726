/** Payload shapes of the review service API. */

export type PropertyKey = "I" | "U" | "R" | "D";
export type ValueSymbol = "+" | "-" | "~";

export const PROPERTY_KEYS: PropertyKey[] = ["I", "U", "R", "D"];

export interface ClassEntry {
  id: string;
  description?: string;
}

export interface TaxonomyDoc {
  classes: ClassEntry[];
  edges: [string, string][];
}

export type LabelValues = Partial<Record<PropertyKey, ValueSymbol>>;
export type LabelingDoc = Record<string, LabelValues>;
export type ProvenanceDoc = Record<string, Partial<Record<PropertyKey, "human" | "machine">>>;

export interface Violation {
  kind: string;
  subject: string;
  ancestor?: string;
  message: string;
}

export interface TrialSummary {
  strategy: string;
  representation: string;
  seed: number;
  mode: string;
  model: string;
  attempts: number;
  labelled_classes: number;
  warnings: number;
}

export interface SessionDoc {
  id: string;
  taxonomy: TaxonomyDoc;
  labeling: LabelingDoc;
  provenance: ProvenanceDoc;
  violations: Violation[];
  guidance_history: string[];
  trial_log: TrialSummary[];
  gold: LabelingDoc | null;
}

export interface PropertyAccuracy {
  correct: number;
  incorrect: number;
  accuracy: number;
}

export type AccuracyDoc = Record<PropertyKey, PropertyAccuracy>;

export interface ApiError {
  error_code: string;
  message: string;
}

export interface LlmSettings {
  endpoint_url: string;
  model: string;
  temperature?: number;
  max_tokens?: number;
  timeout?: number;
  max_retries?: number;
}

export interface LabelRunRequest {
  strategy: "zero" | "incontext";
  representation: "flat" | "hier";
  seed: number;
  mode: "overwrite" | "fill_missing";
  llm: LlmSettings;
}

export interface BenchmarkManifest {
  name: string;
  class_count: number;
  sources: string[];
}
