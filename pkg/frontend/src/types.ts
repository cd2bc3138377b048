// Wire types mirrored from the /v1 API. The dashboard never computes a
// verdict or a score itself; every rendered value comes from these shapes.

export type VerdictLabel = "true" | "false" | "nei";

export interface ClaimInfo {
  id: string;
  text: string;
  source: "direct" | "web_page" | "video";
  origin_ref: string | null;
  span: [number, number] | null;
  timestamp: [number, number] | null;
}

export interface EvidenceInfo {
  doc_id: string;
  title: string;
  text: string;
  score: number;
  retriever: "dense" | "sparse";
}

export interface JustificationInfo {
  text: string;
  preliminary_judgment: boolean | null;
  model_id: string;
  raw_response: string;
}

export interface Assessment {
  claim: ClaimInfo;
  label: VerdictLabel;
  confidence: number;
  evidence: EvidenceInfo[];
  justification: JustificationInfo;
  config_fingerprint: string;
  degraded: boolean;
}

export type JobState = "queued" | "running" | "done" | "failed";

export interface Job {
  job_id: string;
  kind: string;
  input_ref: string;
  state: JobState;
  results: Assessment[];
  error: string | null;
}

export interface ClaimResponse {
  assessment: Assessment;
  cached: boolean;
}

export interface JobAccepted {
  job_id: string;
  state: JobState;
}

export type InputMode = "claim" | "url" | "video";
