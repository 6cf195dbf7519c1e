// Payload shapes of the review service API.

export type CandidateKind = 'hsv' | 'rgb' | 'saliency';
export type Choice = CandidateKind | 'reject';
export type Decision = Choice | 'undecided';
export type Filter = 'all' | 'undecided' | 'decided' | 'rejected';

export const CANDIDATE_KINDS: CandidateKind[] = ['hsv', 'rgb', 'saliency'];

export interface SceneSummary {
  scene_id: string;
  class_id: number;
  background_variant: string;
  decision: Decision;
  decision_source: 'human' | 'heuristic' | null;
  revision: number;
  error: string | null;
  instance_counts: Record<CandidateKind, number>;
}

export interface CandidateStats {
  overlay_url: string;
  instance_count: number;
  areas: number[];
  total_area: number;
  degenerate: boolean;
}

export interface SceneDetail extends SceneSummary {
  image_url: string;
  candidates: Record<CandidateKind, CandidateStats>;
}

export interface SceneList {
  scenes: SceneSummary[];
  page: number;
  page_size: number;
  total: number;
  filter: string;
}

export interface Progress {
  total: number;
  undecided: number;
  decided: number;
  rejected: number;
  by_choice: Record<CandidateKind, number>;
}
