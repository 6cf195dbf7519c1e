// Shared test doubles: an in-memory review service behind the ApiClient
// fetch seam, faithful to the endpoint contracts (400/404/409, revisions).

import type { FetchLike } from '../src/api';
import type {
  CandidateKind,
  Choice,
  Decision,
  SceneDetail,
  SceneSummary,
} from '../src/types';
import { CANDIDATE_KINDS } from '../src/types';

export interface StubScene {
  scene_id: string;
  class_id: number;
  decision: Decision;
  decision_source: 'human' | 'heuristic' | null;
  revision: number;
  counts: Record<CandidateKind, number>;
}

export function makeScene(id: string, decision: Decision = 'undecided'): StubScene {
  return {
    scene_id: id,
    class_id: 1,
    decision,
    decision_source: decision === 'undecided' ? null : 'heuristic',
    revision: 1,
    counts: { hsv: 1, rgb: 2, saliency: 0 },
  };
}

function summary(scene: StubScene): SceneSummary {
  return {
    scene_id: scene.scene_id,
    class_id: scene.class_id,
    background_variant: 'dark',
    decision: scene.decision,
    decision_source: scene.decision_source,
    revision: scene.revision,
    error: null,
    instance_counts: { ...scene.counts },
  };
}

function detail(scene: StubScene): SceneDetail {
  const candidates = {} as SceneDetail['candidates'];
  for (const kind of CANDIDATE_KINDS) {
    candidates[kind] = {
      overlay_url: `/files/scenes/${scene.scene_id}/overlays/${kind}.png`,
      instance_count: scene.counts[kind],
      areas: Array(scene.counts[kind]).fill(100),
      total_area: scene.counts[kind] * 100,
      degenerate: scene.counts[kind] === 0,
    };
  }
  return {
    ...summary(scene),
    image_url: `/files/scenes/${scene.scene_id}/image.png`,
    candidates,
  };
}

export class StubService {
  readonly scenes: StubScene[];
  readonly posts: Array<{ scene_id: string; body: Record<string, unknown> }> = [];
  failNext: number | null = null; // force the next decision POST to this status
  offline = false;

  constructor(scenes: StubScene[]) {
    this.scenes = scenes;
  }

  get fetch(): FetchLike {
    return async (input, init) => {
      if (this.offline) throw new TypeError('fetch failed');
      return this.route(input, init);
    };
  }

  private json(body: unknown, status = 200): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { 'Content-Type': 'application/json' },
    });
  }

  private route(input: string, init?: RequestInit): Response {
    const url = new URL(input, 'http://stub');
    const path = url.pathname;

    if (path === '/api/progress') {
      const decided = this.scenes.filter((s) =>
        CANDIDATE_KINDS.includes(s.decision as CandidateKind),
      ).length;
      const rejected = this.scenes.filter((s) => s.decision === 'reject').length;
      return this.json({
        total: this.scenes.length,
        undecided: this.scenes.length - decided - rejected,
        decided,
        rejected,
        by_choice: { hsv: 0, rgb: 0, saliency: 0 },
      });
    }

    if (path === '/api/scenes') {
      const filter = url.searchParams.get('filter') ?? 'all';
      let scenes = this.scenes.map(summary);
      if (filter === 'undecided') scenes = scenes.filter((s) => s.decision === 'undecided');
      if (filter === 'rejected') scenes = scenes.filter((s) => s.decision === 'reject');
      if (filter === 'decided') {
        scenes = scenes.filter((s) => CANDIDATE_KINDS.includes(s.decision as CandidateKind));
      }
      return this.json({ scenes, page: 1, page_size: 500, total: scenes.length, filter });
    }

    const decisionMatch = path.match(/^\/api\/scenes\/([^/]+)\/decision$/);
    if (decisionMatch && init?.method === 'POST') {
      const scene = this.scenes.find((s) => s.scene_id === decisionMatch[1]);
      if (!scene) return this.json({ detail: 'unknown scene' }, 404);
      const body = JSON.parse(String(init.body)) as Record<string, unknown>;
      this.posts.push({ scene_id: scene.scene_id, body });
      if (this.failNext !== null) {
        const status = this.failNext;
        this.failNext = null;
        return this.json({ detail: `forced ${status}` }, status);
      }
      const choice = body.choice as Choice;
      if (!['hsv', 'rgb', 'saliency', 'reject'].includes(choice)) {
        return this.json({ detail: 'choice must be one of hsv, rgb, saliency, reject' }, 400);
      }
      const expect = body.expect_revision;
      if (expect !== undefined && expect !== scene.revision) {
        return this.json(
          { detail: `scene ${scene.scene_id} is at revision ${scene.revision}` },
          409,
        );
      }
      scene.decision = choice;
      scene.decision_source = 'human';
      scene.revision += 1;
      return this.json(detail(scene));
    }

    const sceneMatch = path.match(/^\/api\/scenes\/([^/]+)$/);
    if (sceneMatch) {
      const scene = this.scenes.find((s) => s.scene_id === sceneMatch[1]);
      if (!scene) return this.json({ detail: 'unknown scene' }, 404);
      return this.json(detail(scene));
    }

    return this.json({ detail: `no route ${path}` }, 404);
  }
}
