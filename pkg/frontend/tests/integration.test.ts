// End-to-end against the real review service: builds the 5-scene fixture
// dataset, spawns `maskforge serve`, drives the session through the keystroke
// contract and verifies the manifest on disk reflects every decision.

import { spawn, execFileSync, type ChildProcess } from 'node:child_process';
import { mkdtempSync, readFileSync, rmSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ApiClient } from '../src/api';
import { handleKey } from '../src/keyboard';
import { ReviewSession } from '../src/session';

const PYTHON = process.env.PYTHON ?? 'python3';
const PORT = 18650 + Math.floor(Math.random() * 1000);
const BASE = `http://127.0.0.1:${PORT}`;

let datasetDir: string;
let server: ChildProcess;

function manifestOnDisk(): {
  scenes: Array<{
    record: { scene_id: string };
    decision: string;
    decision_source: string | null;
  }>;
} {
  return JSON.parse(readFileSync(join(datasetDir, 'manifest.json'), 'utf-8'));
}

async function waitForServer(timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  /* eslint-disable no-await-in-loop */
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`${BASE}/api/progress`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 200));
  }
  throw new Error('review service did not come up');
}

beforeAll(async () => {
  datasetDir = mkdtempSync(join(tmpdir(), 'review-fixture-'));
  const fixtureScript = fileURLToPath(new URL('../scripts/make_fixture.py', import.meta.url));
  execFileSync(PYTHON, [fixtureScript, datasetDir], { stdio: 'pipe' });
  server = spawn(
    PYTHON,
    ['-m', 'maskforge.cli', 'serve', '--manifest', join(datasetDir, 'manifest.json'),
     '--port', String(PORT)],
    { stdio: 'pipe' },
  );
  await waitForServer();
}, 60000);

afterAll(() => {
  server?.kill();
  if (datasetDir) rmSync(datasetDir, { recursive: true, force: true });
});

describe('review flow against the live service', () => {
  it('reviews all five scenes through the keystroke contract', async () => {
    const session = new ReviewSession(new ApiClient(BASE));
    await session.init();

    expect(session.state.scenes).toHaveLength(5);
    expect(session.state.current).not.toBeNull();

    // three overlay URLs resolve to real PNGs on the service
    const candidates = session.state.current!.candidates;
    for (const kind of ['hsv', 'rgb', 'saliency'] as const) {
      const resp = await fetch(BASE + candidates[kind].overlay_url);
      expect(resp.status, `overlay ${kind}`).toBe(200);
      expect(resp.headers.get('content-type')).toContain('image/png');
    }

    const script: Array<{ keys: string[]; choice: string }> = [
      { keys: ['1', 'Enter'], choice: 'hsv' },
      { keys: ['2', 'Enter'], choice: 'rgb' },
      { keys: ['3', 'Enter'], choice: 'saliency' },
      { keys: ['r', 'Enter'], choice: 'reject' },
      { keys: [' ', 'Enter'], choice: 'rgb' }, // space cycles hsv -> rgb
    ];
    const decided: Record<string, string> = {};
    for (const step of script) {
      const sceneId = session.state.current!.scene_id;
      for (const key of step.keys.slice(0, -1)) handleKey(session, key);
      expect(session.state.selected).toBe(step.choice);
      const ok = await session.confirm(); // Enter
      expect(ok).toBe(true);
      decided[sceneId] = step.choice;
    }

    expect(Object.keys(decided)).toHaveLength(5);
    expect(session.state.allDecided).toBe(true);
    expect(session.state.progress).toMatchObject({ total: 5, undecided: 0 });

    const manifest = manifestOnDisk();
    for (const scene of manifest.scenes) {
      expect(scene.decision).toBe(decided[scene.record.scene_id]);
      expect(scene.decision_source).toBe('human');
    }
  }, 30000);

  it('an invalid choice surfaces an inline error and does not advance', async () => {
    const session = new ReviewSession(new ApiClient(BASE));
    await session.init('all');
    const sceneBefore = session.state.current!.scene_id;
    const decisionBefore = manifestOnDisk().scenes.find(
      (s) => s.record.scene_id === sceneBefore,
    )!.decision;

    // bypass the keyboard map to hit the service with a bogus choice
    (session.state as { selected: string }).selected = 'bogus';
    const ok = await session.confirm();

    expect(ok).toBe(false);
    expect(session.state.error).toContain('choice');
    expect(session.state.current!.scene_id).toBe(sceneBefore);
    const after = manifestOnDisk().scenes.find((s) => s.record.scene_id === sceneBefore)!;
    expect(after.decision).toBe(decisionBefore);
  }, 30000);

  it('stale revisions get a 409 and a re-read, then succeed', async () => {
    const session = new ReviewSession(new ApiClient(BASE));
    await session.init('all');
    const sceneId = session.state.current!.scene_id;

    // another writer changes the scene behind this session's back
    const other = new ApiClient(BASE);
    await other.postDecision(sceneId, 'hsv');

    session.select('saliency');
    const first = await session.confirm();
    expect(first).toBe(false);
    expect(session.state.error).toContain('revision');
    expect(session.state.current!.scene_id).toBe(sceneId);

    session.select('saliency');
    const second = await session.confirm();
    expect(second).toBe(true);
    const entry = manifestOnDisk().scenes.find((s) => s.record.scene_id === sceneId)!;
    expect(entry.decision).toBe('saliency');
  }, 30000);
});
