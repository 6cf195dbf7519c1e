// Review session state machine.
//
// The server is the source of truth: a decision only changes state after a
// 2xx acknowledgment, errors stay inline and never advance the cursor, and a
// connection failure keeps the pending selection so nothing is silently lost.

import { ApiClient, HttpError } from './api';
import type { Choice, Filter, Progress, SceneDetail, SceneSummary } from './types';
import { CANDIDATE_KINDS } from './types';

export interface SessionState {
  scenes: SceneSummary[];
  cursor: number;
  current: SceneDetail | null;
  selected: Choice;
  filter: Filter;
  progress: Progress | null;
  error: string | null;
  connectionLost: boolean;
  busy: boolean;
  allDecided: boolean;
}

export type Listener = (state: SessionState) => void;

function initialState(): SessionState {
  return {
    scenes: [],
    cursor: 0,
    current: null,
    selected: 'hsv',
    filter: 'all',
    progress: null,
    error: null,
    connectionLost: false,
    busy: false,
    allDecided: false,
  };
}

export class ReviewSession {
  readonly state: SessionState = initialState();
  private listeners: Listener[] = [];

  constructor(private readonly api: ApiClient) {}

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  private async guard<T>(work: () => Promise<T>): Promise<T | undefined> {
    this.state.busy = true;
    this.emit();
    try {
      const result = await work();
      this.state.connectionLost = false;
      return result;
    } catch (err) {
      if (err instanceof HttpError) {
        this.state.error = err.message;
      } else {
        // fetch rejection: service unreachable; keep all pending state
        this.state.connectionLost = true;
      }
      return undefined;
    } finally {
      this.state.busy = false;
      this.emit();
    }
  }

  async init(filter: Filter = 'all'): Promise<void> {
    await this.guard(async () => {
      const [list, progress] = await Promise.all([
        this.api.listScenes(filter),
        this.api.progress(),
      ]);
      this.state.filter = filter;
      this.state.scenes = list.scenes;
      this.state.progress = progress;
      this.state.error = null;
      const firstUndecided = list.scenes.findIndex((s) => s.decision === 'undecided');
      this.state.allDecided = firstUndecided < 0;
      await this.loadCursor(firstUndecided >= 0 ? firstUndecided : 0);
    });
  }

  async retry(): Promise<void> {
    await this.init(this.state.filter);
  }

  async setFilter(filter: Filter): Promise<void> {
    // decisions are saved on confirm, so switching filters cannot lose work
    await this.init(filter);
  }

  private async loadCursor(index: number): Promise<void> {
    if (!this.state.scenes.length) {
      this.state.cursor = 0;
      this.state.current = null;
      return;
    }
    const bounded = ((index % this.state.scenes.length) + this.state.scenes.length) %
      this.state.scenes.length;
    this.state.cursor = bounded;
    const summary = this.state.scenes[bounded]!;
    this.state.current = await this.api.getScene(summary.scene_id);
    this.state.selected =
      this.state.current.decision === 'undecided' ? 'hsv' : this.state.current.decision;
  }

  async goTo(index: number): Promise<void> {
    await this.guard(async () => {
      this.state.error = null;
      await this.loadCursor(index);
    });
  }

  async next(): Promise<void> {
    await this.goTo(this.state.cursor + 1);
  }

  async prev(): Promise<void> {
    await this.goTo(this.state.cursor - 1);
  }

  select(choice: Choice): void {
    if (!this.state.current) return;
    this.state.selected = choice;
    this.state.error = null;
    this.emit();
  }

  cycle(): void {
    if (!this.state.current) return;
    const index = CANDIDATE_KINDS.indexOf(this.state.selected as never);
    const nextKind = CANDIDATE_KINDS[(index + 1) % CANDIDATE_KINDS.length]!;
    this.select(nextKind);
  }

  /** POST the pending selection; advances to the next undecided scene on 2xx. */
  async confirm(): Promise<boolean> {
    const current = this.state.current;
    if (!current || this.state.busy) return false;
    const result = await this.guard(async () => {
      const updated = await this.api.postDecision(
        current.scene_id,
        this.state.selected,
        current.revision,
      );
      this.state.current = updated;
      const entry = this.state.scenes[this.state.cursor];
      if (entry && entry.scene_id === updated.scene_id) {
        entry.decision = updated.decision;
        entry.decision_source = updated.decision_source;
        entry.revision = updated.revision;
      }
      this.state.progress = await this.api.progress();
      this.state.error = null;
      await this.advanceToUndecided();
      return true;
    });
    if (result === undefined && this.state.error?.startsWith('scene')) {
      // stale revision (409): re-read so the operator retries against fresh state
      try {
        this.state.current = await this.api.getScene(current.scene_id);
        this.emit();
      } catch {
        this.state.connectionLost = true;
        this.emit();
      }
    }
    return result === true;
  }

  private async advanceToUndecided(): Promise<void> {
    const { scenes, cursor } = this.state;
    for (let step = 1; step <= scenes.length; step += 1) {
      const index = (cursor + step) % scenes.length;
      if (scenes[index]!.decision === 'undecided') {
        await this.loadCursor(index);
        return;
      }
    }
    this.state.allDecided = true;
  }
}
