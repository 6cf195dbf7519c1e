// Typed client for the review service endpoints.

import type { Choice, Filter, Progress, SceneDetail, SceneList } from './types';

export class HttpError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = 'HttpError';
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const body = (await response.json()) as { detail?: unknown };
        if (body && body.detail !== undefined) detail = String(body.detail);
      } catch {
        detail = response.statusText || detail;
      }
      throw new HttpError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  listScenes(filter: Filter = 'all', page = 1, pageSize = 500): Promise<SceneList> {
    const query = new URLSearchParams({
      filter,
      page: String(page),
      page_size: String(pageSize),
    });
    return this.request(`/api/scenes?${query}`);
  }

  getScene(sceneId: string): Promise<SceneDetail> {
    return this.request(`/api/scenes/${encodeURIComponent(sceneId)}`);
  }

  postDecision(sceneId: string, choice: Choice, expectRevision?: number): Promise<SceneDetail> {
    const body: Record<string, unknown> = { choice };
    if (expectRevision !== undefined) body.expect_revision = expectRevision;
    return this.request(`/api/scenes/${encodeURIComponent(sceneId)}/decision`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
  }

  progress(): Promise<Progress> {
    return this.request('/api/progress');
  }
}
