// DOM rendering. The view is a pure function of the session state; every
// interaction routes back through the session so the keyboard and mouse
// paths behave identically.

import type { ReviewSession, SessionState } from './session';
import type { CandidateKind, Choice, Filter } from './types';
import { CANDIDATE_KINDS } from './types';

const FILTERS: Filter[] = ['all', 'undecided', 'decided', 'rejected'];
const KEY_OF: Record<CandidateKind, string> = { hsv: '1', rgb: '2', saliency: '3' };

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  children: (Node | string)[] = [],
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [name, value] of Object.entries(attrs)) {
    if (name === 'class') node.className = value;
    else node.setAttribute(name, value);
  }
  node.append(...children);
  return node;
}

function progressBar(state: SessionState): HTMLElement {
  const progress = state.progress;
  const done = progress ? progress.decided + progress.rejected : 0;
  const total = progress ? progress.total : 0;
  const percent = total ? Math.round((done / total) * 100) : 0;
  return el('div', { class: 'progress', 'data-testid': 'progress' }, [
    el('div', { class: 'progress-bar' }, [
      el('div', {
        class: 'progress-fill',
        style: `width: ${percent}%`,
      }),
    ]),
    el('span', { class: 'progress-text' }, [
      total ? `${done}/${total} reviewed (${percent}%)` : 'no scenes',
    ]),
  ]);
}

function filterBar(state: SessionState, session: ReviewSession): HTMLElement {
  const bar = el('div', { class: 'filters' });
  for (const filter of FILTERS) {
    const button = el(
      'button',
      {
        class: filter === state.filter ? 'filter active' : 'filter',
        'data-filter': filter,
      },
      [filter],
    );
    button.addEventListener('click', () => void session.setFilter(filter));
    bar.append(button);
  }
  return bar;
}

function sceneList(state: SessionState, session: ReviewSession): HTMLElement {
  const list = el('ul', { class: 'scene-list', 'data-testid': 'scene-list' });
  state.scenes.forEach((scene, index) => {
    const classes = ['scene'];
    if (index === state.cursor) classes.push('active');
    classes.push(`decision-${scene.decision}`);
    const item = el('li', { class: classes.join(' '), 'data-scene-id': scene.scene_id }, [
      el('span', { class: 'scene-id' }, [scene.scene_id]),
      el('span', { class: 'scene-state' }, [
        scene.decision === 'undecided' ? '·' : scene.decision,
      ]),
    ]);
    item.addEventListener('click', () => void session.goTo(index));
    list.append(item);
  });
  return list;
}

function candidatePanel(state: SessionState, session: ReviewSession): HTMLElement {
  const current = state.current;
  const panel = el('div', { class: 'candidates' });
  if (!current) return panel;
  for (const kind of CANDIDATE_KINDS) {
    const stats = current.candidates[kind];
    const classes = ['candidate'];
    if (state.selected === kind) classes.push('selected');
    if (stats.degenerate) classes.push('degenerate');
    const card = el('div', { class: classes.join(' '), 'data-kind': kind }, [
      el('img', {
        class: 'overlay-thumb',
        src: stats.overlay_url,
        alt: `${kind} overlay`,
        'data-testid': `overlay-${kind}`,
      }),
      el('div', { class: 'candidate-meta' }, [
        el('span', { class: 'candidate-key' }, [KEY_OF[kind]]),
        el('span', { class: 'candidate-name' }, [kind]),
        el('span', { class: 'candidate-count' }, [
          `${stats.instance_count} inst / ${stats.total_area} px`,
        ]),
      ]),
    ]);
    card.addEventListener('click', () => session.select(kind));
    panel.append(card);
  }
  const rejectClasses = ['candidate', 'reject'];
  if (state.selected === 'reject') rejectClasses.push('selected');
  const reject = el('div', { class: rejectClasses.join(' '), 'data-kind': 'reject' }, [
    el('div', { class: 'candidate-meta' }, [
      el('span', { class: 'candidate-key' }, ['r']),
      el('span', { class: 'candidate-name' }, ['reject scene']),
    ]),
  ]);
  reject.addEventListener('click', () => session.select('reject'));
  panel.append(reject);
  return panel;
}

function viewer(state: SessionState): HTMLElement {
  const current = state.current;
  if (!current) {
    return el('div', { class: 'viewer empty' }, ['no scene loaded']);
  }
  const stage = el('div', { class: 'stage' }, [
    el('img', {
      class: 'scene-image',
      src: current.image_url,
      alt: current.scene_id,
      'data-testid': 'scene-image',
    }),
  ]);
  if (state.selected !== 'reject') {
    stage.append(
      el('img', {
        class: 'scene-overlay',
        src: current.candidates[state.selected as CandidateKind].overlay_url,
        alt: `${state.selected} candidate`,
        'data-testid': 'main-overlay',
      }),
    );
  }
  const decision: Choice | 'undecided' = current.decision;
  const status = el('div', { class: 'scene-status' }, [
    el('strong', {}, [current.scene_id]),
    el('span', {}, [` class ${current.class_id} · ${current.background_variant}`]),
    el('span', { 'data-testid': 'decision-state' }, [
      decision === 'undecided'
        ? ' · undecided'
        : ` · ${decision} (${current.decision_source ?? '?'})`,
    ]),
  ]);
  return el('div', { class: 'viewer' }, [status, stage]);
}

function banners(state: SessionState, session: ReviewSession): HTMLElement[] {
  const out: HTMLElement[] = [];
  if (state.connectionLost) {
    const retry = el('button', { class: 'retry' }, ['retry']);
    retry.addEventListener('click', () => void session.retry());
    out.push(
      el('div', { class: 'banner connection', 'data-testid': 'connection-banner' }, [
        'service unreachable; your selection is kept ',
        retry,
      ]),
    );
  }
  if (state.error) {
    out.push(
      el('div', { class: 'banner error', 'data-testid': 'error-banner' }, [state.error]),
    );
  }
  if (state.allDecided && !state.error && !state.connectionLost) {
    out.push(el('div', { class: 'banner done' }, ['every scene is reviewed']));
  }
  return out;
}

export function render(root: HTMLElement, state: SessionState, session: ReviewSession): void {
  root.replaceChildren(
    el('header', { class: 'topbar' }, [
      el('h1', {}, ['scene review']),
      progressBar(state),
      filterBar(state, session),
    ]),
    ...banners(state, session),
    el('main', { class: 'layout' }, [
      el('aside', { class: 'sidebar' }, [sceneList(state, session)]),
      el('section', { class: 'content' }, [
        viewer(state),
        candidatePanel(state, session),
        el('footer', { class: 'hints' }, [
          '1/2/3 pick · space cycle · r reject · enter confirm · ←/→ navigate',
        ]),
      ]),
    ]),
  );
}
