// Keystroke contract: 1/2/3 pick a candidate, space cycles, r marks reject,
// enter confirms (and the session advances on success), arrows navigate.

import type { ReviewSession } from './session';

export function handleKey(session: ReviewSession, key: string): boolean {
  switch (key) {
    case '1':
      session.select('hsv');
      return true;
    case '2':
      session.select('rgb');
      return true;
    case '3':
      session.select('saliency');
      return true;
    case 'r':
    case 'R':
      session.select('reject');
      return true;
    case ' ':
      session.cycle();
      return true;
    case 'Enter':
      void session.confirm();
      return true;
    case 'ArrowRight':
    case 'n':
      void session.next();
      return true;
    case 'ArrowLeft':
    case 'p':
      void session.prev();
      return true;
    default:
      return false;
  }
}

export function bindKeyboard(session: ReviewSession, target: Window): () => void {
  const onKeyDown = (event: KeyboardEvent) => {
    if (event.target instanceof HTMLInputElement || event.target instanceof HTMLTextAreaElement) {
      return;
    }
    if (handleKey(session, event.key)) event.preventDefault();
  };
  target.addEventListener('keydown', onKeyDown);
  return () => target.removeEventListener('keydown', onKeyDown);
}
