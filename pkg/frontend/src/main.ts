import { ApiClient } from './api';
import { bindKeyboard } from './keyboard';
import { ReviewSession } from './session';
import { render } from './view';
import './style.css';

const root = document.querySelector<HTMLElement>('#app');
if (!root) throw new Error('missing #app mount point');

const session = new ReviewSession(new ApiClient());
session.subscribe((state) => render(root, state, session));
bindKeyboard(session, window);
void session.init();
