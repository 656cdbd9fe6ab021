/**
 * Session polling. The service has no push channel — question cadence is
 * human-speed — so a tab refreshes its snapshot about once a second and
 * stops at a terminal state. Calls are strictly sequential: the next
 * request starts only after the previous one settles.
 *
 * @module
 */

import type { ServiceClient, SessionView } from './api.js';

export interface PollOptions {
  intervalMs?: number;
  signal?: AbortSignal;
}

export function sleep(ms: number, signal?: AbortSignal): Promise<void> {
  return new Promise((resolve, reject) => {
    if (signal?.aborted) {
      reject(new DOMException('aborted', 'AbortError'));
      return;
    }
    const timer = setTimeout(() => {
      signal?.removeEventListener('abort', onAbort);
      resolve();
    }, ms);
    const onAbort = () => {
      clearTimeout(timer);
      reject(new DOMException('aborted', 'AbortError'));
    };
    signal?.addEventListener('abort', onAbort, { once: true });
  });
}

/**
 * Poll a session until it finishes or fails, invoking `onView` on every
 * snapshot (including the terminal one). Returns the terminal view.
 */
export async function pollSession(
  client: ServiceClient,
  id: string,
  onView: (view: SessionView) => void,
  { intervalMs = 1000, signal }: PollOptions = {},
): Promise<SessionView> {
  for (;;) {
    if (signal?.aborted) throw new DOMException('aborted', 'AbortError');
    const view = await client.getSession(id);
    onView(view);
    if (view.status === 'finished' || view.status === 'failed') return view;
    await sleep(intervalMs, signal);
  }
}
