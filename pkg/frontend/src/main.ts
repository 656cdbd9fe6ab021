/**
 * Dashboard wiring: create a session from an uploaded CSV, list the
 * sessions on the service, open one, and steer it by answering the
 * questions it raises. All service calls for the open session run
 * sequentially; the view is repainted from every snapshot.
 *
 * @module
 */

import { ServiceClient, ServiceError } from './api.js';
import type { Arc, CreateRequest, SessionView, TraceEntry, VerdictValue } from './api.js';
import { pollSession } from './poll.js';
import {
  renderBanner,
  renderGauge,
  renderGraph,
  renderHistory,
  renderQuestion,
  renderResult,
  renderStatus,
} from './render.js';
import { constraintsFromTrace, mergeTrace } from './state.js';

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

/** One open session: accumulated trace, in-flight guard, polling loop. */
class SessionTab {
  private readonly seen = new Map<number, TraceEntry>();
  // answers this tab posted, as minimal trace entries: the snapshot's
  // recent window is bounded, so an early answer could scroll out of it
  // before we poll — but the tab itself always knows what it said
  private readonly posted = new Map<number, TraceEntry>();
  private readonly stop = new AbortController();
  private busy = false;
  private latest: SessionView | null = null;

  constructor(
    private readonly client: ServiceClient,
    private readonly id: string,
    private readonly truthArcs: Arc[] | null,
  ) {}

  abort(): void {
    this.stop.abort();
  }

  async open(first: SessionView): Promise<void> {
    el('session-panel').hidden = false;
    el('session-title').textContent = `session ${this.id}`;
    this.render(first);
    if (first.status === 'finished' || first.status === 'failed') return;
    try {
      await pollSession(this.client, this.id, (view) => this.render(view), {
        signal: this.stop.signal,
      });
    } catch (err) {
      if (!(err instanceof DOMException && err.name === 'AbortError')) {
        renderBanner(el('banner'), `lost the session: ${err instanceof Error ? err.message : err}`);
      }
    }
  }

  async cancel(): Promise<void> {
    try {
      const view = await this.client.cancel(this.id);
      this.render(view);
    } catch (err) {
      renderBanner(el('banner'), err instanceof Error ? err.message : String(err));
    }
  }

  private render(view: SessionView): void {
    this.latest = view;
    mergeTrace(this.seen, view.recent);
    const constraints = constraintsFromTrace([...this.seen.values(), ...this.posted.values()]);
    renderStatus(el('status'), view);
    renderGauge(el('gauge-host'), view);
    renderGraph(el('graph-host'), view, {
      requiredArcs: constraints.reqd,
      truthArcs: this.truthArcs ?? undefined,
    });
    renderQuestion(
      el('question-host'),
      view,
      (qid, verdict) => void this.answer(qid, verdict),
      this.busy,
    );
    const history = [...this.seen.values()].sort((a, b) => a.iteration - b.iteration);
    renderHistory(el('history-host'), history);
    renderResult(el('result-host'), view);
  }

  /** Post a verdict; duplicate clicks are held off while one is in
   * flight, and a stale question turns into a banner plus a refresh. */
  private async answer(questionId: number, verdict: VerdictValue): Promise<void> {
    if (this.busy) return;
    this.busy = true;
    renderBanner(el('banner'), null);
    const question = this.latest?.pending;
    if (this.latest) this.render(this.latest); // repaint with buttons disabled
    try {
      const view = await this.client.answer(this.id, questionId, verdict);
      if (question && question.question_id === questionId) {
        this.posted.set(questionId, {
          iteration: -questionId,
          kind: question.kind,
          from: question.from,
          to: question.to,
          delta: 0,
          requested: true,
          verdict,
          blocked: false,
          score: 0,
        });
      }
      this.busy = false;
      this.render(view);
    } catch (err) {
      this.busy = false;
      if (err instanceof ServiceError && err.code === 'stale_question') {
        renderBanner(el('banner'), 'that question is no longer pending — refreshed');
        const view = await this.client.getSession(this.id);
        this.render(view);
      } else {
        renderBanner(el('banner'), err instanceof Error ? err.message : String(err));
      }
    }
  }
}

function startApp(): void {
  let client = new ServiceClient(readBase());
  let tab: SessionTab | null = null;

  function readBase(): string {
    return (el<HTMLInputElement>('api-base').value || 'http://127.0.0.1:8000').replace(/\/+$/, '');
  }

  function openTab(view: SessionView, truthArcs: Arc[] | null): void {
    tab?.abort();
    tab = new SessionTab(client, view.id, truthArcs);
    void tab.open(view);
  }

  async function refreshList(): Promise<void> {
    const host = el<HTMLUListElement>('session-list');
    try {
      const sessions = await client.listSessions();
      host.textContent = '';
      for (const s of sessions) {
        const item = document.createElement('li');
        const link = document.createElement('button');
        link.textContent = `${s.id} · ${s.status} · ${s.variables} variables`;
        link.addEventListener('click', async () => {
          try {
            openTab(await client.getSession(s.id), null);
          } catch (err) {
            renderBanner(el('banner'), err instanceof Error ? err.message : String(err));
          }
        });
        item.appendChild(link);
        host.appendChild(item);
      }
    } catch (err) {
      host.textContent = `could not list sessions: ${err instanceof Error ? err.message : err}`;
    }
  }

  async function create(): Promise<void> {
    const errorHost = el('create-error');
    errorHost.textContent = '';
    client = new ServiceClient(readBase());
    const file = el<HTMLInputElement>('csv-file').files?.[0];
    if (!file) {
      errorHost.textContent = 'choose a CSV file first';
      return;
    }
    const body: CreateRequest = { csv_text: await file.text(), config: {} };
    const config = body.config!;
    config.criterion = el<HTMLSelectElement>('criterion').value as never;
    config.threshold = Number(el<HTMLInputElement>('threshold').value) || 0;
    const limitRaw = el<HTMLInputElement>('limit').value.trim();
    if (limitRaw !== '') config.limit = Number(limitRaw);
    config.orientation_only = el<HTMLInputElement>('orientation-only').checked;

    let truthArcs: Arc[] | null = null;
    const truthRaw = el<HTMLTextAreaElement>('truth-json').value.trim();
    if (truthRaw !== '') {
      try {
        const doc = JSON.parse(truthRaw);
        body.truth = doc;
        truthArcs = (doc.arcs ?? []) as Arc[];
      } catch {
        errorHost.textContent = 'truth network is not valid JSON';
        return;
      }
    }
    try {
      const view = await client.createSession(body);
      openTab(view, truthArcs);
      void refreshList();
    } catch (err) {
      // surface the server's rejection verbatim
      errorHost.textContent = err instanceof Error ? err.message : String(err);
    }
  }

  el('create-btn').addEventListener('click', () => void create());
  el('refresh-btn').addEventListener('click', () => void refreshList());
  el('cancel-btn').addEventListener('click', () => void tab?.cancel());
  void refreshList();
}

if (typeof document !== 'undefined' && typeof addEventListener === 'function') {
  addEventListener('load', startApp);
}
