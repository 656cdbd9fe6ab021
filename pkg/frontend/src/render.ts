/**
 * DOM rendering for a session: node-link diagram of the evolving DAG,
 * the pending-question card, the request-budget gauge, and the history
 * and result panes. Pure DOM — every function repaints its host from
 * the given snapshot.
 *
 * @module
 */

import type { Arc, SessionView, TraceEntry, VerdictValue } from './api.js';
import { layeredLayout } from './layout.js';
import {
  arcSet,
  budgetGauge,
  hasArc,
  questionText,
  statusLine,
  verdictChoices,
} from './state.js';

const SVG_NS = 'http://www.w3.org/2000/svg';
const CELL_W = 130;
const CELL_H = 95;
const MARGIN = 50;
const NODE_R = 18;

export interface GraphOptions {
  /** Arcs pinned by answered questions; drawn with the required accent. */
  requiredArcs?: Arc[];
  /** The data-generating arcs, when the user loaded them at create time;
   * a finished graph is then coloured true-positive / false-positive. */
  truthArcs?: Arc[];
  /** Above this many variables the diagram degrades to a plain list. */
  listFallbackAt?: number;
}

function svgEl<K extends keyof SVGElementTagNameMap>(tag: K): SVGElementTagNameMap[K] {
  return document.createElementNS(SVG_NS, tag);
}

function clear(host: HTMLElement): void {
  while (host.firstChild) host.removeChild(host.firstChild);
}

/**
 * Repaint the node-link diagram. Nodes are labeled by variable name; the
 * pending change is dashed with both endpoints emphasised; required arcs
 * get a heavier accent; large graphs fall back to an arc list.
 */
export function renderGraph(host: HTMLElement, view: SessionView, options: GraphOptions = {}): void {
  clear(host);
  const names = view.variables;
  const fallbackAt = options.listFallbackAt ?? 40;
  if (names.length > fallbackAt) {
    renderArcList(host, view);
    return;
  }

  const index = new Map(names.map((name, i) => [name, i]));
  const committed = view.arcs.map((arc) => [index.get(arc.from)!, index.get(arc.to)!] as const);
  const layout = layeredLayout(names.length, committed);
  const centre = (v: number) => ({
    x: MARGIN + layout.positions[v].x * CELL_W + CELL_W / 2,
    y: MARGIN + layout.positions[v].y * CELL_H,
  });

  const svg = svgEl('svg');
  const width = Math.max(1, layout.cols) * CELL_W + 2 * MARGIN;
  const height = Math.max(1, layout.rows) * CELL_H + 2 * MARGIN;
  svg.setAttribute('viewBox', `0 0 ${width} ${height}`);
  svg.setAttribute('class', 'dag');

  const defs = svgEl('defs');
  const marker = svgEl('marker');
  marker.setAttribute('id', 'arrow');
  marker.setAttribute('viewBox', '0 0 10 10');
  marker.setAttribute('refX', '9');
  marker.setAttribute('refY', '5');
  marker.setAttribute('markerWidth', '7');
  marker.setAttribute('markerHeight', '7');
  marker.setAttribute('orient', 'auto-start-reverse');
  const tip = svgEl('path');
  tip.setAttribute('d', 'M 0 0 L 10 5 L 0 10 z');
  marker.appendChild(tip);
  defs.appendChild(marker);
  svg.appendChild(defs);

  const required = arcSet(options.requiredArcs ?? []);
  const truth = options.truthArcs ? arcSet(options.truthArcs) : null;
  const pending = view.pending;
  const isPending = (arc: Arc) => pending !== null && pending.from === arc.from && pending.to === arc.to;

  const drawArc = (arc: Arc, classes: string[]) => {
    const a = centre(index.get(arc.from)!);
    const b = centre(index.get(arc.to)!);
    const dx = b.x - a.x;
    const dy = b.y - a.y;
    const len = Math.hypot(dx, dy) || 1;
    const trim = (p: { x: number; y: number }, sign: number, pad: number) => ({
      x: p.x + (sign * pad * dx) / len,
      y: p.y + (sign * pad * dy) / len,
    });
    const start = trim(a, 1, NODE_R);
    const end = trim(b, -1, NODE_R + 4);
    const line = svgEl('line');
    line.setAttribute('x1', String(start.x));
    line.setAttribute('y1', String(start.y));
    line.setAttribute('x2', String(end.x));
    line.setAttribute('y2', String(end.y));
    line.setAttribute('class', classes.join(' '));
    line.setAttribute('marker-end', 'url(#arrow)');
    if (classes.includes('pending')) line.setAttribute('stroke-dasharray', '7 5');
    line.setAttribute('data-from', arc.from);
    line.setAttribute('data-to', arc.to);
    svg.appendChild(line);
  };

  for (const arc of view.arcs) {
    const classes = ['arc'];
    if (isPending(arc)) classes.push('pending');
    if (hasArc(required, arc)) classes.push('required');
    if (truth && view.status === 'finished') {
      classes.push(hasArc(truth, arc) ? 'true-positive' : 'false-positive');
    }
    drawArc(arc, classes);
  }
  if (pending && !view.arcs.some(isPending)) {
    // a proposed addition is not in the committed set yet: overlay it
    drawArc({ from: pending.from, to: pending.to }, ['arc', 'pending', 'proposed']);
  }

  const emphasised = new Set(pending ? [pending.from, pending.to] : []);
  names.forEach((name, v) => {
    const { x, y } = centre(v);
    const circle = svgEl('circle');
    circle.setAttribute('cx', String(x));
    circle.setAttribute('cy', String(y));
    const hot = emphasised.has(name);
    circle.setAttribute('r', String(hot ? NODE_R + 4 : NODE_R));
    circle.setAttribute('class', hot ? 'node pending-endpoint' : 'node');
    circle.setAttribute('data-name', name);
    svg.appendChild(circle);
    const label = svgEl('text');
    label.setAttribute('x', String(x));
    label.setAttribute('y', String(y + NODE_R + 14));
    label.setAttribute('text-anchor', 'middle');
    label.setAttribute('class', 'node-label');
    label.textContent = name;
    svg.appendChild(label);
  });

  host.appendChild(svg);
}

function renderArcList(host: HTMLElement, view: SessionView): void {
  const note = document.createElement('p');
  note.className = 'fallback-note';
  note.textContent = `${view.variables.length} variables — showing arcs as a list`;
  host.appendChild(note);
  const list = document.createElement('ul');
  list.className = 'arc-list';
  for (const arc of view.arcs) {
    const item = document.createElement('li');
    item.textContent = `${arc.from} → ${arc.to}`;
    list.appendChild(item);
  }
  host.appendChild(list);
}

/**
 * Repaint the question card. Buttons carry `data-verdict`; the "no
 * direct edge" choice disappears in orientation-only sessions. `busy`
 * disables the buttons while an answer is in flight so double clicks
 * can't race.
 */
export function renderQuestion(
  host: HTMLElement,
  view: SessionView,
  onChoice: (questionId: number, verdict: VerdictValue) => void,
  busy = false,
): void {
  clear(host);
  const q = view.pending;
  if (!q) return;
  const card = document.createElement('div');
  card.className = 'question';
  const prompt = document.createElement('p');
  prompt.className = 'question-text';
  prompt.textContent = questionText(q);
  card.appendChild(prompt);
  const row = document.createElement('div');
  row.className = 'choices';
  for (const choice of verdictChoices(q, view.orientation_only)) {
    const button = document.createElement('button');
    button.textContent = choice.label;
    button.dataset.verdict = choice.verdict;
    button.dataset.state = choice.state;
    button.disabled = busy;
    button.addEventListener('click', () => onChoice(q.question_id, choice.verdict));
    row.appendChild(button);
  }
  card.appendChild(row);
  host.appendChild(card);
}

/** Repaint the request-budget gauge as a labelled bar. */
export function renderGauge(host: HTMLElement, view: SessionView): void {
  clear(host);
  const gauge = budgetGauge(view);
  const bar = document.createElement('div');
  bar.className = gauge.exhausted ? 'gauge exhausted' : 'gauge';
  const fill = document.createElement('div');
  fill.className = 'gauge-fill';
  fill.style.width = `${Math.round(gauge.fraction * 100)}%`;
  bar.appendChild(fill);
  const label = document.createElement('span');
  label.className = 'gauge-label';
  label.textContent = gauge.label;
  bar.appendChild(label);
  host.appendChild(bar);
}

/** Repaint the recent-steps pane, newest last. */
export function renderHistory(host: HTMLElement, entries: TraceEntry[]): void {
  clear(host);
  const list = document.createElement('ol');
  list.className = 'history';
  for (const e of entries) {
    const item = document.createElement('li');
    const asked = e.requested ? ` · asked → ${e.verdict ?? 'declined'}` : '';
    const blocked = e.blocked ? ' · blocked' : '';
    item.textContent =
      `${e.iteration}: ${e.kind} ${e.from} → ${e.to} ` +
      `(Δ ${e.delta.toFixed(3)})${asked}${blocked}`;
    if (e.blocked) item.className = 'blocked';
    list.appendChild(item);
  }
  host.appendChild(list);
}

/** Repaint the one-line status header. */
export function renderStatus(host: HTMLElement, view: SessionView): void {
  host.textContent = statusLine(view);
  host.className = `status ${view.status}`;
}

/**
 * Repaint the result pane of a finished session: the learned arcs and
 * the accumulated constraints as JSON ready for reuse as predefined
 * knowledge in a later run.
 */
export function renderResult(host: HTMLElement, view: SessionView): void {
  clear(host);
  const result = view.result;
  if (!result) return;
  const heading = document.createElement('h3');
  heading.textContent = `learned graph — ${result.arcs.length} arcs, ${result.requests_used} requests`;
  host.appendChild(heading);
  const list = document.createElement('ul');
  list.className = 'result-arcs';
  for (const arc of result.arcs) {
    const item = document.createElement('li');
    item.textContent = `${arc.from} → ${arc.to}`;
    list.appendChild(item);
  }
  host.appendChild(list);
  const note = document.createElement('p');
  note.textContent = 'constraints gathered from your answers (reusable as predefined knowledge):';
  host.appendChild(note);
  const dump = document.createElement('pre');
  dump.className = 'constraints-json';
  dump.textContent = JSON.stringify(result.constraints, null, 1);
  host.appendChild(dump);
}

/** Show or hide the refresh banner (stale question, lost server, …). */
export function renderBanner(host: HTMLElement, message: string | null): void {
  host.textContent = message ?? '';
  host.hidden = message === null;
}
