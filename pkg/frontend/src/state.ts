/**
 * Pure view-model helpers. Everything here is a function of service
 * snapshots plus unsent user input, so a reload mid-session rebuilds the
 * same picture from a fresh GET.
 *
 * @module
 */

import type { Arc, ChangeKind, PendingQuestion, SessionView, TraceEntry, VerdictValue } from './api.js';

/** How a variable pair can sit in the answerer's best knowledge:
 * oriented as written in the question, flipped, or not linked at all. */
export type PairState = 'forward' | 'backward' | 'absent';

/**
 * Verdict for each change kind and pair state. A verdict speaks about
 * the proposed change, not about the pair: `confirm` endorses the
 * change, `opposite` says the pair belongs with the other orientation,
 * and `absent` carries the remaining case — so on a deletion it means
 * the arc stands as named.
 */
export const VERDICT_FOR: Record<ChangeKind, Record<PairState, VerdictValue>> = {
  add: { forward: 'confirm', backward: 'opposite', absent: 'absent' },
  delete: { absent: 'confirm', backward: 'opposite', forward: 'absent' },
  reverse: { backward: 'confirm', forward: 'opposite', absent: 'absent' },
};

export interface VerdictChoice {
  state: PairState;
  verdict: VerdictValue;
  label: string;
}

/**
 * The answer buttons for a pending question. Each names a state of the
 * pair and carries the verdict that state maps to for the proposed
 * change, so the human thinks about the graph, not about our encoding.
 * Orientation-only sessions drop the "no direct edge" option.
 */
export function verdictChoices(q: PendingQuestion, orientationOnly: boolean): VerdictChoice[] {
  const states: PairState[] = orientationOnly
    ? ['forward', 'backward']
    : ['forward', 'backward', 'absent'];
  const labels: Record<PairState, string> = {
    forward: `${q.from} → ${q.to}`,
    backward: `${q.to} → ${q.from}`,
    absent: 'no direct edge',
  };
  return states.map((state) => ({
    state,
    verdict: VERDICT_FOR[q.kind][state],
    label: labels[state],
  }));
}

/** One-line description of what the search is proposing. */
export function questionText(q: PendingQuestion): string {
  const action = { add: 'adding', delete: 'removing', reverse: 'reversing' }[q.kind];
  return `step ${q.iteration} proposes ${action} ${q.from} → ${q.to} — which is right?`;
}

export interface GaugeState {
  label: string;
  fraction: number;
  exhausted: boolean;
}

/**
 * Requests-used against the budget, ready to draw as a bar. An
 * unlimited session reports fraction 0 and never exhausts.
 */
export function budgetGauge(view: Pick<SessionView, 'requests_used' | 'budget'>): GaugeState {
  if (view.budget === null) {
    return { label: `${view.requests_used} asked (no limit)`, fraction: 0, exhausted: false };
  }
  const fraction = view.budget === 0 ? 1 : Math.min(view.requests_used / view.budget, 1);
  return {
    label: `${view.requests_used} / ${view.budget} requests`,
    fraction,
    exhausted: view.requests_used >= view.budget,
  };
}

/** The arc named by the pending question, or null when nothing is asked. */
export function pendingArc(view: SessionView): Arc | null {
  return view.pending ? { from: view.pending.from, to: view.pending.to } : null;
}

/** Fold newly seen trace entries into the tab's accumulated history,
 * keyed by iteration so re-deliveries overwrite rather than duplicate. */
export function mergeTrace(seen: Map<number, TraceEntry>, incoming: TraceEntry[]): void {
  for (const entry of incoming) {
    seen.set(entry.iteration, entry);
  }
}

export interface ConstraintArcs {
  reqd: Arc[];
  stop: Arc[];
}

/**
 * Constraints accumulated by the answered questions in a trace. This
 * mirrors the search's own bookkeeping — confirm on an add pins the arc,
 * opposite pins the reverse and bans the proposal, and so on — so the
 * arcs highlighted as required are exactly the ones pinned in the run.
 */
export function constraintsFromTrace(entries: Iterable<TraceEntry>): ConstraintArcs {
  const reqd = new Map<string, Arc>();
  const stop = new Map<string, Arc>();
  const put = (into: Map<string, Arc>, from: string, to: string) =>
    into.set(`${from}\u0000${to}`, { from, to });
  for (const e of entries) {
    if (!e.requested || e.verdict === null) continue;
    const { from: a, to: b } = e;
    if (e.kind === 'add') {
      if (e.verdict === 'confirm') {
        put(reqd, a, b);
      } else if (e.verdict === 'opposite') {
        put(reqd, b, a);
        put(stop, a, b);
      } else {
        put(stop, a, b);
        put(stop, b, a);
      }
    } else if (e.kind === 'delete') {
      if (e.verdict === 'confirm') {
        put(stop, a, b);
        put(stop, b, a);
      } else if (e.verdict === 'opposite') {
        put(reqd, b, a);
        put(stop, a, b);
      } else {
        put(reqd, a, b);
      }
    } else {
      if (e.verdict === 'confirm') {
        put(reqd, b, a);
        put(stop, a, b);
      } else if (e.verdict === 'opposite') {
        put(reqd, a, b);
      } else {
        put(stop, a, b);
        put(stop, b, a);
      }
    }
  }
  const ordered = (arcs: Map<string, Arc>) =>
    [...arcs.values()].sort((x, y) => x.from.localeCompare(y.from) || x.to.localeCompare(y.to));
  return { reqd: ordered(reqd), stop: ordered(stop) };
}

/** Human-readable status line for the session header. */
export function statusLine(view: SessionView): string {
  switch (view.status) {
    case 'running':
      return `searching… step ${view.iteration}`;
    case 'awaiting_answer':
      return 'waiting for your answer';
    case 'finished': {
      const score = view.score === null ? '' : `, score ${view.score.toFixed(2)}`;
      const quality = view.metrics ? `, F1 ${view.metrics.f1.toFixed(3)}, SHD ${view.metrics.shd}` : '';
      return `finished — ${view.arcs.length} arcs${score}${quality}`;
    }
    case 'failed':
      return `failed: ${view.error ?? 'unknown error'}`;
  }
}

const arcKey = (arc: Arc) => `${arc.from}\u0000${arc.to}`;

/** Membership test over an arc list, for highlight classification. */
export function arcSet(arcs: Iterable<Arc>): Set<string> {
  const keys = new Set<string>();
  for (const arc of arcs) keys.add(arcKey(arc));
  return keys;
}

export function hasArc(keys: Set<string>, arc: Arc): boolean {
  return keys.has(arcKey(arc));
}
