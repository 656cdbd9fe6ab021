/**
 * Typed client for the session service. Mirrors the documented endpoint
 * payloads field for field; everything at this boundary speaks variable
 * names, never column indices.
 *
 * @module
 */

export type SessionStatus = 'running' | 'awaiting_answer' | 'finished' | 'failed';
export type ChangeKind = 'add' | 'delete' | 'reverse';
export type VerdictValue = 'confirm' | 'opposite' | 'absent';

export interface Arc {
  from: string;
  to: string;
}

export interface PendingQuestion {
  question_id: number;
  kind: ChangeKind;
  from: string;
  to: string;
  iteration: number;
  requests_used: number;
}

/** One search step from the session's recent-history window. */
export interface TraceEntry {
  iteration: number;
  kind: ChangeKind;
  from: string;
  to: string;
  delta: number;
  requested: boolean;
  verdict: VerdictValue | null;
  blocked: boolean;
  score: number;
}

export interface ConstraintSet {
  reqd: Arc[];
  stop: Arc[];
}

export interface SessionResult {
  arcs: Arc[];
  score: number;
  requests_used: number;
  iterations: number;
  constraints: ConstraintSet;
}

export interface SessionView {
  id: string;
  status: SessionStatus;
  variables: string[];
  arcs: Arc[];
  score: number | null;
  iteration: number;
  pending: PendingQuestion | null;
  requests_used: number;
  budget: number | null;
  orientation_only: boolean;
  recent: TraceEntry[];
  metrics: { f1: number; shd: number } | null;
  result: SessionResult | null;
  error: string | null;
}

export interface SessionSummary {
  id: string;
  status: SessionStatus;
  variables: number;
}

export interface SessionConfig {
  criterion?: 'none' | 'equivalent-add' | 'small-counts' | 'unreliable-score' | 'small-delta';
  threshold?: number;
  limit?: number | null;
  orientation_only?: boolean;
  tabu_length?: number;
  stop_patience?: number;
}

export interface CreateRequest {
  csv_text: string;
  config?: SessionConfig;
  truth?: unknown;
  constraints?: { reqd?: Arc[]; stop?: Arc[] };
}

/** A rejection from the service, carrying its machine-readable code. */
export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ServiceError';
  }
}

export class ServiceClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: typeof fetch = (input, init) => fetch(input, init),
  ) {}

  private async request(path: string, init?: RequestInit): Promise<any> {
    const resp = await this.fetchFn(`${this.base}${path}`, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      throw new ServiceError(resp.status, body.code ?? 'unknown_error', body.message ?? `HTTP ${resp.status}`);
    }
    return body;
  }

  private post(path: string, payload?: unknown): Promise<any> {
    return this.request(path, {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: payload === undefined ? undefined : JSON.stringify(payload),
    });
  }

  createSession(req: CreateRequest): Promise<SessionView> {
    return this.post('/sessions', req);
  }

  async listSessions(): Promise<SessionSummary[]> {
    const body = await this.request('/sessions');
    return body.sessions;
  }

  getSession(id: string): Promise<SessionView> {
    return this.request(`/sessions/${id}`);
  }

  answer(id: string, questionId: number, verdict: VerdictValue): Promise<SessionView> {
    return this.post(`/sessions/${id}/answer`, { question_id: questionId, verdict });
  }

  cancel(id: string): Promise<SessionView> {
    return this.post(`/sessions/${id}/cancel`);
  }
}
