/** Thin typed client for the mitmlab session service. */

import type {
  ProtectionConfig,
  PropertyReport,
  PropertyWitness,
  ScenarioDocument,
  ScenarioListing,
  SessionState,
  StepResult,
  TranscriptDocument,
} from './types.js';

/** Raised for any non-2xx reply and for network failures (status 0). */
export class ServiceError extends Error {
  readonly status: number;
  readonly error: string;
  readonly detail: string;

  constructor(status: number, error: string, detail: string) {
    super(detail ? `${error}: ${detail}` : error);
    this.name = 'ServiceError';
    this.status = status;
    this.error = error;
    this.detail = detail;
  }
}

export type SessionRef = { scenarioId: number } | { scenario: ScenarioDocument };

// Witness replays run as throwaway sessions built from the witness fields.
// Scenario ids below 7 belong to the built-in drills.
const REPLAY_SCENARIO_ID = 7;

/** Scenario document that re-runs a property witness as a watchable session. */
export function witnessScenario(witness: PropertyWitness): ScenarioDocument {
  return {
    id: REPLAY_SCENARIO_ID,
    title: `Witness replay: ${witness.strategy}`,
    config: witness.config,
    strategy: witness.strategy,
    message_text: 'Send $100 to Alice',
    substitution: ['$100', '$1000'],
  };
}

export class ServiceClient {
  readonly baseUrl: string;

  constructor(baseUrl: string) {
    // trailing slash would double up in path concatenation
    this.baseUrl = baseUrl.replace(/\/+$/, '');
  }

  async scenarios(): Promise<ScenarioListing[]> {
    const doc = await this.call<{ scenarios: ScenarioListing[] }>('GET', '/scenarios');
    return doc.scenarios;
  }

  async createSession(ref: SessionRef, seed: number): Promise<SessionState> {
    const body =
      'scenarioId' in ref
        ? { scenario_id: ref.scenarioId, seed }
        : { scenario: ref.scenario, seed };
    const doc = await this.call<{ session: SessionState }>('POST', '/sessions', body);
    return doc.session;
  }

  async session(sessionId: string): Promise<SessionState> {
    const doc = await this.call<{ session: SessionState }>('GET', `/sessions/${sessionId}`);
    return doc.session;
  }

  async step(sessionId: string): Promise<StepResult> {
    return this.call<StepResult>('POST', `/sessions/${sessionId}/step`);
  }

  async choose(sessionId: string, strategy: string): Promise<SessionState> {
    const doc = await this.call<{ session: SessionState }>(
      'POST',
      `/sessions/${sessionId}/choice`,
      { strategy },
    );
    return doc.session;
  }

  async transcript(sessionId: string): Promise<TranscriptDocument> {
    return this.call<TranscriptDocument>('GET', `/sessions/${sessionId}/transcript`);
  }

  async analyze(
    config: ProtectionConfig | string,
    strategies: string[],
    seed = 0,
  ): Promise<PropertyReport> {
    return this.call<PropertyReport>('POST', '/analysis', { config, strategies, seed });
  }

  async deleteSession(sessionId: string): Promise<void> {
    await this.call<null>('DELETE', `/sessions/${sessionId}`);
  }

  private async call<T>(method: string, path: string, body?: unknown): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, {
        method,
        headers: body === undefined ? undefined : { 'Content-Type': 'application/json' },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch {
      throw new ServiceError(0, 'ServiceUnreachable', `cannot reach ${this.baseUrl}`);
    }
    if (response.status === 204) {
      return null as T;
    }
    let doc: unknown;
    try {
      doc = await response.json();
    } catch {
      throw new ServiceError(response.status, 'BadReply', 'reply was not JSON');
    }
    if (!response.ok) {
      const err = doc as { error?: string; detail?: string };
      throw new ServiceError(
        response.status,
        err.error ?? `HTTP ${response.status}`,
        err.detail ?? '',
      );
    }
    return doc as T;
  }
}
