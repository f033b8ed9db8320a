import { describe, expect, it } from 'vitest';

import { StageModel, describeEvent, partView } from '../src/stage.js';
import type {
  Envelope,
  Part,
  SessionState,
  TranscriptEvent,
} from '../src/types.js';

const DIGEST = 'eb14765f71276eb187ad94791f4752d4be3a3c6e78fb058bcf2b650133812735';

function envelope(parts: Part[], seq = 1): Envelope {
  return { seq, sender: 'User', recipient: 'Bank', parts };
}

function session(overrides: Partial<SessionState>): SessionState {
  return {
    session_id: 'abc123',
    scenario_id: 2,
    seed: 0,
    cursor: 0,
    pending_choice: false,
    finished: false,
    strategy_override: null,
    outcome: null,
    ...overrides,
  };
}

const genuine = envelope([
  { kind: 'plain', text: 'Send $100 to Alice' },
  { kind: 'digest', value: DIGEST },
]);
const forged = envelope([
  { kind: 'plain', text: 'Send $1000 to Alice' },
  { kind: 'digest', value: DIGEST },
]);

// A scenario-2 shaped exchange: tamper with the text, keep the stale digest.
const tamperRun: TranscriptEvent[] = [
  { type: 'Sent', seq: 1, envelope: genuine },
  { type: 'Intercepted', seq: 1, strategy_name: 'modify_message', before: genuine, after: forged },
  { type: 'Delivered', seq: 1, envelope: forged },
  { type: 'Rejected', seq: 1, reason: `hash mismatch: recomputed c3faba7e, envelope carried ${DIGEST}` },
];

describe('event log fidelity', () => {
  it('stores every wire event unmodified, in order', () => {
    const model = new StageModel();
    for (const event of tamperRun) {
      model.applyEvent(event);
    }
    expect(model.events).toEqual(tamperRun);
  });

  it('adds exactly one ticker line per event', () => {
    const model = new StageModel();
    for (const event of tamperRun) {
      model.applyEvent(event);
    }
    expect(model.ticker).toHaveLength(tamperRun.length);
  });
});

describe('part rendering', () => {
  it('truncates digests to 8 hex chars with the full value in detail', () => {
    const view = partView({ kind: 'digest', value: DIGEST });
    expect(view.label).toBe('#eb14765f');
    expect(view.detail).toBe(DIGEST);
  });

  it('shows ciphertext as a locked box naming the key id', () => {
    const view = partView({ kind: 'cipher', nonce: 'aa'.repeat(16), body: 'bb'.repeat(20), key_id: 'K_UB' });
    expect(view.icon).toBe('lock');
    expect(view.label).toContain('K_UB');
    expect(view.label).not.toContain('bb');
  });

  it('shows plaintext verbatim', () => {
    const view = partView({ kind: 'plain', text: 'Send $100 to Alice' });
    expect(view.label).toContain('Send $100 to Alice');
  });

  it('never leaks plaintext into the stage for sealed envelopes', () => {
    const model = new StageModel();
    const sealed = envelope([
      { kind: 'cipher', nonce: '11'.repeat(16), body: '22'.repeat(30), key_id: 'K' },
    ]);
    model.applyEvent({ type: 'Sent', seq: 1, envelope: sealed });
    model.applyEvent({
      type: 'Intercepted',
      seq: 1,
      strategy_name: 'modify_message',
      before: sealed,
      after: sealed,
    });
    expect(JSON.stringify(model)).not.toContain('Alice');
  });
});

describe('interception rendering', () => {
  it('makes a plaintext rewrite visible in the ticker and flight', () => {
    const model = new StageModel();
    model.applyEvent(tamperRun[0]);
    model.applyEvent(tamperRun[1]);
    const line = model.ticker[1];
    expect(line).toContain('$100');
    expect(line).toContain('$1000');
    expect(model.flight?.tampered).toBe(true);
    expect(model.flight?.held).toBe(true);
    expect(model.flight?.parts[0].label).toContain('$1000');
  });

  it('keeps the tampered flag through delivery', () => {
    const model = new StageModel();
    for (const event of tamperRun.slice(0, 3)) {
      model.applyEvent(event);
    }
    expect(model.flight?.tampered).toBe(true);
    expect(model.flight?.held).toBe(false);
  });

  it('calls out an unreadable locked box when a sealed envelope passes unchanged', () => {
    const model = new StageModel();
    const sealed = envelope([
      { kind: 'cipher', nonce: '11'.repeat(16), body: '22'.repeat(30), key_id: 'K_UB' },
    ]);
    model.applyEvent({
      type: 'Intercepted',
      seq: 1,
      strategy_name: 'modify_message',
      before: sealed,
      after: sealed,
    });
    expect(model.flight?.tampered).toBe(false);
    expect(model.callout).toContain('cannot read');
    expect(model.avatars.Attacker.mood).toBe('scheming');
  });
});

describe('verdict rendering', () => {
  it('shows the bank declining on Rejected, with the reason as a callout', () => {
    const model = new StageModel();
    for (const event of tamperRun) {
      model.applyEvent(event);
    }
    expect(model.declineVisible).toBe(true);
    expect(model.avatars.Bank.mood).toBe('declined');
    expect(model.callout).toContain('hash mismatch');
  });

  it('renders the identity check failing at the CA', () => {
    const model = new StageModel();
    model.applyEvent({ type: 'IdentityCheckFailed', claimed: 'User', actual: 'Attacker', seq: 3 });
    expect(model.avatars.CertificateAuthority.mood).toBe('refusing');
    expect(model.ticker[0]).toContain('User');
    expect(model.ticker[0]).toContain('Attacker');
  });

  it('routes Verified lines to the CA or the bank by wording', () => {
    const model = new StageModel();
    model.applyEvent({
      type: 'Verified',
      seq: 1,
      detail: 'certificate authority confirmed the credential of User',
    });
    expect(model.avatars.CertificateAuthority.mood).toBe('happy');
    model.applyEvent({ type: 'Verified', seq: 2, detail: 'recomputed hash matches the sealed digest' });
    expect(model.avatars.Bank.mood).toBe('happy');
  });
});

describe('session state projection', () => {
  it('maps each outcome to its banner', () => {
    const cases = [
      ['ExecutedForged', 'breach'],
      ['RejectedTampering', 'declined'],
      ['AttackBlocked', 'blocked'],
      ['ExecutedGenuine', 'secure'],
    ] as const;
    for (const [outcome, kind] of cases) {
      const model = new StageModel();
      model.applySession(session({ finished: true, outcome }));
      expect(model.banner.kind).toBe(kind);
      expect(model.outcome).toBe(outcome);
      expect(model.stepDisabled).toBe(true);
    }
  });

  it('opens the choice panel at the interception point', () => {
    const model = new StageModel();
    model.applySession(session({ pending_choice: true, cursor: 2 }));
    expect(model.choiceOpen).toBe(true);
    expect(model.stepDisabled).toBe(false);
  });

  it('flags a surprise when an injection changes the scripted ending', () => {
    const model = new StageModel();
    model.reset('RejectedTampering');
    model.applySession(
      session({ finished: true, outcome: 'ExecutedForged', strategy_override: 'modify_message_and_hash' }),
    );
    expect(model.surprise).toBe(true);
    expect(model.banner.kind).toBe('breach');
    expect(model.injectedStrategy).toBe('modify_message_and_hash');

    const scripted = new StageModel();
    scripted.reset('RejectedTampering');
    scripted.applySession(session({ finished: true, outcome: 'RejectedTampering' }));
    expect(scripted.surprise).toBe(false);
  });

  it('reset clears the whole stage', () => {
    const model = new StageModel();
    for (const event of tamperRun) {
      model.applyEvent(event);
    }
    model.applySession(session({ finished: true, outcome: 'RejectedTampering' }));
    model.reset();
    expect(model.events).toEqual([]);
    expect(model.ticker).toEqual([]);
    expect(model.flight).toBeNull();
    expect(model.declineVisible).toBe(false);
    expect(model.banner.kind).toBe('none');
    expect(model.avatars.Bank.mood).toBe('idle');
  });
});

describe('describeEvent', () => {
  it('covers every event type with a distinct line', () => {
    const lines = [
      describeEvent({ type: 'Sent', seq: 1, envelope: genuine }),
      describeEvent({ type: 'Intercepted', seq: 1, strategy_name: 'passive_read', before: genuine, after: genuine }),
      describeEvent({ type: 'Delivered', seq: 1, envelope: genuine }),
      describeEvent({ type: 'Verified', seq: 1, detail: 'recomputed hash matches the sealed digest' }),
      describeEvent({ type: 'Rejected', seq: 1, reason: 'hash mismatch' }),
      describeEvent({ type: 'Executed', seq: 1, transaction_text: 'Send $100 to Alice' }),
      describeEvent({ type: 'KeyIssued', to: 'Bank', key_id: 'K_UB', seq: 2 }),
      describeEvent({ type: 'IdentityCheckFailed', claimed: 'User', actual: 'Attacker', seq: 3 }),
    ];
    expect(new Set(lines).size).toBe(lines.length);
    expect(lines[6]).toContain('K_UB');
  });
});
