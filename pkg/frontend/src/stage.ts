/**
 * StageModel: the rendering state of the drill, kept free of DOM so tests can
 * drive it headless.
 *
 * Every piece of state here is a straight projection of wire data. Events go
 * into `events` exactly as received (the render-fidelity log), each one adds
 * one ticker line, and avatars/flight/banner are recomputed from the event
 * fields alone. The model performs no cryptography and invents no facts the
 * service did not send.
 */

import type {
  Envelope,
  Identity,
  InterceptedEvent,
  OutcomeName,
  Part,
  SessionState,
  TranscriptEvent,
} from './types.js';

export type Mood = 'idle' | 'speaking' | 'happy' | 'declined' | 'refusing' | 'scheming';

export interface AvatarState {
  mood: Mood;
  speech: string;
}

export type PartIcon = 'text' | 'digest' | 'lock' | 'key-request' | 'key-grant';

/** One envelope part as shown in flight: short label, full value on hover. */
export interface PartView {
  icon: PartIcon;
  label: string;
  detail: string;
}

export interface FlightView {
  seq: number;
  from: Identity;
  to: Identity;
  parts: PartView[];
  /** Envelope differs from what the sender put on the wire. */
  tampered: boolean;
  /** Attacker is currently holding it (between tap and delivery). */
  held: boolean;
}

export type BannerKind = 'none' | 'secure' | 'breach' | 'declined' | 'blocked';

export interface Banner {
  kind: BannerKind;
  text: string;
}

export const IDENTITIES: readonly Identity[] = ['User', 'Bank', 'Attacker', 'CertificateAuthority'];

const SHORT_NAMES: Record<Identity, string> = {
  User: 'User',
  Bank: 'Bank',
  Attacker: 'Attacker',
  CertificateAuthority: 'CA',
};

// Speech bubbles show 8 hex chars of a digest; the full value rides in `detail`.
const DIGEST_PREVIEW = 8;

export function shortName(identity: Identity): string {
  return SHORT_NAMES[identity];
}

export function partView(part: Part): PartView {
  switch (part.kind) {
    case 'plain':
      return { icon: 'text', label: `"${part.text}"`, detail: part.text };
    case 'digest':
      return {
        icon: 'digest',
        label: `#${part.value.slice(0, DIGEST_PREVIEW)}`,
        detail: part.value,
      };
    case 'cipher':
      return {
        icon: 'lock',
        label: `locked box (${part.key_id})`,
        detail: `nonce ${part.nonce}, body ${part.body}`,
      };
    case 'key_request':
      return {
        icon: 'key-request',
        label: `key request as ${shortName(part.claimed_identity)}`,
        detail: `claimed identity: ${part.claimed_identity}`,
      };
    case 'key_grant':
      return {
        icon: 'key-grant',
        label: `key ${part.key_id}`,
        detail: `key ${part.key_id}, material ${part.material}`,
      };
  }
}

function partsSummary(envelope: Envelope): string {
  return envelope.parts.map((part) => partView(part).label).join(' + ');
}

function firstPlainText(envelope: Envelope): string | null {
  for (const part of envelope.parts) {
    if (part.kind === 'plain') {
      return part.text;
    }
  }
  return null;
}

function allCipher(envelope: Envelope): boolean {
  return envelope.parts.length > 0 && envelope.parts.every((part) => part.kind === 'cipher');
}

function senderSpeech(envelope: Envelope): string {
  const text = firstPlainText(envelope);
  if (text !== null) {
    return text;
  }
  const first = envelope.parts[0];
  if (first === undefined) {
    return 'sending an empty envelope';
  }
  if (first.kind === 'key_request') {
    return `may I have a key? I am ${shortName(first.claimed_identity)}`;
  }
  if (first.kind === 'key_grant') {
    return `here is key ${first.key_id}`;
  }
  return 'sending a locked envelope';
}

function sameEnvelope(a: Envelope, b: Envelope): boolean {
  return JSON.stringify(a) === JSON.stringify(b);
}

function interceptionPhrase(event: InterceptedEvent): string {
  const before = firstPlainText(event.before);
  const after = firstPlainText(event.after);
  if (sameEnvelope(event.before, event.after)) {
    return allCipher(event.after)
      ? 'peeks inside, finds only a locked box, forwards it'
      : 'reads it and forwards it untouched';
  }
  if (before !== null && after !== null && before !== after) {
    return `rewrites "${before}" into "${after}"`;
  }
  return 'rewrites the envelope';
}

/** One human ticker line per wire event. */
export function describeEvent(event: TranscriptEvent): string {
  switch (event.type) {
    case 'Sent':
      return `#${event.seq} ${shortName(event.envelope.sender)} sends to ${shortName(event.envelope.recipient)}: ${partsSummary(event.envelope)}`;
    case 'Intercepted':
      return `#${event.seq} Attacker taps the wire (${event.strategy_name}) and ${interceptionPhrase(event)}`;
    case 'Delivered':
      return `#${event.seq} delivered to ${shortName(event.envelope.recipient)}: ${partsSummary(event.envelope)}`;
    case 'Verified':
      return `check passed: ${event.detail}`;
    case 'Rejected':
      return `DECLINED: ${event.reason}`;
    case 'Executed':
      return `Bank executes "${event.transaction_text}"`;
    case 'KeyIssued':
      return `CA issues ${event.key_id} to ${shortName(event.to)}`;
    case 'IdentityCheckFailed':
      return `CA identity check failed: claims to be ${shortName(event.claimed)}, is actually ${shortName(event.actual)}`;
  }
}

function bannerFor(outcome: OutcomeName): Banner {
  switch (outcome) {
    case 'ExecutedForged':
      return { kind: 'breach', text: 'BREACH: the bank executed a forged transaction' };
    case 'RejectedTampering':
      return { kind: 'declined', text: 'The bank spotted the tampering and declined' };
    case 'AttackBlocked':
      return { kind: 'blocked', text: 'Attack blocked: no forged transaction got through' };
    case 'ExecutedGenuine':
      return { kind: 'secure', text: 'The genuine transaction went through untouched' };
  }
}

function freshAvatars(): Record<Identity, AvatarState> {
  return {
    User: { mood: 'idle', speech: '' },
    Bank: { mood: 'idle', speech: '' },
    Attacker: { mood: 'idle', speech: '' },
    CertificateAuthority: { mood: 'idle', speech: '' },
  };
}

export class StageModel {
  avatars: Record<Identity, AvatarState> = freshAvatars();
  flight: FlightView | null = null;
  ticker: string[] = [];
  /** Raw wire events in arrival order; must match the service transcript. */
  events: TranscriptEvent[] = [];
  declineVisible = false;
  callout: string | null = null;
  outcome: OutcomeName | null = null;
  banner: Banner = { kind: 'none', text: '' };
  stepDisabled = false;
  choiceOpen = false;
  injectedStrategy: string | null = null;
  injectionNote: string | null = null;
  expectedOutcome: OutcomeName | null = null;
  /** Finished with an outcome other than the scripted one (after an injection). */
  surprise = false;

  reset(expectedOutcome: OutcomeName | null = null): void {
    this.avatars = freshAvatars();
    this.flight = null;
    this.ticker = [];
    this.events = [];
    this.declineVisible = false;
    this.callout = null;
    this.outcome = null;
    this.banner = { kind: 'none', text: '' };
    this.stepDisabled = false;
    this.choiceOpen = false;
    this.injectedStrategy = null;
    this.injectionNote = null;
    this.expectedOutcome = expectedOutcome;
    this.surprise = false;
  }

  applyEvent(event: TranscriptEvent): void {
    this.events.push(event);
    this.ticker.push(describeEvent(event));
    switch (event.type) {
      case 'Sent': {
        const env = event.envelope;
        this.flight = {
          seq: event.seq,
          from: env.sender,
          to: env.recipient,
          parts: env.parts.map(partView),
          tampered: false,
          held: false,
        };
        this.say(env.sender, 'speaking', senderSpeech(env));
        break;
      }
      case 'Intercepted': {
        const changed = !sameEnvelope(event.before, event.after);
        const after = event.after;
        this.flight = {
          seq: event.seq,
          from: after.sender,
          to: after.recipient,
          parts: after.parts.map(partView),
          tampered: changed,
          held: true,
        };
        this.say('Attacker', 'scheming', interceptionPhrase(event));
        if (!changed && allCipher(after)) {
          this.callout = 'Attacker cannot read the locked box';
        }
        break;
      }
      case 'Delivered': {
        const env = event.envelope;
        const tampered = this.flight !== null && this.flight.seq === event.seq && this.flight.tampered;
        this.flight = {
          seq: event.seq,
          from: env.sender,
          to: env.recipient,
          parts: env.parts.map(partView),
          tampered,
          held: false,
        };
        this.say(env.recipient, 'speaking', `got envelope #${event.seq}`);
        break;
      }
      case 'Verified': {
        const who: Identity = event.detail.includes('certificate authority')
          ? 'CertificateAuthority'
          : 'Bank';
        this.say(who, 'happy', event.detail);
        break;
      }
      case 'Rejected': {
        this.declineVisible = true;
        this.callout = event.reason;
        this.say('Bank', 'declined', 'transaction DECLINED');
        break;
      }
      case 'Executed': {
        this.say('Bank', 'happy', `executed: "${event.transaction_text}"`);
        break;
      }
      case 'KeyIssued': {
        this.say('CertificateAuthority', 'speaking', `issuing ${event.key_id} to ${shortName(event.to)}`);
        break;
      }
      case 'IdentityCheckFailed': {
        this.callout = `identity check failed: claims ${shortName(event.claimed)}, is ${shortName(event.actual)}`;
        this.say('CertificateAuthority', 'refusing', `you are not ${shortName(event.claimed)}!`);
        this.say('Attacker', 'idle', 'caught out');
        break;
      }
    }
  }

  applySession(state: SessionState): void {
    this.stepDisabled = state.finished;
    this.choiceOpen = state.pending_choice;
    this.injectedStrategy = state.strategy_override;
    if (state.finished && state.outcome !== null) {
      this.outcome = state.outcome;
      this.banner = bannerFor(state.outcome);
      this.surprise = this.expectedOutcome !== null && state.outcome !== this.expectedOutcome;
    }
  }

  noteInjection(note: string | null): void {
    this.injectionNote = note;
  }

  private say(identity: Identity, mood: Mood, speech: string): void {
    this.avatars[identity] = { mood, speech };
  }
}
