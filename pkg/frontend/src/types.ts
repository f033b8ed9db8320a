/**
 * Wire types for the mitmlab session service.
 *
 * Everything here mirrors JSON produced by the Python side, field for field.
 * The UI never computes digests or ciphertexts itself; these types are the
 * whole contract.
 */

export type Identity = 'User' | 'Bank' | 'Attacker' | 'CertificateAuthority';

export type OutcomeName =
  | 'ExecutedGenuine'
  | 'ExecutedForged'
  | 'RejectedTampering'
  | 'AttackBlocked';

export interface ProtectionConfig {
  integrity_hash: boolean;
  confidentiality_encryption: boolean;
  ca_authentication: boolean;
}

// Envelope parts. Hex fields stay hex strings; we only ever display them.
export interface PlainPart {
  kind: 'plain';
  text: string;
}

export interface DigestPart {
  kind: 'digest';
  value: string;
}

export interface CipherPart {
  kind: 'cipher';
  nonce: string;
  body: string;
  key_id: string;
}

export interface KeyRequestPart {
  kind: 'key_request';
  claimed_identity: Identity;
}

export interface KeyGrantPart {
  kind: 'key_grant';
  key_id: string;
  material: string;
}

export type Part = PlainPart | DigestPart | CipherPart | KeyRequestPart | KeyGrantPart;

export interface Envelope {
  seq: number;
  sender: Identity;
  recipient: Identity;
  parts: Part[];
}

export interface SentEvent {
  type: 'Sent';
  seq: number;
  envelope: Envelope;
}

export interface InterceptedEvent {
  type: 'Intercepted';
  seq: number;
  strategy_name: string;
  before: Envelope;
  after: Envelope;
}

export interface DeliveredEvent {
  type: 'Delivered';
  seq: number;
  envelope: Envelope;
}

export interface VerifiedEvent {
  type: 'Verified';
  seq: number;
  detail: string;
}

export interface RejectedEvent {
  type: 'Rejected';
  seq: number;
  reason: string;
}

export interface ExecutedEvent {
  type: 'Executed';
  seq: number;
  transaction_text: string;
}

export interface KeyIssuedEvent {
  type: 'KeyIssued';
  to: Identity;
  key_id: string;
  seq: number;
}

export interface IdentityCheckFailedEvent {
  type: 'IdentityCheckFailed';
  claimed: Identity;
  actual: Identity;
  seq: number;
}

export type TranscriptEvent =
  | SentEvent
  | InterceptedEvent
  | DeliveredEvent
  | VerifiedEvent
  | RejectedEvent
  | ExecutedEvent
  | KeyIssuedEvent
  | IdentityCheckFailedEvent;

export interface TranscriptDocument {
  format: string;
  scenario_id: number;
  seed: number;
  strategy_override: string | null;
  outcome: OutcomeName;
  events: TranscriptEvent[];
}

export interface ScenarioListing {
  id: number;
  title: string;
  config: ProtectionConfig;
  strategy: string;
  message_text: string;
  substitution: [string, string];
  expected_outcome: OutcomeName;
}

/** Body for POST /sessions with an inline scenario document (id must be >= 7). */
export interface ScenarioDocument {
  id: number;
  title: string;
  config: ProtectionConfig;
  strategy: string;
  message_text: string;
  substitution: [string, string];
  expected_outcome?: OutcomeName;
}

export interface SessionState {
  session_id: string;
  scenario_id: number;
  seed: number;
  cursor: number;
  pending_choice: boolean;
  finished: boolean;
  strategy_override: string | null;
  outcome: OutcomeName | null;
}

export interface StepResult {
  event: TranscriptEvent;
  session: SessionState;
}

export interface PropertyWitness {
  config: ProtectionConfig;
  strategy: string;
  seed: number;
}

export interface PropertyFinding {
  verdict: 'holds' | 'violated';
  witness: PropertyWitness | null;
}

export type PropertyName = 'confidentiality' | 'integrity' | 'authentication';

export interface PropertyReport {
  config: ProtectionConfig;
  seed: number;
  strategies: string[];
  properties: Record<PropertyName, PropertyFinding>;
}

/**
 * Attacker strategies registered on the service side. The service is the
 * source of truth; this list exists so the choice panel can render labels
 * without an extra round trip. Names are stable wire identifiers.
 */
export const CORE_STRATEGIES: readonly string[] = [
  'passive_read',
  'modify_message',
  'modify_message_and_hash',
  'impersonate_steal_key',
  'impersonate_vs_ca',
];

export const PROPERTY_NAMES: readonly PropertyName[] = [
  'confidentiality',
  'integrity',
  'authentication',
];
