/**
 * DOM projection of StageModel and friends. No state lives here: every render
 * rebuilds its mount from the model, which keeps the view an ordinary function
 * of wire data.
 */

import { IDENTITIES, shortName } from './stage.js';
import type { PartView, StageModel } from './stage.js';
import type {
  Identity,
  PropertyName,
  PropertyReport,
  PropertyWitness,
  ProtectionConfig,
  ScenarioListing,
} from './types.js';
import { PROPERTY_NAMES } from './types.js';

const FACES: Record<Identity, string> = {
  User: '\u{1F431}',
  Bank: '\u{1F3E6}',
  Attacker: '\u{1F608}',
  CertificateAuthority: '\u{1F4DC}',
};

const PART_GLYPHS: Record<PartView['icon'], string> = {
  text: '\u{1F4C4}',
  digest: '\u{1F9FE}',
  lock: '\u{1F512}',
  'key-request': '\u{1F64B}',
  'key-grant': '\u{1F511}',
};

function el(tag: string, className = '', text = ''): HTMLElement {
  const node = document.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

function replaceChildren(mount: HTMLElement, ...children: HTMLElement[]): void {
  mount.replaceChildren(...children);
}

export function defenseLabels(config: ProtectionConfig): string[] {
  const labels: string[] = [];
  if (config.integrity_hash) {
    labels.push('hash');
  }
  if (config.confidentiality_encryption) {
    labels.push('encryption');
  }
  if (config.ca_authentication) {
    labels.push('CA auth');
  }
  return labels.length > 0 ? labels : ['none'];
}

export function renderStage(model: StageModel, mount: HTMLElement): void {
  const children: HTMLElement[] = [];

  if (model.banner.kind !== 'none') {
    const banner = el('div', `banner banner-${model.banner.kind}`, model.banner.text);
    if (model.surprise) {
      banner.append(el('span', 'surprise', ' (not the scripted ending!)'));
    }
    children.push(banner);
  }
  if (model.injectionNote) {
    children.push(el('div', 'injection-note', model.injectionNote));
  }

  const cast = el('div', 'cast');
  for (const identity of IDENTITIES) {
    const avatar = model.avatars[identity];
    const card = el('div', `avatar mood-${avatar.mood}`);
    card.dataset.identity = identity;
    card.append(el('div', 'face', FACES[identity]));
    card.append(el('div', 'avatar-name', shortName(identity)));
    card.append(el('div', 'bubble', avatar.speech));
    cast.append(card);
  }
  children.push(cast);

  const wire = el('div', 'wire');
  if (model.flight) {
    const flight = model.flight;
    const classes = ['envelope'];
    if (flight.tampered) {
      classes.push('tampered');
    }
    if (flight.held) {
      classes.push('held');
    }
    const box = el('div', classes.join(' '));
    const route = flight.held
      ? `#${flight.seq} ${shortName(flight.from)} → ${shortName(flight.to)} (in the attacker's hands)`
      : `#${flight.seq} ${shortName(flight.from)} → ${shortName(flight.to)}`;
    box.append(el('div', 'route', route));
    const partsRow = el('div', 'parts');
    for (const part of flight.parts) {
      const chip = el('span', `part part-${part.icon}`, `${PART_GLYPHS[part.icon]} ${part.label}`);
      chip.title = part.detail; // full value on hover
      partsRow.append(chip);
    }
    box.append(partsRow);
    wire.append(box);
  } else {
    wire.append(el('div', 'wire-idle', 'the wire is quiet'));
  }
  children.push(wire);

  if (model.declineVisible) {
    children.push(el('div', 'decline-stamp', 'DECLINED'));
  }
  if (model.callout) {
    children.push(el('div', 'callout', model.callout));
  }

  const ticker = el('ol', 'ticker');
  for (const line of model.ticker) {
    ticker.append(el('li', '', line));
  }
  const last = ticker.lastElementChild;
  if (last) {
    last.classList.add('latest');
  }
  children.push(ticker);

  replaceChildren(mount, ...children);
}

export function renderMenu(
  listings: ScenarioListing[],
  mount: HTMLElement,
  onSelect: (listing: ScenarioListing) => void,
): void {
  const cards = listings.map((listing) => {
    const card = el('button', 'scenario-card');
    card.append(el('div', 'scenario-title', `${listing.id}. ${listing.title}`));
    card.append(el('div', 'scenario-defenses', `defenses: ${defenseLabels(listing.config).join(', ')}`));
    card.append(el('div', 'scenario-attack', `attack: ${listing.strategy}`));
    card.addEventListener('click', () => onSelect(listing));
    return card;
  });
  replaceChildren(mount, ...cards);
}

export function renderServiceDown(mount: HTMLElement, detail: string, onRetry: () => void): void {
  const banner = el('div', 'banner banner-down');
  banner.append(el('span', '', `service unreachable: ${detail} `));
  const retry = el('button', 'retry', 'retry');
  retry.addEventListener('click', onRetry);
  banner.append(retry);
  replaceChildren(mount, banner);
}

const PROPERTY_TITLES: Record<PropertyName, string> = {
  confidentiality: 'Confidentiality',
  integrity: 'Integrity',
  authentication: 'Authentication',
};

export function renderReport(
  report: PropertyReport,
  mount: HTMLElement,
  onReplay: (witness: PropertyWitness) => void,
): void {
  const header = el(
    'div',
    'report-header',
    `defenses: ${defenseLabels(report.config).join(', ')} (seed ${report.seed})`,
  );
  const badges = el('div', 'badges');
  for (const name of PROPERTY_NAMES) {
    const finding = report.properties[name];
    const badge = el('div', `badge badge-${finding.verdict}`);
    badge.append(el('div', 'badge-title', PROPERTY_TITLES[name]));
    badge.append(el('div', 'badge-verdict', finding.verdict));
    if (finding.witness) {
      const witness = finding.witness;
      const replay = el('button', 'replay', `replay ${witness.strategy}`);
      replay.addEventListener('click', () => onReplay(witness));
      badge.append(replay);
    }
    badges.append(badge);
  }
  replaceChildren(mount, header, badges);
}
