/**
 * Wiring: menu, session controls, attacker choice panel, property report.
 * One active session per tab; every service call is awaited before the next.
 */

import { ServiceClient, ServiceError, witnessScenario } from './api.js';
import { StageModel } from './stage.js';
import { renderMenu, renderReport, renderServiceDown, renderStage } from './view.js';
import type {
  ProtectionConfig,
  PropertyWitness,
  ScenarioListing,
  SessionState,
} from './types.js';
import { CORE_STRATEGIES } from './types.js';

// The service prints its address on startup; pass ?service=http://host:port
// when it is not on the default port.
const DEFAULT_SERVICE = 'http://127.0.0.1:8000';

interface Ui {
  menu: HTMLElement;
  stage: HTMLElement;
  controls: HTMLElement;
  report: HTMLElement;
  status: HTMLElement;
}

interface AppState {
  client: ServiceClient;
  ui: Ui;
  model: StageModel;
  listings: ScenarioListing[];
  session: SessionState | null;
  busy: boolean;
}

function serviceUrl(): string {
  const fromQuery = new URLSearchParams(window.location.search).get('service');
  return fromQuery ?? DEFAULT_SERVICE;
}

function mount(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing #${id} in index.html`);
  }
  return node;
}

function setStatus(state: AppState, text: string): void {
  state.ui.status.textContent = text;
}

function describeError(err: unknown): string {
  if (err instanceof ServiceError) {
    return err.message;
  }
  return String(err);
}

async function loadMenu(state: AppState): Promise<void> {
  try {
    state.listings = await state.client.scenarios();
  } catch (err) {
    renderServiceDown(state.ui.menu, describeError(err), () => void loadMenu(state));
    return;
  }
  renderMenu(state.listings, state.ui.menu, (listing) => void startSession(state, listing));
}

async function startSession(state: AppState, listing: ScenarioListing): Promise<void> {
  const seed = Math.floor(Math.random() * 10000);
  try {
    state.session = await state.client.createSession({ scenarioId: listing.id }, seed);
  } catch (err) {
    setStatus(state, describeError(err));
    return;
  }
  state.model.reset(listing.expected_outcome);
  setStatus(state, `${listing.title} (seed ${seed}). Step through and watch the wire.`);
  redraw(state);
}

async function stepOnce(state: AppState): Promise<void> {
  if (!state.session || state.busy) {
    return;
  }
  state.busy = true;
  try {
    const result = await state.client.step(state.session.session_id);
    state.model.applyEvent(result.event);
    state.model.applySession(result.session);
    state.session = result.session;
  } catch (err) {
    if (err instanceof ServiceError && err.error === 'SessionFinished') {
      state.model.stepDisabled = true;
    } else {
      setStatus(state, describeError(err));
    }
  } finally {
    state.busy = false;
  }
  redraw(state);
}

async function injectChoice(state: AppState, strategy: string): Promise<void> {
  if (!state.session || state.busy) {
    return;
  }
  state.busy = true;
  try {
    const session = await state.client.choose(state.session.session_id, strategy);
    state.session = session;
    state.model.applySession(session);
    const twin = state.listings.find((l) => l.strategy === strategy && l.id !== session.scenario_id);
    state.model.noteInjection(
      twin
        ? `you chose ${strategy}: this is Scenario ${twin.id}'s attack`
        : `you chose ${strategy}`,
    );
    setStatus(state, `injected ${strategy}; keep stepping to see where it lands`);
  } catch (err) {
    if (err instanceof ServiceError && err.error === 'NotAtInterceptionPoint') {
      setStatus(state, 'not at an interception point: step until the attacker holds the envelope');
    } else {
      setStatus(state, describeError(err));
    }
  } finally {
    state.busy = false;
  }
  redraw(state);
}

async function runAnalysis(state: AppState, config: ProtectionConfig): Promise<void> {
  try {
    const report = await state.client.analyze(config, [...CORE_STRATEGIES]);
    renderReport(report, state.ui.report, (witness) => void replayWitness(state, witness));
  } catch (err) {
    setStatus(state, describeError(err));
  }
}

/** Load a violating trace onto the stage by replaying it as a fresh session. */
async function replayWitness(state: AppState, witness: PropertyWitness): Promise<void> {
  try {
    state.session = await state.client.createSession(
      { scenario: witnessScenario(witness) },
      witness.seed,
    );
    state.model.reset();
    setStatus(state, `replaying witness: ${witness.strategy} (seed ${witness.seed})`);
    redraw(state);
    while (state.session && !state.session.finished) {
      const result = await state.client.step(state.session.session_id);
      state.model.applyEvent(result.event);
      state.model.applySession(result.session);
      state.session = result.session;
      redraw(state);
    }
  } catch (err) {
    setStatus(state, describeError(err));
  }
}

function redraw(state: AppState): void {
  renderStage(state.model, state.ui.stage);
  renderControls(state);
}

function renderControls(state: AppState): void {
  const box = state.ui.controls;
  box.replaceChildren();
  if (!state.session) {
    return;
  }

  const step = document.createElement('button');
  step.id = 'step';
  step.textContent = 'step';
  step.disabled = state.model.stepDisabled;
  step.addEventListener('click', () => void stepOnce(state));
  box.append(step);

  if (state.model.choiceOpen) {
    const panel = document.createElement('div');
    panel.className = 'choice-panel';
    const prompt = document.createElement('div');
    prompt.textContent = 'the envelope is in your hands. Pick the attack (or just step to follow the script):';
    panel.append(prompt);
    for (const name of CORE_STRATEGIES) {
      const pick = document.createElement('button');
      pick.className = 'choice';
      pick.textContent = name;
      pick.addEventListener('click', () => void injectChoice(state, name));
      panel.append(pick);
    }
    box.append(panel);
  }
}

function renderAnalysisControls(state: AppState): void {
  const box = mount('analysis-controls');
  const hash = document.createElement('input');
  hash.type = 'checkbox';
  hash.id = 'defense-hash';
  const enc = document.createElement('input');
  enc.type = 'checkbox';
  enc.id = 'defense-enc';
  const ca = document.createElement('input');
  ca.type = 'checkbox';
  ca.id = 'defense-ca';

  // key issuance needs a sealed channel: CA auth cannot be toggled without encryption
  const reconcile = () => {
    if (!enc.checked) {
      ca.checked = false;
      ca.disabled = true;
    } else {
      ca.disabled = false;
    }
  };
  enc.addEventListener('change', reconcile);
  reconcile();

  const labelled = (input: HTMLInputElement, text: string): HTMLLabelElement => {
    const label = document.createElement('label');
    label.append(input, ` ${text}`);
    return label;
  };

  const run = document.createElement('button');
  run.textContent = 'analyze';
  run.addEventListener('click', () =>
    void runAnalysis(state, {
      integrity_hash: hash.checked,
      confidentiality_encryption: enc.checked,
      ca_authentication: ca.checked,
    }),
  );

  box.replaceChildren(
    labelled(hash, 'hash'),
    labelled(enc, 'encryption'),
    labelled(ca, 'CA auth'),
    run,
  );
}

export function boot(): void {
  const state: AppState = {
    client: new ServiceClient(serviceUrl()),
    ui: {
      menu: mount('menu'),
      stage: mount('stage'),
      controls: mount('controls'),
      report: mount('report'),
      status: mount('status'),
    },
    model: new StageModel(),
    listings: [],
    session: null,
    busy: false,
  };
  renderAnalysisControls(state);
  redraw(state);
  void loadMenu(state);
}

boot();
