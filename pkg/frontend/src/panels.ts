/**
 * DOM panels around the canvas: playback controls, the add-fish form, the
 * grid/swarm config form and the job statistics table. Panels only read
 * the scene and emit commands; they never simulate locally.
 */

import { commands } from './wire';
import type { Scene } from './viewmodel';
import { DEFAULT_FORM, submitConfig, type GridConfigForm } from './forms';
import type { SessionClient } from './client';

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, attrs: Record<string, string> = {}, text = ''): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text) {
    node.textContent = text;
  }
  return node;
}

export function renderStatsTable(table: HTMLTableElement, scene: Scene): void {
  table.innerHTML = '';
  const head = table.createTHead().insertRow();
  for (const title of ['job', 'resource', 'waiting (s)', 'exec (s)', 'finish (s)']) {
    head.appendChild(el('th', {}, title));
  }
  const body = table.createTBody();
  for (const row of scene.statsRows) {
    const tr = body.insertRow();
    tr.insertCell().textContent = row.job_id;
    tr.insertCell().textContent = row.resource;
    tr.insertCell().textContent = row.waiting.toFixed(3);
    tr.insertCell().textContent = row.exec.toFixed(3);
    tr.insertCell().textContent = row.finish.toFixed(3);
  }
}

export function renderStatus(target: HTMLElement, scene: Scene, connection: string): void {
  target.textContent =
    `${connection} | mode ${scene.mode} | iteration ${scene.iteration} | ` +
    `clock ${scene.simClock.toFixed(1)}s | ${scene.running ? 'running' : 'paused'} | ` +
    `${scene.fish.length} fish`;
}

export function renderAssignment(target: HTMLElement, scene: Scene): void {
  target.innerHTML = '';
  if (scene.mode !== 'optimizer' || scene.bestAssignment.length === 0) {
    return;
  }
  const list = el('ul', { class: 'assignment' });
  for (const entry of scene.bestAssignment) {
    list.appendChild(el('li', {}, `${entry.job} -> ${entry.resource}`));
  }
  target.appendChild(el('h3', {}, 'best assignment'));
  target.appendChild(list);
}

export function buildPlaybackPanel(root: HTMLElement, client: SessionClient): void {
  const startButton = el('button', {}, 'start');
  const pauseButton = el('button', {}, 'pause');
  const stepInput = el('input', { type: 'number', value: '1', min: '1' });
  const stepButton = el('button', {}, 'step');
  const resetButton = el('button', {}, 'reset');
  startButton.onclick = () => void client.send(commands.start());
  pauseButton.onclick = () => void client.send(commands.pause());
  stepButton.onclick = () => {
    const n = parseInt(stepInput.value, 10);
    if (Number.isInteger(n) && n >= 1) {
      void client.send(commands.step(n));
    }
  };
  resetButton.onclick = () => void client.send(commands.reset());
  root.append(startButton, pauseButton, stepInput, stepButton, resetButton);
}

export function buildAddFishPanel(root: HTMLElement, client: SessionClient): void {
  const nameInput = el('input', { placeholder: 'task name' });
  const fieldInput = el('input', { placeholder: 'field (e.g. Math)' });
  const keywordsInput = el('input', { placeholder: 'keywords, space separated' });
  const addButton = el('button', {}, 'add fish');
  const feedback = el('div', { class: 'feedback' });
  addButton.onclick = async () => {
    const keywords = keywordsInput.value.split(/\s+/).filter(Boolean);
    if (!nameInput.value.trim() || !fieldInput.value.trim()) {
      feedback.textContent = 'task name and field are required';
      return;
    }
    const result = await client.send(
      commands.addFish(nameInput.value.trim(), fieldInput.value.trim(), keywords));
    feedback.textContent = result.ok ? '' : String(result.body?.message ?? 'rejected');
  };
  root.append(nameInput, fieldInput, keywordsInput, addButton, feedback);
}

export function buildRemoveFishPanel(root: HTMLElement, client: SessionClient,
                                     selected: () => number | null): void {
  const removeButton = el('button', {}, 'remove selected fish');
  const feedback = el('div', { class: 'feedback' });
  removeButton.onclick = async () => {
    const fishId = selected();
    if (fishId === null) {
      feedback.textContent = 'click a fish on the canvas first';
      return;
    }
    const result = await client.send(commands.removeFish(fishId));
    feedback.textContent = result.ok ? '' : String(result.body?.message ?? 'rejected');
  };
  root.append(removeButton, feedback);
}

/**
 * Config form: users/resources/machines/PEs/ratings/jobs plus swarm params.
 * Validation runs client-side before anything is sent; errors land next to
 * the form with their field paths.
 */
export function buildConfigPanel(root: HTMLElement, client: SessionClient,
                                 onConfigured: () => void): void {
  const textarea = el('textarea', { rows: '16', spellcheck: 'false' });
  textarea.value = JSON.stringify(DEFAULT_FORM, null, 2);
  const applyButton = el('button', {}, 'apply configuration');
  const errorBox = el('pre', { class: 'errors' });
  applyButton.onclick = async () => {
    let form: GridConfigForm;
    try {
      form = JSON.parse(textarea.value);
    } catch (error) {
      errorBox.textContent = `form is not valid JSON: ${(error as Error).message}`;
      return;
    }
    const outcome = await submitConfig(form, (json) => client.send(json));
    if ('errors' in outcome) {
      errorBox.textContent = outcome.errors.map((e) => `${e.path}: ${e.message}`).join('\n');
      return;
    }
    if (!outcome.result.ok) {
      errorBox.textContent = String(outcome.result.body?.message ?? 'rejected by server');
    } else {
      errorBox.textContent = '';
      onConfigured();
    }
  };
  root.append(textarea, applyButton, errorBox);
}
