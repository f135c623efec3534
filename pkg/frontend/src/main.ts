import './style.css';

import { HttpTransport, SessionClient } from './client';
import { buildScene, ViewModel } from './viewmodel';
import { drawScene, drawSparkline } from './render';
import { zoomAt, pan } from './viewport';
import {
  buildAddFishPanel, buildConfigPanel, buildPlaybackPanel, buildRemoveFishPanel,
  renderAssignment, renderStatsTable, renderStatus,
} from './panels';
import { DEFAULT_FORM, toConfigDocument } from './forms';

const CANVAS_W = 720;
const CANVAS_H = 540;
const SPARK_W = 300;
const SPARK_H = 80;

const app = document.getElementById('app')!;
app.innerHTML = `
  <header>
    <h1>shoal</h1>
    <div id="status" class="status"></div>
  </header>
  <main>
    <section class="plane">
      <canvas id="plane" width="${CANVAS_W}" height="${CANVAS_H}"></canvas>
      <div id="playback" class="panel row"></div>
    </section>
    <aside>
      <div class="panel">
        <h3>add fish</h3>
        <div id="add-fish" class="column"></div>
        <div id="remove-fish" class="column"></div>
      </div>
      <div class="panel">
        <h3>bulletin fitness</h3>
        <canvas id="sparkline" width="${SPARK_W}" height="${SPARK_H}"></canvas>
        <div id="assignment"></div>
      </div>
      <div class="panel">
        <h3>configuration</h3>
        <div id="config" class="column"></div>
      </div>
      <div class="panel">
        <h3>completed jobs</h3>
        <table id="stats"></table>
      </div>
    </aside>
  </main>
`;

const planeCanvas = document.getElementById('plane') as HTMLCanvasElement;
const sparkCanvas = document.getElementById('sparkline') as HTMLCanvasElement;
const statusLine = document.getElementById('status')!;
const statsTable = document.getElementById('stats') as HTMLTableElement;
const assignmentBox = document.getElementById('assignment')!;

const vm = new ViewModel(CANVAS_W, CANVAS_H);
const transport = new HttpTransport(
  (import.meta as any).env?.VITE_SHOAL_URL ?? 'http://127.0.0.1:8000');

function repaint(): void {
  const scene = buildScene(vm);
  drawScene(planeCanvas.getContext('2d')!, scene, CANVAS_W, CANVAS_H);
  drawSparkline(sparkCanvas.getContext('2d')!, scene.sparkline, SPARK_W, SPARK_H);
  renderStatsTable(statsTable, scene);
  renderStatus(statusLine, scene, vm.connection);
  renderAssignment(assignmentBox, scene);
}

const client = new SessionClient(transport, vm, repaint);

planeCanvas.addEventListener('click', (event) => {
  const rect = planeCanvas.getBoundingClientRect();
  vm.selectedFishId = vm.pickFish(event.clientX - rect.left, event.clientY - rect.top);
  repaint();
});
planeCanvas.addEventListener('wheel', (event) => {
  event.preventDefault();
  const rect = planeCanvas.getBoundingClientRect();
  vm.viewport = zoomAt(vm.viewport, event.clientX - rect.left, event.clientY - rect.top,
                       event.deltaY < 0 ? 1.15 : 1 / 1.15);
  repaint();
});
let dragging: [number, number] | null = null;
planeCanvas.addEventListener('mousedown', (event) => {
  dragging = [event.clientX, event.clientY];
});
window.addEventListener('mouseup', () => {
  dragging = null;
});
window.addEventListener('mousemove', (event) => {
  if (dragging) {
    vm.viewport = pan(vm.viewport, event.clientX - dragging[0], event.clientY - dragging[1]);
    dragging = [event.clientX, event.clientY];
    repaint();
  }
});

buildPlaybackPanel(document.getElementById('playback')!, client);
buildAddFishPanel(document.getElementById('add-fish')!, client);
buildRemoveFishPanel(document.getElementById('remove-fish')!, client,
                     () => vm.selectedFishId);
buildConfigPanel(document.getElementById('config')!, client, repaint);

client.connect(toConfigDocument(DEFAULT_FORM), DEFAULT_FORM.seed)
  .then(() => repaint())
  .catch((error) => {
    vm.halt(`cannot reach the control service: ${error.message}`);
    repaint();
  });
repaint();
