/**
 * Server-authoritative view state.
 *
 * Every visual element derives from the latest snapshot: fish sprites are
 * built one-per-snapshot-entry (no optimistic ghosts), the stats table is
 * the snapshot's completed list verbatim, and the sparkline appends the
 * bulletin fitness per snapshot. A schema mismatch raises a banner and
 * freezes rendering instead of guessing.
 */

import type { EventMsg, FishEntry, FishState, JobRow, Snapshot } from './wire';
import { fitViewport, pixelToPlane, planeToPixel, type Viewport } from './viewport';

export type ConnectionState = 'connecting' | 'open' | 'closed';

export interface FishSprite {
  id: number;
  px: number;
  py: number;
  planeX: number;
  planeY: number;
  color: string;
  state: FishState;
  taskRef: string | null;
  selected: boolean;
}

export interface ResourceMarker {
  id: string;
  name: string;
  px: number;
  py: number;
  loadFraction: number; // 0..1 relative to the busiest resource
  policy: string;
  running: number;
  queuedMi: number;
}

export interface Scene {
  fish: FishSprite[];
  resources: ResourceMarker[];
  statsRows: JobRow[];
  sparkline: number[];
  mode: string;
  iteration: number;
  simClock: number;
  running: boolean;
  banner: string | null;
  bestAssignment: Array<{ job: string; resource: string }>;
}

export const STATE_COLORS: Record<FishState, string> = {
  swimming: '#4dabf7',
  dispatched: '#ffa94d',
  completed: '#69db7c',
};

const SPARKLINE_LIMIT = 400;
const PICK_RADIUS_PX = 12;

export class ViewModel {
  snapshot: Snapshot | null = null;
  connection: ConnectionState = 'connecting';
  selectedFishId: number | null = null;
  viewport: Viewport;
  banner: string | null = null;
  bulletinHistory: number[] = [];
  runSummary: Record<string, unknown> | null = null;

  private fitted = false;

  constructor(public canvasWidth: number, public canvasHeight: number) {
    this.viewport = fitViewport(canvasWidth, canvasHeight, 32, 32);
  }

  /** Raise the banner and stop consuming frames. */
  halt(message: string): void {
    this.banner = message;
  }

  applyEvent(event: EventMsg): void {
    if (this.banner !== null) {
      return; // rendering halted
    }
    switch (event.type) {
      case 'snapshot': {
        this.snapshot = event.snapshot;
        if (event.snapshot.bulletin) {
          this.bulletinHistory.push(event.snapshot.bulletin.fitness);
          if (this.bulletinHistory.length > SPARKLINE_LIMIT) {
            this.bulletinHistory.shift();
          }
        }
        if (this.selectedFishId !== null
            && !event.snapshot.fish.some((f) => f.id === this.selectedFishId)) {
          this.selectedFishId = null;
        }
        if (!this.fitted) {
          this.autoFit();
          this.fitted = true;
        }
        break;
      }
      case 'run_finished':
        this.runSummary = event.summary;
        break;
      case 'error':
      case 'job_completed':
        // job rows arrive with the next snapshot; command errors render inline
        break;
    }
  }

  /** Fit the viewport to everything the first snapshot places on the plane. */
  autoFit(): void {
    if (!this.snapshot) {
      return;
    }
    let extentX = 31;
    let extentY = 31;
    for (const resource of this.snapshot.resources) {
      if (resource.plane_position) {
        extentX = Math.max(extentX, resource.plane_position[0]);
        extentY = Math.max(extentY, resource.plane_position[1]);
      }
    }
    for (const fish of this.snapshot.fish) {
      if (fish.position.length === 2) {
        extentX = Math.max(extentX, fish.position[0]);
        extentY = Math.max(extentY, fish.position[1]);
      }
    }
    this.viewport = fitViewport(this.canvasWidth, this.canvasHeight, extentX, extentY);
  }

  /** Nearest fish within the pick radius of a canvas click, if any. */
  pickFish(px: number, py: number): number | null {
    const scene = buildScene(this);
    let best: number | null = null;
    let bestDistance = PICK_RADIUS_PX;
    for (const sprite of scene.fish) {
      const distance = Math.hypot(sprite.px - px, sprite.py - py);
      if (distance < bestDistance) {
        best = sprite.id;
        bestDistance = distance;
      }
    }
    return best;
  }

  clickPlanePosition(px: number, py: number): [number, number] {
    return pixelToPlane(this.viewport, px, py);
  }
}

export function buildScene(vm: ViewModel): Scene {
  const snapshot = vm.snapshot;
  if (!snapshot) {
    return {
      fish: [], resources: [], statsRows: [], sparkline: [],
      mode: '-', iteration: 0, simClock: 0, running: false,
      banner: vm.banner, bestAssignment: [],
    };
  }
  const canvasMode = snapshot.mode === 'canvas';
  const fish: FishSprite[] = snapshot.fish.map((entry: FishEntry) => {
    const planeX = canvasMode && entry.position.length === 2 ? entry.position[0] : 0;
    const planeY = canvasMode && entry.position.length === 2 ? entry.position[1] : 0;
    const [px, py] = planeToPixel(vm.viewport, planeX, planeY);
    return {
      id: entry.id,
      px,
      py,
      planeX,
      planeY,
      color: STATE_COLORS[entry.state],
      state: entry.state,
      taskRef: entry.task_ref,
      selected: entry.id === vm.selectedFishId,
    };
  });
  const maxQueued = Math.max(1e-9, ...snapshot.resources.map((r) => r.queued_mi));
  const resources: ResourceMarker[] = snapshot.resources
    .filter((r) => r.plane_position !== null)
    .map((r) => {
      const [px, py] = planeToPixel(vm.viewport, r.plane_position![0], r.plane_position![1]);
      return {
        id: r.id,
        name: r.name,
        px,
        py,
        loadFraction: r.queued_mi / maxQueued,
        policy: r.policy,
        running: r.running,
        queuedMi: r.queued_mi,
      };
    });
  const bestAssignment: Array<{ job: string; resource: string }> = [];
  if (!canvasMode && snapshot.bulletin) {
    snapshot.bulletin.position.forEach((value, index) => {
      const resourceIndex = Math.min(
        Math.max(Math.floor(value), 0), snapshot.resources.length - 1);
      const resource = snapshot.resources[resourceIndex];
      bestAssignment.push({ job: `job ${index}`, resource: resource ? resource.name : '?' });
    });
  }
  return {
    fish,
    resources,
    statsRows: snapshot.completed,
    sparkline: [...vm.bulletinHistory],
    mode: snapshot.mode,
    iteration: snapshot.iteration,
    simClock: snapshot.sim_clock,
    running: snapshot.running,
    banner: vm.banner,
    bestAssignment,
  };
}
