/**
 * Wire contract with the control service.
 *
 * Every message is one JSON object carrying `v: 1` and a `type` tag. The
 * command builders below emit the canonical field order byte-for-byte, and
 * inbound events are schema-checked before anything renders from them.
 */

export const WIRE_VERSION = 1;

export type FishState = 'swimming' | 'dispatched' | 'completed';
export type Mode = 'optimizer' | 'canvas';
export type Policy = 'space_shared' | 'time_shared';

export interface FishEntry {
  id: number;
  position: number[];
  fitness: number;
  task_ref: string | null;
  state: FishState;
}

export interface ResourceEntry {
  id: string;
  name: string;
  plane_position: [number, number] | null;
  policy: Policy;
  running: number;
  queued_mi: number;
}

export interface JobRow {
  job_id: string;
  resource: string;
  submit: number;
  start: number;
  finish: number;
  waiting: number;
  exec: number;
}

export interface Snapshot {
  v: number;
  session_id: string;
  mode: Mode;
  iteration: number;
  sim_clock: number;
  running: boolean;
  fish: FishEntry[];
  resources: ResourceEntry[];
  bulletin: { position: number[]; fitness: number } | null;
  completed: JobRow[];
}

export type EventMsg =
  | { type: 'snapshot'; snapshot: Snapshot }
  | { type: 'job_completed'; job: JobRow }
  | { type: 'run_finished'; summary: Record<string, unknown> }
  | { type: 'error'; code: string; message: string };

export class WireError extends Error {}

/** Canonical command serializers; key order is part of the contract. */
export const commands = {
  configure(config: unknown): string {
    return JSON.stringify({ v: WIRE_VERSION, type: 'configure', config });
  },
  start(): string {
    return JSON.stringify({ v: WIRE_VERSION, type: 'start' });
  },
  pause(): string {
    return JSON.stringify({ v: WIRE_VERSION, type: 'pause' });
  },
  step(n: number): string {
    if (!Number.isInteger(n) || n < 1) {
      throw new WireError(`step count must be a positive integer, got ${n}`);
    }
    return JSON.stringify({ v: WIRE_VERSION, type: 'step', n });
  },
  addFish(taskName: string, field: string, keywords: string[]): string {
    const canonical = Array.from(new Set(keywords.map((kw) => kw.toLowerCase()))).sort();
    return JSON.stringify({
      v: WIRE_VERSION,
      type: 'add_fish',
      task_name: taskName,
      field,
      keywords: canonical,
    });
  },
  removeFish(fishId: number): string {
    if (!Number.isInteger(fishId) || fishId < 0) {
      throw new WireError(`fish id must be a nonnegative integer, got ${fishId}`);
    }
    return JSON.stringify({ v: WIRE_VERSION, type: 'remove_fish', fish_id: fishId });
  },
  setParams(params: Record<string, number | string>): string {
    return JSON.stringify({ v: WIRE_VERSION, type: 'set_params', params });
  },
  snapshotRequest(): string {
    return JSON.stringify({ v: WIRE_VERSION, type: 'snapshot_request' });
  },
  reset(): string {
    return JSON.stringify({ v: WIRE_VERSION, type: 'reset' });
  },
};

function requireNumber(value: unknown, path: string): number {
  if (typeof value !== 'number' || Number.isNaN(value)) {
    throw new WireError(`schema error at ${path}: expected a number`);
  }
  return value;
}

function checkSnapshot(raw: any): Snapshot {
  if (typeof raw !== 'object' || raw === null) {
    throw new WireError('schema error at snapshot: expected an object');
  }
  if (raw.v !== WIRE_VERSION) {
    throw new WireError(`unsupported snapshot schema version ${raw.v}`);
  }
  if (raw.mode !== 'optimizer' && raw.mode !== 'canvas') {
    throw new WireError(`schema error at snapshot.mode: ${raw.mode}`);
  }
  if (!Array.isArray(raw.fish) || !Array.isArray(raw.resources) || !Array.isArray(raw.completed)) {
    throw new WireError('schema error at snapshot: fish/resources/completed must be arrays');
  }
  requireNumber(raw.iteration, 'snapshot.iteration');
  requireNumber(raw.sim_clock, 'snapshot.sim_clock');
  for (const [i, fish] of raw.fish.entries()) {
    if (!Array.isArray(fish.position)) {
      throw new WireError(`schema error at snapshot.fish[${i}].position`);
    }
    if (!['swimming', 'dispatched', 'completed'].includes(fish.state)) {
      throw new WireError(`schema error at snapshot.fish[${i}].state: ${fish.state}`);
    }
  }
  return raw as Snapshot;
}

/** Parse one inbound stream message; throws WireError on anything off-contract. */
export function parseEvent(text: string): EventMsg {
  let raw: any;
  try {
    raw = JSON.parse(text);
  } catch (error) {
    throw new WireError(`parse error: ${(error as Error).message}`);
  }
  if (typeof raw !== 'object' || raw === null) {
    throw new WireError('schema error at root: expected an object');
  }
  if (raw.v !== WIRE_VERSION) {
    throw new WireError(`unsupported message version ${raw.v}`);
  }
  switch (raw.type) {
    case 'snapshot':
      return { type: 'snapshot', snapshot: checkSnapshot(raw.snapshot) };
    case 'job_completed':
      if (typeof raw.job !== 'object' || raw.job === null) {
        throw new WireError('schema error at job');
      }
      return { type: 'job_completed', job: raw.job as JobRow };
    case 'run_finished':
      return { type: 'run_finished', summary: raw.summary ?? {} };
    case 'error':
      return { type: 'error', code: String(raw.code), message: String(raw.message) };
    default:
      throw new WireError(`unknown message type ${raw.type}`);
  }
}
