/**
 * Client-side validation mirroring the server's config schema, so most
 * mistakes surface before any network call. Field paths match the server's
 * diagnostics (`swarm.delta`, `grid.resources[0].machines[0].rating`, ...).
 */

import { commands } from './wire';

export interface SwarmForm {
  visual: number;
  step: number;
  tryNumber: number;
  delta: number;
  population: number;
  iterations: number;
  visionDraw: 'symmetric' | 'literal';
}

export interface MachineForm {
  peCount: number;
  rating: number;
}

export interface ResourceForm {
  name: string;
  policy: 'space_shared' | 'time_shared';
  machines: MachineForm[];
  planeX: number | null;
  planeY: number | null;
}

export interface UserForm {
  name: string;
  jobs: number;
}

export interface GridConfigForm {
  users: UserForm[];
  resources: ResourceForm[];
  swarm: SwarmForm;
  mode: 'optimizer' | 'canvas';
  lengthMi: number;
  dispatchEpsilon: number;
  seed: number;
}

export interface FieldError {
  path: string;
  message: string;
}

export const DEFAULT_FORM: GridConfigForm = {
  users: [{ name: 'user-1', jobs: 3 }],
  resources: [{
    name: 'resource-1', policy: 'space_shared',
    machines: [{ peCount: 1, rating: 100 }],
    planeX: 4, planeY: 4,
  }],
  swarm: {
    visual: 6, step: 2, tryNumber: 4, delta: 0.618,
    population: 20, iterations: 60, visionDraw: 'symmetric',
  },
  mode: 'canvas',
  lengthMi: 500,
  dispatchEpsilon: 2,
  seed: 1,
};

export function validateSwarm(swarm: SwarmForm, errors: FieldError[]): void {
  if (!(swarm.delta > 0 && swarm.delta < 1)) {
    errors.push({ path: 'swarm.delta', message: `delta out of (0,1): ${swarm.delta}` });
  }
  if (!(swarm.visual > 0)) {
    errors.push({ path: 'swarm.visual', message: 'must be positive' });
  }
  if (!(swarm.step > 0)) {
    errors.push({ path: 'swarm.step', message: 'must be positive' });
  } else if (swarm.step > swarm.visual) {
    errors.push({ path: 'swarm.step', message: 'step must not exceed visual' });
  }
  if (!Number.isInteger(swarm.tryNumber) || swarm.tryNumber < 1) {
    errors.push({ path: 'swarm.try_number', message: 'must be a positive integer' });
  }
  if (!Number.isInteger(swarm.population) || swarm.population < 1) {
    errors.push({ path: 'swarm.population', message: 'must be a positive integer' });
  }
  if (!Number.isInteger(swarm.iterations) || swarm.iterations < 1) {
    errors.push({ path: 'swarm.iterations', message: 'must be a positive integer' });
  }
}

export function validateForm(form: GridConfigForm): FieldError[] {
  const errors: FieldError[] = [];
  validateSwarm(form.swarm, errors);
  if (form.users.length === 0 && form.mode === 'optimizer') {
    errors.push({ path: 'grid.users', message: 'optimizer mode needs at least one user with jobs' });
  }
  form.users.forEach((user, i) => {
    if (!user.name.trim()) {
      errors.push({ path: `grid.users[${i}].name`, message: 'required' });
    }
    if (!Number.isInteger(user.jobs) || user.jobs < 0) {
      errors.push({ path: `grid.users[${i}].jobs`, message: 'must be a nonnegative integer' });
    }
  });
  if (form.resources.length === 0) {
    errors.push({ path: 'grid.resources', message: 'at least one resource is required' });
  }
  form.resources.forEach((resource, i) => {
    if (!resource.name.trim()) {
      errors.push({ path: `grid.resources[${i}].name`, message: 'required' });
    }
    if (resource.machines.length === 0) {
      errors.push({ path: `grid.resources[${i}].machines`, message: 'at least one machine' });
    }
    resource.machines.forEach((machine, j) => {
      if (!(machine.rating > 0)) {
        errors.push({
          path: `grid.resources[${i}].machines[${j}].rating`,
          message: `rating must be positive, got ${machine.rating}`,
        });
      }
      if (!Number.isInteger(machine.peCount) || machine.peCount < 1) {
        errors.push({
          path: `grid.resources[${i}].machines[${j}].peCount`,
          message: 'must be a positive integer',
        });
      }
    });
    if (form.mode === 'canvas' && (resource.planeX === null || resource.planeY === null)) {
      errors.push({
        path: `grid.resources[${i}].plane_position`,
        message: 'required in canvas mode',
      });
    }
  });
  if (!(form.lengthMi > 0)) {
    errors.push({ path: 'grid.job_template.length_mi', message: 'must be positive' });
  }
  if (!(form.dispatchEpsilon > 0)) {
    errors.push({ path: 'scheduling.dispatch_epsilon', message: 'must be positive' });
  }
  return errors;
}

/**
 * Validate-then-send flow shared by the config panel: invalid forms never
 * reach the network; the caller gets either field errors or the server's
 * verdict.
 */
export async function submitConfig(
  form: GridConfigForm,
  send: (commandJson: string) => Promise<{ ok: boolean; status: number; body: any }>,
): Promise<{ errors: FieldError[] } | { result: { ok: boolean; status: number; body: any } }> {
  const errors = validateForm(form);
  if (errors.length > 0) {
    return { errors };
  }
  return { result: await send(commands.configure(toConfigDocument(form))) };
}

/** Shape the validated form into the server's config document. */
export function toConfigDocument(form: GridConfigForm): Record<string, unknown> {
  return {
    mode: form.mode,
    seed: form.seed,
    swarm: {
      visual: form.swarm.visual,
      step: form.swarm.step,
      try_number: form.swarm.tryNumber,
      delta: form.swarm.delta,
      population: form.swarm.population,
      iterations: form.swarm.iterations,
      vision_draw: form.swarm.visionDraw,
    },
    grid: {
      users: form.users.map((user) => ({ name: user.name, jobs: user.jobs })),
      resources: form.resources.map((resource) => ({
        name: resource.name,
        policy: resource.policy,
        machines: resource.machines.map((machine) => ({
          pes: Array.from({ length: machine.peCount }, () => ({ rating: machine.rating })),
        })),
        ...(resource.planeX !== null && resource.planeY !== null
          ? { plane_position: [resource.planeX, resource.planeY] }
          : {}),
      })),
      job_template: { length_mi: form.lengthMi },
    },
    scheduling: { dispatch_epsilon: form.dispatchEpsilon },
  };
}
