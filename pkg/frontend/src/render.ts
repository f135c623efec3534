/**
 * Canvas painter: draws whatever the scene builder produced. No state of
 * its own beyond the 2D context.
 */

import type { Scene } from './viewmodel';

const FISH_RADIUS = 6;
const RESOURCE_RADIUS = 14;
const RING_WIDTH = 4;

export function drawScene(ctx: CanvasRenderingContext2D, scene: Scene,
                          width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = '#101418';
  ctx.fillRect(0, 0, width, height);

  for (const resource of scene.resources) {
    ctx.beginPath();
    ctx.arc(resource.px, resource.py, RESOURCE_RADIUS, 0, Math.PI * 2);
    ctx.fillStyle = resource.policy === 'space_shared' ? '#2b3a55' : '#3d2b55';
    ctx.fill();
    ctx.strokeStyle = '#8ca3c7';
    ctx.lineWidth = 1.5;
    ctx.stroke();
    if (resource.loadFraction > 0) {
      ctx.beginPath();
      ctx.arc(resource.px, resource.py, RESOURCE_RADIUS + RING_WIDTH,
              -Math.PI / 2, -Math.PI / 2 + resource.loadFraction * Math.PI * 2);
      ctx.strokeStyle = '#ff6b6b';
      ctx.lineWidth = RING_WIDTH;
      ctx.stroke();
    }
    ctx.fillStyle = '#c6d2e3';
    ctx.font = '11px system-ui';
    ctx.textAlign = 'center';
    ctx.fillText(`${resource.name} (${resource.running})`,
                 resource.px, resource.py + RESOURCE_RADIUS + 16);
  }

  for (const sprite of scene.fish) {
    ctx.beginPath();
    ctx.arc(sprite.px, sprite.py, FISH_RADIUS, 0, Math.PI * 2);
    ctx.fillStyle = sprite.color;
    ctx.fill();
    if (sprite.selected) {
      ctx.beginPath();
      ctx.arc(sprite.px, sprite.py, FISH_RADIUS + 3, 0, Math.PI * 2);
      ctx.strokeStyle = '#ffffff';
      ctx.lineWidth = 2;
      ctx.stroke();
    }
    if (sprite.taskRef) {
      ctx.fillStyle = '#9aa7b5';
      ctx.font = '10px system-ui';
      ctx.textAlign = 'center';
      ctx.fillText(sprite.taskRef, sprite.px, sprite.py - FISH_RADIUS - 4);
    }
  }

  if (scene.banner) {
    ctx.fillStyle = 'rgba(120, 20, 20, 0.92)';
    ctx.fillRect(0, 0, width, 34);
    ctx.fillStyle = '#fff';
    ctx.font = '13px system-ui';
    ctx.textAlign = 'left';
    ctx.fillText(scene.banner, 12, 22);
  }
}

export function drawSparkline(ctx: CanvasRenderingContext2D, values: number[],
                              width: number, height: number): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = '#101418';
  ctx.fillRect(0, 0, width, height);
  if (values.length < 2) {
    return;
  }
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || 1;
  ctx.beginPath();
  values.forEach((value, index) => {
    const x = (index / (values.length - 1)) * (width - 8) + 4;
    const y = height - 6 - ((value - lo) / span) * (height - 12);
    if (index === 0) {
      ctx.moveTo(x, y);
    } else {
      ctx.lineTo(x, y);
    }
  });
  ctx.strokeStyle = '#69db7c';
  ctx.lineWidth = 1.5;
  ctx.stroke();
}
