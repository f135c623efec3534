/**
 * Invertible mapping between plane coordinates and canvas pixels.
 *
 * The transform is pan + uniform zoom with a flipped y axis (plane y grows
 * upward, pixels grow downward), so clicks can always be mapped back to
 * plane coordinates.
 */

export interface Viewport {
  scale: number;   // pixels per plane unit
  offsetX: number; // pixel x of plane x = 0
  offsetY: number; // pixel y of plane y = 0
  width: number;
  height: number;
}

const FIT_MARGIN = 0.08;

/** Fit the plane box [0, extentX] x [0, extentY] inside the canvas. */
export function fitViewport(width: number, height: number,
                            extentX: number, extentY: number): Viewport {
  const usableW = width * (1 - 2 * FIT_MARGIN);
  const usableH = height * (1 - 2 * FIT_MARGIN);
  const scale = Math.min(usableW / Math.max(extentX, 1), usableH / Math.max(extentY, 1));
  return {
    scale,
    offsetX: (width - extentX * scale) / 2,
    offsetY: height - (height - extentY * scale) / 2,
    width,
    height,
  };
}

export function planeToPixel(view: Viewport, x: number, y: number): [number, number] {
  return [view.offsetX + x * view.scale, view.offsetY - y * view.scale];
}

export function pixelToPlane(view: Viewport, px: number, py: number): [number, number] {
  return [(px - view.offsetX) / view.scale, (view.offsetY - py) / view.scale];
}

export function zoomAt(view: Viewport, px: number, py: number, factor: number): Viewport {
  const scale = Math.min(Math.max(view.scale * factor, 1e-3), 1e5);
  const [planeX, planeY] = pixelToPlane(view, px, py);
  return {
    ...view,
    scale,
    offsetX: px - planeX * scale,
    offsetY: py + planeY * scale,
  };
}

export function pan(view: Viewport, dx: number, dy: number): Viewport {
  return { ...view, offsetX: view.offsetX + dx, offsetY: view.offsetY + dy };
}
