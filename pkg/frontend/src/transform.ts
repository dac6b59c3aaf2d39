/**
 * View transform between image pixels and canvas (screen) coordinates.
 *
 * Screen position of an image point p is (p - pan) * zoom, so `pan` is the
 * image-space point shown at the canvas origin and `zoom` is the integer or
 * fractional magnification. Image pixel (x, y) occupies the half-open screen
 * square [(x-panX)*zoom, (x+1-panX)*zoom) x [...y...), which makes the
 * screen -> image mapping a floor of the inverse transform.
 */

export interface ViewTransform {
  zoom: number;
  panX: number;
  panY: number;
}

export interface PixelPoint {
  x: number;
  y: number;
}

export function identityTransform(): ViewTransform {
  return { zoom: 1, panX: 0, panY: 0 };
}

/**
 * Map a screen position to the integer image pixel under it, or null when
 * the position falls outside the image bounds. Zoom must be positive.
 */
export function screenToImage(
  sx: number,
  sy: number,
  view: ViewTransform,
  width: number,
  height: number,
): PixelPoint | null {
  if (!(view.zoom > 0)) {
    throw new RangeError(`zoom must be positive, got ${view.zoom}`);
  }
  const x = Math.floor(sx / view.zoom + view.panX);
  const y = Math.floor(sy / view.zoom + view.panY);
  if (x < 0 || y < 0 || x >= width || y >= height) {
    return null;
  }
  return { x, y };
}

/** Screen position of an image pixel's top-left corner. */
export function imageToScreen(ix: number, iy: number, view: ViewTransform): PixelPoint {
  return {
    x: (ix - view.panX) * view.zoom,
    y: (iy - view.panY) * view.zoom,
  };
}

/**
 * Clamp pan so at least one image pixel stays visible in a viewport of the
 * given screen size. Keeps the view recoverable after aggressive panning.
 */
export function clampPan(
  view: ViewTransform,
  width: number,
  height: number,
  viewportW: number,
  viewportH: number,
): ViewTransform {
  const visibleW = viewportW / view.zoom;
  const visibleH = viewportH / view.zoom;
  const panX = Math.min(Math.max(view.panX, -visibleW + 1), width - 1);
  const panY = Math.min(Math.max(view.panY, -visibleH + 1), height - 1);
  return { zoom: view.zoom, panX, panY };
}

export const ZOOM_LEVELS = [1, 2, 4, 8, 16] as const;

/** Next zoom level up or down, saturating at the ends of ZOOM_LEVELS. */
export function stepZoom(zoom: number, direction: 1 | -1): number {
  if (direction === 1) {
    for (const z of ZOOM_LEVELS) {
      if (z > zoom) return z;
    }
    return ZOOM_LEVELS[ZOOM_LEVELS.length - 1] ?? zoom;
  }
  for (let i = ZOOM_LEVELS.length - 1; i >= 0; i--) {
    const z = ZOOM_LEVELS[i];
    if (z !== undefined && z < zoom) return z;
  }
  return ZOOM_LEVELS[0] ?? zoom;
}
