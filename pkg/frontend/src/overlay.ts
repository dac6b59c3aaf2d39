/**
 * Pure RGBA compositing for the label overlay.
 *
 * The overlay is produced at native image resolution and scaled on the
 * canvas with image smoothing disabled, so every screen texel comes from
 * exactly one mask pixel (nearest neighbor). Nothing here touches the DOM;
 * the browser layer wraps the returned buffer in an ImageData.
 */

export interface Tint {
  r: number;
  g: number;
  b: number;
}

export const KEPT_TINT: Tint = { r: 64, g: 220, b: 120 };

/**
 * Build a width*height RGBA buffer: foreground mask pixels get the tint at
 * the given opacity, background pixels stay fully transparent. Alpha is
 * clamped to [0, 1]; alpha 0 therefore yields an invisible overlay while
 * leaving prompt markers (drawn separately) untouched.
 */
export function overlayRgba(
  mask: Uint8Array,
  width: number,
  height: number,
  alpha: number,
  tint: Tint = KEPT_TINT,
): Uint8ClampedArray<ArrayBuffer> {
  const total = width * height;
  if (mask.length !== total) {
    throw new RangeError(`mask has ${mask.length} pixels, expected ${total}`);
  }
  const a = Math.round(Math.min(Math.max(alpha, 0), 1) * 255);
  const out = new Uint8ClampedArray(total * 4);
  for (let i = 0; i < total; i++) {
    if (mask[i]) {
      const o = i * 4;
      out[o] = tint.r;
      out[o + 1] = tint.g;
      out[o + 2] = tint.b;
      out[o + 3] = a;
    }
  }
  return out;
}

/**
 * Convert a served label bitmap (grayscale PNG pixels, foreground > 127)
 * back into the 0/1 form used everywhere else. Used when the client has to
 * resynchronize from label.png instead of an RLE mutation reply.
 */
export function bitmapFromGray(gray: Uint8Array | Uint8ClampedArray): Uint8Array {
  const out = new Uint8Array(gray.length);
  for (let i = 0; i < gray.length; i++) {
    out[i] = (gray[i] ?? 0) > 127 ? 1 : 0;
  }
  return out;
}
