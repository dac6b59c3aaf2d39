import { describe, expect, it } from "vitest";

import { bitmapFromGray, KEPT_TINT, overlayRgba } from "../src/overlay.js";

describe("overlayRgba", () => {
  const mask = new Uint8Array([0, 1, 1, 0, 0, 1]); // 3x2

  it("tints foreground pixels and leaves background transparent", () => {
    const rgba = overlayRgba(mask, 3, 2, 1.0);
    expect(rgba.length).toBe(3 * 2 * 4);
    // background pixel 0: all zero
    expect(Array.from(rgba.slice(0, 4))).toEqual([0, 0, 0, 0]);
    // foreground pixel 1: tint at full opacity
    expect(Array.from(rgba.slice(4, 8))).toEqual([KEPT_TINT.r, KEPT_TINT.g, KEPT_TINT.b, 255]);
    // last pixel is foreground too
    expect(rgba[5 * 4 + 3]).toBe(255);
  });

  it("alpha 0 produces a fully invisible overlay", () => {
    const rgba = overlayRgba(mask, 3, 2, 0);
    for (let i = 3; i < rgba.length; i += 4) {
      expect(rgba[i]).toBe(0);
    }
  });

  it("scales opacity into the byte range", () => {
    const rgba = overlayRgba(mask, 3, 2, 0.5);
    expect(rgba[4 + 3]).toBe(128);
  });

  it("clamps out-of-range alpha", () => {
    expect(overlayRgba(mask, 3, 2, 7)[4 + 3]).toBe(255);
    expect(overlayRgba(mask, 3, 2, -1)[4 + 3]).toBe(0);
  });

  it("supports a custom tint", () => {
    const rgba = overlayRgba(mask, 3, 2, 1, { r: 10, g: 20, b: 30 });
    expect(Array.from(rgba.slice(4, 8))).toEqual([10, 20, 30, 255]);
  });

  it("rejects a mask that does not match the dimensions", () => {
    expect(() => overlayRgba(mask, 4, 2, 1)).toThrow(RangeError);
  });
});

describe("bitmapFromGray", () => {
  it("thresholds strictly above 127", () => {
    const gray = new Uint8Array([0, 127, 128, 200, 255]);
    expect(Array.from(bitmapFromGray(gray))).toEqual([0, 0, 1, 1, 1]);
  });

  it("round-trips a served mask written as 0/255", () => {
    const served = new Uint8Array([255, 0, 0, 255]);
    expect(Array.from(bitmapFromGray(served))).toEqual([1, 0, 0, 1]);
  });
});
