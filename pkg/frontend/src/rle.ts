/**
 * Run-length mask codec matching the annotation service wire format.
 *
 * A mask travels as {width, height, counts} where counts alternate between
 * background and foreground runs over the flattened row-major bitmap, always
 * starting with a background run (which may be zero-length).
 */

export interface RleMask {
  width: number;
  height: number;
  counts: number[];
}

/** Raised when an RLE document cannot represent a bitmap of its declared size. */
export class RleDecodeError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "RleDecodeError";
  }
}

function checkDimension(value: number, name: string): void {
  if (!Number.isInteger(value) || value <= 0) {
    throw new RleDecodeError(`${name} must be a positive integer, got ${value}`);
  }
}

/**
 * Decode an RLE document into a flat row-major bitmap of 0/1 bytes.
 *
 * The run total must equal width*height exactly; anything else means the
 * payload does not describe this mask and the caller should surface a
 * decode error rather than guess.
 */
export function decodeRle(doc: RleMask): Uint8Array {
  checkDimension(doc.width, "width");
  checkDimension(doc.height, "height");
  const total = doc.width * doc.height;
  const out = new Uint8Array(total);
  let offset = 0;
  let value = 0;
  for (const run of doc.counts) {
    if (!Number.isInteger(run) || run < 0) {
      throw new RleDecodeError(`run lengths must be non-negative integers, got ${run}`);
    }
    if (offset + run > total) {
      throw new RleDecodeError(
        `runs cover ${offset + run} pixels but mask has ${total}`,
      );
    }
    if (value === 1) {
      out.fill(1, offset, offset + run);
    }
    offset += run;
    value = 1 - value;
  }
  if (offset !== total) {
    throw new RleDecodeError(`runs cover ${offset} pixels but mask has ${total}`);
  }
  return out;
}

/** Count foreground pixels without materializing anything extra. */
export function foregroundCount(doc: RleMask): number {
  let sum = 0;
  for (let i = 1; i < doc.counts.length; i += 2) {
    sum += doc.counts[i] ?? 0;
  }
  return sum;
}
