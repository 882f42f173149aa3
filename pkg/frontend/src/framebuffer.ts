/** Client-side RGB framebuffer model. */

import { TileUpdate, UpdateMessage } from "./protocol.js";

export class Framebuffer {
  readonly width: number;
  readonly height: number;
  readonly pixels: Uint8Array;

  constructor(width: number, height: number, pixels?: Uint8Array) {
    if (pixels !== undefined && pixels.length !== width * height * 3) {
      throw new RangeError(`pixel buffer is ${pixels.length} bytes, want ${width * height * 3}`);
    }
    this.width = width;
    this.height = height;
    this.pixels = pixels ?? new Uint8Array(width * height * 3);
  }

  blitTile(update: TileUpdate, tile: number): void {
    const cols = Math.floor(this.width / tile);
    const rows = Math.floor(this.height / tile);
    if (update.col < 0 || update.col >= cols || update.row < 0 || update.row >= rows) {
      throw new RangeError(`tile (${update.col}, ${update.row}) outside ${cols}x${rows} grid`);
    }
    const stride = this.width * 3;
    const rowBytes = tile * 3;
    const x0 = update.col * rowBytes;
    for (let i = 0; i < tile; i++) {
      const dst = (update.row * tile + i) * stride + x0;
      this.pixels.set(update.pixels.subarray(i * rowBytes, (i + 1) * rowBytes), dst);
    }
  }

  applyUpdate(update: UpdateMessage, tile: number): void {
    for (const t of update.tiles) {
      this.blitTile(t, tile);
    }
  }

  /** RGBA copy suitable for ImageData / canvas painting. */
  toRgba(): Uint8ClampedArray<ArrayBuffer> {
    const out = new Uint8ClampedArray(new ArrayBuffer(this.width * this.height * 4));
    for (let i = 0, j = 0; i < this.pixels.length; i += 3, j += 4) {
      out[j] = this.pixels[i]!;
      out[j + 1] = this.pixels[i + 1]!;
      out[j + 2] = this.pixels[i + 2]!;
      out[j + 3] = 255;
    }
    return out;
  }
}
