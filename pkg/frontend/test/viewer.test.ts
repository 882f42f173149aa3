/** Viewer state machine: seq discipline, resync, input coalescing. */

import { describe, expect, it } from "vitest";

import { Framebuffer } from "../src/framebuffer.js";
import { EventKind, TileMode, decodeUpdate } from "../src/protocol.js";
import { ViewerState } from "../src/viewer.js";

const W = 32;
const H = 32;
const TILE = 16; // 2x2 tile grid

/** Build an update wire frame by hand: solid-color raw tiles. */
function makeUpdate(
  frameSeq: number,
  tiles: Array<{ col: number; row: number; rgb: [number, number, number] }>,
): Uint8Array {
  const tileBytes = TILE * TILE * 3;
  const buf = new Uint8Array(12 + tiles.length * (9 + tileBytes));
  const view = new DataView(buf.buffer);
  buf[0] = 0x43; // 'C'
  buf[1] = 0x55; // 'U'
  view.setBigUint64(2, BigInt(frameSeq));
  view.setUint16(10, tiles.length);
  let off = 12;
  for (const t of tiles) {
    view.setUint16(off, t.col);
    view.setUint16(off + 2, t.row);
    view.setUint8(off + 4, TileMode.Raw);
    view.setUint32(off + 5, tileBytes);
    off += 9;
    for (let i = 0; i < tileBytes; i += 3) {
      buf[off + i] = t.rgb[0];
      buf[off + i + 1] = t.rgb[1];
      buf[off + i + 2] = t.rgb[2];
    }
    off += tileBytes;
  }
  return buf;
}

const FULL = (seq: number, rgb: [number, number, number] = [9, 9, 9]) =>
  makeUpdate(seq, [
    { col: 0, row: 0, rgb },
    { col: 1, row: 0, rgb },
    { col: 0, row: 1, rgb },
    { col: 1, row: 1, rgb },
  ]);

describe("frame sequencing", () => {
  it("applies consecutive updates and drops stale ones", () => {
    const v = new ViewerState(W, H, TILE);
    expect(v.handleUpdate(FULL(0))).toBe(true);
    expect(v.handleUpdate(makeUpdate(1, [{ col: 0, row: 0, rgb: [1, 2, 3] }]))).toBe(true);
    expect(v.handleUpdate(makeUpdate(1, [{ col: 1, row: 1, rgb: [7, 7, 7] }]))).toBe(false);
    expect(v.handleUpdate(makeUpdate(0, [{ col: 1, row: 1, rgb: [7, 7, 7] }]))).toBe(false);
    expect(v.lastFrameSeq).toBe(1);
    expect(v.framebuffer.pixels[0]).toBe(1); // delta 1 landed
  });

  it("detects gaps, requests resync, and recovers on a full frame", () => {
    let resyncs = 0;
    const v = new ViewerState(W, H, TILE, { requestResync: () => (resyncs += 1) });
    v.handleUpdate(FULL(0));
    // Delta 2 arrives but delta 1 was lost.
    expect(v.handleUpdate(makeUpdate(2, [{ col: 0, row: 0, rgb: [1, 1, 1] }]))).toBe(false);
    expect(resyncs).toBe(1);
    expect(v.awaitingResync).toBe(true);
    // Later deltas are also dropped without re-requesting.
    expect(v.handleUpdate(makeUpdate(3, [{ col: 0, row: 0, rgb: [2, 2, 2] }]))).toBe(false);
    expect(resyncs).toBe(1);
    // A full frame (any seq ahead) resynchronizes.
    expect(v.handleUpdate(FULL(4, [5, 5, 5]))).toBe(true);
    expect(v.awaitingResync).toBe(false);
    expect(v.lastFrameSeq).toBe(4);
    expect(v.framebuffer.pixels[0]).toBe(5);
    // Stream continues normally afterwards.
    expect(v.handleUpdate(makeUpdate(5, [{ col: 1, row: 0, rgb: [6, 6, 6] }]))).toBe(true);
  });

  it("reports malformed frames without throwing", () => {
    const errors: string[] = [];
    const v = new ViewerState(W, H, TILE, { onError: (m) => errors.push(m) });
    expect(v.handleUpdate(new Uint8Array([0x58, 0x58, 0, 0]))).toBe(false);
    expect(errors.length).toBe(1);
  });
});

describe("input capture", () => {
  it("coalesces a 1000 moves/s burst to at most 60 wire frames", () => {
    let clock = 0;
    const v = new ViewerState(W, H, TILE, { now: () => clock });
    const sent: Uint8Array[] = [];
    for (let i = 0; i < 1000; i++) {
      clock = i; // 1 move per ms
      sent.push(...v.mouseMove(i % W, (i * 3) % H));
    }
    clock = 1020;
    sent.push(...v.tick()); // trailing flush carries the final position
    expect(sent.length).toBeLessThanOrEqual(60);
    expect(sent.length).toBeGreaterThan(10);
    const last = sent[sent.length - 1]!;
    const view = new DataView(last.buffer, last.byteOffset);
    expect(view.getUint16(9)).toBe(999 % W);
    expect(view.getUint16(11)).toBe((999 * 3) % H);
  });

  it("flushes the pending move before a click so ordering is preserved", () => {
    let clock = 0;
    const v = new ViewerState(W, H, TILE, { now: () => clock });
    v.mouseMove(1, 1); // sent immediately
    clock = 5;
    expect(v.mouseMove(9, 9)).toEqual([]); // coalesced
    const frames = v.mouseDown(9, 9, 0);
    expect(frames.length).toBe(2);
    expect(frames[0]![0]).toBe(EventKind.MouseMove);
    expect(frames[1]![0]).toBe(EventKind.MouseDown);
    // Seq numbers stay strictly increasing across the flush.
    const seqOf = (f: Uint8Array) => Number(new DataView(f.buffer, f.byteOffset).getBigUint64(1));
    expect(seqOf(frames[1]!)).toBe(seqOf(frames[0]!) + 1);
  });

  it("drops unmapped keys and keeps seq numbering dense", () => {
    const v = new ViewerState(W, H, TILE);
    expect(v.keyDown("F13")).toEqual([]);
    const a = v.keyDown("a")[0]!;
    const b = v.keyUp("a")[0]!;
    const seqOf = (f: Uint8Array) => Number(new DataView(f.buffer, f.byteOffset).getBigUint64(1));
    expect(seqOf(a)).toBe(0);
    expect(seqOf(b)).toBe(1);
    const view = new DataView(a.buffer, a.byteOffset);
    expect(view.getUint16(9)).toBe(65);
  });

  it("tick is a no-op inside the rate window or with nothing pending", () => {
    let clock = 0;
    const v = new ViewerState(W, H, TILE, { now: () => clock });
    expect(v.tick()).toEqual([]);
    v.mouseMove(1, 1);
    clock = 5;
    v.mouseMove(2, 2);
    expect(v.tick()).toEqual([]); // still inside the window
    clock = 30;
    expect(v.tick().length).toBe(1);
    expect(v.tick()).toEqual([]); // pending cleared
  });
});

describe("framebuffer blit bounds", () => {
  it("rejects tiles outside the grid", () => {
    const fb = new Framebuffer(W, H);
    const frame = makeUpdate(0, [{ col: 2, row: 0, rgb: [1, 1, 1] }]);
    expect(() => fb.applyUpdate(decodeUpdate(frame, TILE), TILE)).toThrow(RangeError);
  });
});
