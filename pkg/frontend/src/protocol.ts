/**
 * Binary wire codecs shared with the render host.
 *
 * Input events (big-endian): kind u8 | seq u64 | payload.
 *   Key events carry keycode u16; MouseMove carries x u16, y u16;
 *   MouseDown/MouseUp carry x u16, y u16, button u8.
 *
 * Updates (big-endian): magic "CU" | frame_seq u64 | tile_count u16 |
 *   per tile: tile_col u16, tile_row u16, mode u8, payload_len u32, payload.
 *   Tile size in pixels is session state, not carried per update.
 */

export enum EventKind {
  KeyDown = 0x01,
  KeyUp = 0x02,
  MouseMove = 0x03,
  MouseDown = 0x04,
  MouseUp = 0x05,
}

export type InputEvent =
  | { kind: EventKind.KeyDown | EventKind.KeyUp; seq: number; keycode: number }
  | { kind: EventKind.MouseMove; seq: number; x: number; y: number }
  | {
      kind: EventKind.MouseDown | EventKind.MouseUp;
      seq: number;
      x: number;
      y: number;
      button: number;
    };

export enum TileMode {
  Raw = 0,
  Rle = 1,
}

export interface TileUpdate {
  col: number;
  row: number;
  /** Decoded raw RGB pixels, tile*tile*3 bytes. */
  pixels: Uint8Array;
}

export interface UpdateMessage {
  frameSeq: number;
  tiles: TileUpdate[];
}

export class ProtocolError extends Error {}

const HEAD_SIZE = 9; // kind u8 + seq u64

export function encodeInputEvent(event: InputEvent): Uint8Array {
  let payloadSize: number;
  switch (event.kind) {
    case EventKind.KeyDown:
    case EventKind.KeyUp:
      payloadSize = 2;
      break;
    case EventKind.MouseMove:
      payloadSize = 4;
      break;
    default:
      payloadSize = 5;
  }
  const buf = new Uint8Array(HEAD_SIZE + payloadSize);
  const view = new DataView(buf.buffer);
  view.setUint8(0, event.kind);
  view.setBigUint64(1, BigInt(event.seq));
  switch (event.kind) {
    case EventKind.KeyDown:
    case EventKind.KeyUp:
      view.setUint16(HEAD_SIZE, event.keycode);
      break;
    case EventKind.MouseMove:
      view.setUint16(HEAD_SIZE, event.x);
      view.setUint16(HEAD_SIZE + 2, event.y);
      break;
    default:
      view.setUint16(HEAD_SIZE, event.x);
      view.setUint16(HEAD_SIZE + 2, event.y);
      view.setUint8(HEAD_SIZE + 4, event.button);
  }
  return buf;
}

function rleDecode(payload: Uint8Array, outLen: number): Uint8Array {
  if (payload.length % 5 !== 0) {
    throw new ProtocolError(`RLE payload length ${payload.length} not a multiple of 5`);
  }
  const out = new Uint8Array(outLen);
  let pos = 0;
  for (let k = 0; k < payload.length; k += 5) {
    const run = (payload[k]! << 8) | payload[k + 1]!;
    if (pos + run * 3 > outLen) {
      throw new ProtocolError("RLE payload overruns tile");
    }
    for (let i = 0; i < run; i++) {
      out[pos++] = payload[k + 2]!;
      out[pos++] = payload[k + 3]!;
      out[pos++] = payload[k + 4]!;
    }
  }
  if (pos !== outLen) {
    throw new ProtocolError(`RLE payload decodes to ${pos} bytes, want ${outLen}`);
  }
  return out;
}

export function decodeUpdate(buf: Uint8Array, tile: number): UpdateMessage {
  const headSize = 12; // "CU" + frame_seq u64 + tile_count u16
  if (buf.length < headSize) {
    throw new ProtocolError(`truncated header: ${buf.length} bytes`);
  }
  const view = new DataView(buf.buffer, buf.byteOffset, buf.byteLength);
  if (buf[0] !== 0x43 || buf[1] !== 0x55) {
    throw new ProtocolError("bad magic");
  }
  const frameSeq = Number(view.getBigUint64(2));
  const count = view.getUint16(10);
  const tileBytes = tile * tile * 3;
  const tiles: TileUpdate[] = [];
  let off = headSize;
  for (let i = 0; i < count; i++) {
    if (buf.length - off < 9) {
      throw new ProtocolError("truncated tile header");
    }
    const col = view.getUint16(off);
    const row = view.getUint16(off + 2);
    const mode = view.getUint8(off + 4);
    const plen = view.getUint32(off + 5);
    off += 9;
    if (buf.length - off < plen) {
      throw new ProtocolError("truncated tile payload");
    }
    const payload = buf.subarray(off, off + plen);
    off += plen;
    let pixels: Uint8Array;
    if (mode === TileMode.Raw) {
      if (plen !== tileBytes) {
        throw new ProtocolError(`raw payload ${plen} bytes, want ${tileBytes}`);
      }
      pixels = payload;
    } else if (mode === TileMode.Rle) {
      pixels = rleDecode(payload, tileBytes);
    } else {
      throw new ProtocolError(`unknown tile mode ${mode}`);
    }
    tiles.push({ col, row, pixels });
  }
  if (off !== buf.length) {
    throw new ProtocolError(`${buf.length - off} trailing bytes`);
  }
  return { frameSeq, tiles };
}
