/**
 * Viewer session logic: server update stream in, input event frames out.
 *
 * Pure state machine — transport and timers are injected so the logic is
 * testable without a browser. `connect` wires it to fetch + WebSocket.
 */

import { Framebuffer } from "./framebuffer.js";
import {
  EventKind,
  InputEvent,
  ProtocolError,
  decodeUpdate,
  encodeInputEvent,
} from "./protocol.js";
import { keyToCode } from "./keymap.js";

type DistributiveOmit<T, K extends PropertyKey> = T extends unknown ? Omit<T, K> : never;

export interface ViewerOptions {
  /** Minimum ms between mouse-move sends; default caps moves at 60/s. */
  moveIntervalMs?: number;
  now?: () => number;
  onFrame?: (fb: Framebuffer) => void;
  onError?: (message: string) => void;
  /** Called when a frame_seq gap is detected and a full resync is needed. */
  requestResync?: () => void;
}

export class ViewerState {
  readonly framebuffer: Framebuffer;
  readonly tile: number;
  lastFrameSeq: number | null = null;
  awaitingResync = false;

  private nextEventSeq = 0;
  private pendingMove: { x: number; y: number } | null = null;
  private lastMoveSentAt = -Infinity;
  private readonly moveIntervalMs: number;
  private readonly now: () => number;
  private readonly opts: ViewerOptions;

  constructor(width: number, height: number, tile: number, opts: ViewerOptions = {}) {
    this.framebuffer = new Framebuffer(width, height);
    this.tile = tile;
    this.moveIntervalMs = opts.moveIntervalMs ?? 1000 / 60;
    this.now = opts.now ?? (() => Date.now());
    this.opts = opts;
  }

  /**
   * Feed one wire frame from the server. Returns true when the frame was
   * applied to the framebuffer, false when it was dropped (stale, or a
   * delta arriving while a resync is pending).
   */
  handleUpdate(frame: Uint8Array): boolean {
    let update;
    try {
      update = decodeUpdate(frame, this.tile);
    } catch (err) {
      if (err instanceof ProtocolError) {
        this.opts.onError?.(err.message);
        return false;
      }
      throw err;
    }
    const cols = Math.floor(this.framebuffer.width / this.tile);
    const rows = Math.floor(this.framebuffer.height / this.tile);
    const isFullFrame = update.tiles.length === cols * rows;

    if (this.lastFrameSeq !== null && update.frameSeq <= this.lastFrameSeq) {
      return false; // stale or duplicate
    }
    if (
      this.lastFrameSeq !== null &&
      update.frameSeq !== this.lastFrameSeq + 1 &&
      !isFullFrame
    ) {
      // Gap: a delta against a frame we never saw cannot be applied.
      if (!this.awaitingResync) {
        this.awaitingResync = true;
        this.opts.requestResync?.();
      }
      return false;
    }
    if (this.awaitingResync && !isFullFrame) {
      return false;
    }
    this.framebuffer.applyUpdate(update, this.tile);
    this.lastFrameSeq = update.frameSeq;
    this.awaitingResync = false;
    this.opts.onFrame?.(this.framebuffer);
    return true;
  }

  private encode(partial: DistributiveOmit<InputEvent, "seq">): Uint8Array {
    const event = { ...partial, seq: this.nextEventSeq++ } as InputEvent;
    return encodeInputEvent(event);
  }

  private flushPendingMove(out: Uint8Array[]): void {
    if (this.pendingMove !== null) {
      out.push(this.encode({ kind: EventKind.MouseMove, ...this.pendingMove }));
      this.pendingMove = null;
      this.lastMoveSentAt = this.now();
    }
  }

  keyDown(key: string): Uint8Array[] {
    return this.keyEvent(EventKind.KeyDown, key);
  }

  keyUp(key: string): Uint8Array[] {
    return this.keyEvent(EventKind.KeyUp, key);
  }

  private keyEvent(kind: EventKind.KeyDown | EventKind.KeyUp, key: string): Uint8Array[] {
    const keycode = keyToCode(key);
    if (keycode === null) {
      return [];
    }
    const out: Uint8Array[] = [];
    this.flushPendingMove(out);
    out.push(this.encode({ kind, keycode }));
    return out;
  }

  /** Coalesces bursts: at most one MouseMove per moveIntervalMs on the wire. */
  mouseMove(x: number, y: number): Uint8Array[] {
    if (this.now() - this.lastMoveSentAt < this.moveIntervalMs) {
      this.pendingMove = { x, y };
      return [];
    }
    this.pendingMove = null;
    this.lastMoveSentAt = this.now();
    return [this.encode({ kind: EventKind.MouseMove, x, y })];
  }

  mouseDown(x: number, y: number, button: number): Uint8Array[] {
    return this.buttonEvent(EventKind.MouseDown, x, y, button);
  }

  mouseUp(x: number, y: number, button: number): Uint8Array[] {
    return this.buttonEvent(EventKind.MouseUp, x, y, button);
  }

  private buttonEvent(
    kind: EventKind.MouseDown | EventKind.MouseUp,
    x: number,
    y: number,
    button: number,
  ): Uint8Array[] {
    const out: Uint8Array[] = [];
    this.flushPendingMove(out);
    out.push(this.encode({ kind, x, y, button }));
    return out;
  }

  /** Timer hook: emits a coalesced move once the rate window has passed. */
  tick(): Uint8Array[] {
    if (this.pendingMove === null || this.now() - this.lastMoveSentAt < this.moveIntervalMs) {
      return [];
    }
    const out: Uint8Array[] = [];
    this.flushPendingMove(out);
    return out;
  }
}

export interface SessionInfo {
  session_id: string;
  width: number;
  height: number;
  tile: number;
  host_node: string;
}

export interface Connection {
  state: ViewerState;
  session: SessionInfo;
  socket: WebSocket;
  send(frames: Uint8Array[]): void;
  close(): void;
}

/** Open a session at the gateway and attach its update stream. */
export async function connect(
  baseUrl: string,
  userId: string,
  opts: ViewerOptions = {},
  geometry: { width: number; height: number } = { width: 640, height: 480 },
): Promise<Connection> {
  let response: Response;
  try {
    response = await fetch(`${baseUrl}/sessions`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ user_id: userId, ...geometry }),
    });
  } catch (err) {
    opts.onError?.(`gateway unreachable: ${String(err)}`);
    throw err;
  }
  if (!response.ok) {
    const message = `session open failed: HTTP ${response.status}`;
    opts.onError?.(message);
    throw new Error(message);
  }
  const session = (await response.json()) as SessionInfo;
  const state = new ViewerState(session.width, session.height, session.tile, opts);

  const wsUrl =
    baseUrl.replace(/^http/, "ws") + `/sessions/${session.session_id}/stream`;
  const socket = new WebSocket(wsUrl);
  socket.binaryType = "arraybuffer";
  socket.onmessage = (ev: MessageEvent) => {
    state.handleUpdate(new Uint8Array(ev.data as ArrayBuffer));
  };
  socket.onerror = () => opts.onError?.("stream error");

  const send = (frames: Uint8Array[]) => {
    for (const frame of frames) {
      socket.send(frame);
    }
  };
  const timer = setInterval(() => send(state.tick()), 1000 / 60);
  return {
    state,
    session,
    socket,
    send,
    close: () => {
      clearInterval(timer);
      socket.close();
    },
  };
}
