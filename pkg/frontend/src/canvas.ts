/** Thin browser paint adapter: framebuffer -> <canvas>. */

import { Framebuffer } from "./framebuffer.js";
import { Connection, ViewerOptions, connect } from "./viewer.js";

export function paint(fb: Framebuffer, ctx: CanvasRenderingContext2D): void {
  ctx.putImageData(new ImageData(fb.toRgba(), fb.width, fb.height), 0, 0);
}

/** Attach a live session to a canvas: paints updates, forwards input. */
export async function attach(
  canvas: HTMLCanvasElement,
  baseUrl: string,
  userId: string,
  opts: ViewerOptions = {},
): Promise<Connection> {
  const ctx = canvas.getContext("2d");
  if (ctx === null) {
    throw new Error("2d canvas context unavailable");
  }
  const conn = await connect(
    baseUrl,
    userId,
    { ...opts, onFrame: (fb) => paint(fb, ctx) },
    { width: canvas.width, height: canvas.height },
  );

  const pos = (ev: MouseEvent): { x: number; y: number } => {
    const rect = canvas.getBoundingClientRect();
    return {
      x: Math.max(0, Math.min(canvas.width - 1, Math.round(ev.clientX - rect.left))),
      y: Math.max(0, Math.min(canvas.height - 1, Math.round(ev.clientY - rect.top))),
    };
  };
  canvas.addEventListener("mousemove", (ev) => {
    const { x, y } = pos(ev);
    conn.send(conn.state.mouseMove(x, y));
  });
  canvas.addEventListener("mousedown", (ev) => {
    const { x, y } = pos(ev);
    conn.send(conn.state.mouseDown(x, y, ev.button));
  });
  canvas.addEventListener("mouseup", (ev) => {
    const { x, y } = pos(ev);
    conn.send(conn.state.mouseUp(x, y, ev.button));
  });
  canvas.addEventListener("keydown", (ev) => conn.send(conn.state.keyDown(ev.key)));
  canvas.addEventListener("keyup", (ev) => conn.send(conn.state.keyUp(ev.key)));
  return conn;
}
