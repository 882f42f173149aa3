export * from "./protocol.js";
export * from "./framebuffer.js";
export * from "./keymap.js";
export * from "./viewer.js";
export * from "./canvas.js";
