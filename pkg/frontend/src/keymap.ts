/** Map browser KeyboardEvent.key values to wire keycodes. */

const NAMED: Record<string, number> = {
  Enter: 13,
  Backspace: 8,
  Tab: 9,
  Escape: 27,
  " ": 32,
  ArrowLeft: 37,
  ArrowUp: 38,
  ArrowRight: 39,
  ArrowDown: 40,
  Shift: 16,
  Control: 17,
  Alt: 18,
  Delete: 46,
  Home: 36,
  End: 35,
  PageUp: 33,
  PageDown: 34,
};

/** Wire keycode for a browser key name, or null when the key is unmapped. */
export function keyToCode(key: string): number | null {
  const named = NAMED[key];
  if (named !== undefined) {
    return named;
  }
  if (key.length === 1) {
    const upper = key.toUpperCase();
    if (/^[A-Z0-9]$/.test(upper)) {
      return upper.charCodeAt(0);
    }
  }
  return null;
}
