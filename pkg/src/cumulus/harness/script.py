"""Workload script parser.

Line-oriented: `AT <tick> <directive> [args...]`, `#` comments.

Directives:
    OPEN <name> <user_id> [consolidate|spread]
    CLOSE <name>
    EVENT <name> KEYDOWN <code> | KEYUP <code> | MOUSEMOVE <x> <y>
                 | MOUSEDOWN <x> <y> [btn] | MOUSEUP <x> <y> [btn]
    PUT <path> <size_bytes>
    GET <path> [<offset> <length>]
    KILL <node_id>
    REVIVE <node_id>
    END
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple


class ScriptError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


@dataclass(frozen=True)
class Directive:
    tick: int
    op: str
    args: Tuple[str, ...]
    lineno: int


_EVENT_ARGC = {"KEYDOWN": (1, 1), "KEYUP": (1, 1), "MOUSEMOVE": (2, 2),
               "MOUSEDOWN": (2, 3), "MOUSEUP": (2, 3)}
_ARGC = {"OPEN": (2, 3), "CLOSE": (1, 1), "PUT": (2, 2), "GET": (1, 3),
         "KILL": (1, 1), "REVIVE": (1, 1), "END": (0, 0)}


def parse_workload(text: str) -> List[Directive]:
    out: List[Directive] = []
    last_tick = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0].upper() != "AT" or len(parts) < 3:
            raise ScriptError(lineno, f"expected `AT <tick> <directive>`: {raw!r}")
        try:
            tick = int(parts[1])
        except ValueError:
            raise ScriptError(lineno, f"bad tick {parts[1]!r}") from None
        if tick < last_tick:
            raise ScriptError(lineno, f"tick {tick} goes backwards")
        last_tick = tick
        op = parts[2].upper()
        args = tuple(parts[3:])
        if op == "EVENT":
            if len(args) < 2:
                raise ScriptError(lineno, "EVENT needs a session name and kind")
            kind = args[1].upper()
            bounds = _EVENT_ARGC.get(kind)
            if bounds is None:
                raise ScriptError(lineno, f"unknown event kind {args[1]!r}")
            nargs = len(args) - 2
            if not bounds[0] <= nargs <= bounds[1]:
                raise ScriptError(lineno, f"{kind} takes {bounds[0]}..{bounds[1]} args")
            for a in args[2:]:
                if not a.lstrip("-").isdigit():
                    raise ScriptError(lineno, f"non-integer event arg {a!r}")
        elif op in _ARGC:
            lo, hi = _ARGC[op]
            if not lo <= len(args) <= hi:
                raise ScriptError(lineno, f"{op} takes {lo}..{hi} args, got {len(args)}")
            if op == "OPEN" and len(args) == 3 and args[2].lower() not in ("consolidate", "spread"):
                raise ScriptError(lineno, f"unknown policy {args[2]!r}")
        else:
            raise ScriptError(lineno, f"unknown directive {op!r}")
        out.append(Directive(tick=tick, op=op, args=args, lineno=lineno))
        if op == "END":
            break
    return out
