"""IEEE-1364 value change dump export for traced kernel signals.

Timescale is 1 ps to match the kernel tick. The $date header is omitted
by default so identical runs produce byte-identical files.
"""

from __future__ import annotations

from typing import IO, Sequence

from .kernel import Signal

_ID_CHARS = "".join(chr(c) for c in range(33, 127))


def _vcd_id(index: int) -> str:
    out = ""
    index += 1
    while index:
        index, rem = divmod(index - 1, len(_ID_CHARS))
        out = _ID_CHARS[rem] + out
    return out


def write_vcd(
    out: IO[str],
    entries: Sequence[tuple[str, Signal]],
    scope: str = "link",
    version: str = "ledrlink",
    date: str | None = None,
) -> None:
    """Dump (display-name, signal) pairs; signals must have tracing on."""
    ids: dict[int, str] = {}
    out.write(f"$version {version} $end\n")
    if date is not None:
        out.write(f"$date {date} $end\n")
    out.write("$timescale 1ps $end\n")
    out.write(f"$scope module {scope} $end\n")
    for i, (name, sig) in enumerate(entries):
        if sig.trace is None:
            raise ValueError(f"signal {sig.name!r} has no trace recorded")
        ids[id(sig)] = _vcd_id(i)
        out.write(f"$var wire 1 {ids[id(sig)]} {name} $end\n")
    out.write("$upscope $end\n$enddefinitions $end\n")

    out.write("#0\n$dumpvars\n")
    for _name, sig in entries:
        out.write(f"{sig.trace_base}{ids[id(sig)]}\n")
    out.write("$end\n")

    changes: list[tuple[int, int, int, str]] = []
    for order, (_name, sig) in enumerate(entries):
        for seq, (t, v) in enumerate(sig.trace):
            changes.append((t, order, seq, f"{v}{ids[id(sig)]}\n"))
    changes.sort(key=lambda c: (c[0], c[1], c[2]))
    current = 0
    for t, _order, _seq, line in changes:
        if t != current:
            out.write(f"#{t}\n")
            current = t
        out.write(line)
