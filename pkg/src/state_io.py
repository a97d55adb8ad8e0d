"""
Text format for states:

    kind density|pure
    layout A:2 B:2 R:2
    <row 0 entries>
    ...

Entries are `re,im` pairs separated by single spaces, written with float.hex
so a write/read cycle is exact. Readers also take plain decimal floats.
"""
from pathlib import Path
from typing import Union

import numpy as np

from .errors import StateFormatError
from .states import DensityOperator, PureState
from .tensor_core import Operator, SubsystemLayout

State = Union[DensityOperator, PureState]


def _fmt(z: complex) -> str:
    return f"{float(z.real).hex()},{float(z.imag).hex()}"


def _parse_float(token: str) -> float:
    t = token.strip()
    if t.lower().lstrip("+-").startswith("0x"):
        return float.fromhex(t)
    return float(t)


def _parse_row(line: str, lineno: int) -> list:
    out = []
    for tok in line.split():
        parts = tok.split(",")
        if len(parts) != 2:
            raise StateFormatError(f"Line {lineno}: entry {tok!r} is not a re,im pair")
        try:
            out.append(complex(_parse_float(parts[0]), _parse_float(parts[1])))
        except ValueError:
            raise StateFormatError(f"Line {lineno}: cannot parse {tok!r}") from None
    return out


def _parse_layout(line: str) -> SubsystemLayout:
    head, _, rest = line.partition(" ")
    if head != "layout":
        raise StateFormatError(f"Expected a 'layout' line, got {line!r}")
    pairs = []
    for tok in rest.split():
        label, sep, dim = tok.rpartition(":")
        if not sep or not label:
            raise StateFormatError(f"Bad layout entry {tok!r}; expected label:dim")
        try:
            pairs.append((label, int(dim)))
        except ValueError:
            raise StateFormatError(f"Bad dimension in {tok!r}") from None
    return SubsystemLayout(tuple(pairs))


def state_to_bytes(state: State) -> bytes:
    if isinstance(state, PureState):
        kind, rows = "pure", [state.amplitudes]
    else:
        kind, rows = "density", list(state.entries)
    lines = [f"kind {kind}", f"layout {state.layout}"]
    lines += [" ".join(_fmt(z) for z in row) for row in rows]
    return ("\n".join(lines) + "\n").encode("utf-8")


def state_from_bytes(data: bytes) -> State:
    lines = [ln.strip() for ln in data.decode("utf-8").splitlines() if ln.strip()]
    if len(lines) < 2:
        raise StateFormatError("State text needs a kind line and a layout line")
    kind = lines[0].partition(" ")[2].strip()
    if not lines[0].startswith("kind ") or kind not in ("density", "pure"):
        raise StateFormatError(f"Unknown kind line {lines[0]!r}")
    layout = _parse_layout(lines[1])
    rows = [_parse_row(ln, i + 3) for i, ln in enumerate(lines[2:])]
    d = layout.total_dim

    if kind == "pure":
        if len(rows) != 1 or len(rows[0]) != d:
            raise StateFormatError(f"A pure state on [{layout}] needs one line of {d} amplitudes")
        return PureState(layout, np.array(rows[0]))
    if len(rows) != d or any(len(r) != d for r in rows):
        raise StateFormatError(f"A density on [{layout}] needs {d} rows of {d} entries")
    return DensityOperator(Operator(layout, np.array(rows)))


def write_state(state: State, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(state_to_bytes(state))
    return path


def read_state(path) -> State:
    return state_from_bytes(Path(path).read_bytes())
