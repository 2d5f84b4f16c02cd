"""Stage-structured bit tuples encoding active sets.

A tuple for horizon ``N`` has ``N`` stage blocks of ``qX + qU`` bits followed
by a terminal block of ``qT`` bits.  Its text form separates blocks with dots,
e.g. ``100000.100000.0000``.  Bit ``i`` (1-based) is set iff constraint ``i``
is active.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import total_ordering

from .errors import (BadStageCount, IndexOutOfRange, LengthMismatch,
                     NotPersistentForm)
from .lqcore import StageLayout

FORWARD = "forward"
BACKWARD = "backward"


@total_ordering
@dataclass(frozen=True)
class ActiveSetTuple:
    bits: tuple
    layout: StageLayout
    order: str = FORWARD

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        if len(bits) != self.layout.q:
            raise LengthMismatch(f"expected {self.layout.q} bits, got {len(bits)}")
        object.__setattr__(self, "bits", bits)

    # -- construction -----------------------------------------------------
    @classmethod
    def zeros(cls, layout: StageLayout) -> "ActiveSetTuple":
        return cls((0,) * layout.q, layout)

    @classmethod
    def parse(cls, text: str, layout: StageLayout, order=None) -> "ActiveSetTuple":
        """Parse the dotted text form; the horizon is read from the text.

        Without an explicit ``order`` a leading block of terminal width marks
        backward order.
        """
        blocks = text.strip().split(".")
        width, qT = layout.stage_width, layout.qT
        if len(blocks) < 2:
            raise LengthMismatch(f"{text!r} has no terminal block")
        if order is None:
            order = BACKWARD if (len(blocks[0]) == qT and len(blocks[-1]) == width
                                 and qT != width) else FORWARD
        if order == BACKWARD:
            stage_blocks, terminal = blocks[1:], blocks[0]
        else:
            stage_blocks, terminal = blocks[:-1], blocks[-1]
        if any(len(b) != width for b in stage_blocks) or len(terminal) != qT:
            raise LengthMismatch(f"{text!r} does not match stage width {width} / terminal {qT}")
        lay = layout.with_horizon(len(stage_blocks))
        return cls(tuple(int(c) for c in "".join(blocks)), lay, order)

    # -- views ---------------------------------------------------------------
    @property
    def N(self) -> int:
        return self.layout.N

    def stage(self, k: int) -> tuple:
        """Bits of stage ``k`` (``k == N`` gives the terminal block)."""
        w = self.layout.stage_width
        if self.order == FORWARD:
            start = k * w
            return self.bits[start:start + (self.layout.qT if k == self.N else w)]
        qT = self.layout.qT
        if k == self.N:
            return self.bits[:qT]
        start = qT + (self.N - 1 - k) * w
        return self.bits[start:start + w]

    @property
    def terminal(self) -> tuple:
        return self.stage(self.N)

    @property
    def count(self) -> int:
        return sum(self.bits)

    def blocks(self):
        if self.order == FORWARD:
            return [self.stage(k) for k in range(self.N + 1)]
        return [self.stage(k) for k in range(self.N, -1, -1)]

    def __str__(self) -> str:
        return ".".join("".join(map(str, b)) for b in self.blocks())

    def __repr__(self) -> str:
        return f"ActiveSetTuple({str(self)!r})"

    def __lt__(self, other):
        if not isinstance(other, ActiveSetTuple):
            return NotImplemented
        return (len(self.bits), self.bits) < (len(other.bits), other.bits)

    @property
    def mask(self) -> int:
        """Bit ``i`` of the integer is set iff row ``i`` (0-based) is active."""
        return sum(1 << i for i, b in enumerate(self.bits) if b)

    def rows(self) -> list:
        """0-based indices of the active rows."""
        return [i for i, b in enumerate(self.bits) if b]


def from_indices(idx, layout: StageLayout) -> ActiveSetTuple:
    q = layout.q
    bits = [0] * q
    for i in idx:
        if not 1 <= i <= q:
            raise IndexOutOfRange(f"index {i} outside 1..{q}")
        bits[i - 1] = 1
    return ActiveSetTuple(tuple(bits), layout)


def to_indices(a: ActiveSetTuple) -> set:
    return {i + 1 for i, b in enumerate(a.bits) if b}


def from_rows(rows, layout: StageLayout) -> ActiveSetTuple:
    return from_indices([r + 1 for r in rows], layout)


def _require_forward(a):
    if a.order != FORWARD:
        raise ValueError("operation defined on forward-order tuples only")


def concat(prefix, a: ActiveSetTuple) -> ActiveSetTuple:
    """Prepend one stage block, giving a tuple for horizon ``N + 1``."""
    _require_forward(a)
    prefix = tuple(int(b) for b in prefix)
    if len(prefix) != a.layout.stage_width:
        raise LengthMismatch(f"prefix must have {a.layout.stage_width} bits, got {len(prefix)}")
    return ActiveSetTuple(prefix + a.bits, a.layout.with_horizon(a.N + 1))


def drop_stages(a: ActiveSetTuple, l: int) -> ActiveSetTuple:
    """Remove the leading ``l`` stages (shrinking horizon)."""
    _require_forward(a)
    if not 0 <= l <= a.N - 1:
        raise BadStageCount(f"can drop 0..{a.N - 1} stages, not {l}")
    return ActiveSetTuple(a.bits[l * a.layout.stage_width:], a.layout.with_horizon(a.N - l))


def is_persistent_form(a: ActiveSetTuple) -> bool:
    return not any(a.terminal)


def pad_with_zero_stages(a: ActiveSetTuple, l: int) -> ActiveSetTuple:
    """Insert ``l`` inactive stages in front of the (inactive) terminal block."""
    _require_forward(a)
    if l < 0:
        raise BadStageCount("cannot pad a negative number of stages")
    if not is_persistent_form(a):
        raise NotPersistentForm(str(a))
    w, qT = a.layout.stage_width, a.layout.qT
    body = a.bits[:a.N * w]
    return ActiveSetTuple(body + (0,) * (l * w) + (0,) * qT, a.layout.with_horizon(a.N + l))


def strip_zero_stages(a: ActiveSetTuple, l: int):
    """Inverse of :func:`pad_with_zero_stages`; ``None`` if the tail is not zero."""
    _require_forward(a)
    if not 0 <= l <= a.N - 1:
        raise BadStageCount(f"can strip 0..{a.N - 1} stages, not {l}")
    w, qT = a.layout.stage_width, a.layout.qT
    keep = (a.N - l) * w
    if any(a.bits[keep:]):
        return None
    return ActiveSetTuple(a.bits[:keep] + (0,) * qT, a.layout.with_horizon(a.N - l))


def persistent_offspring(a: ActiveSetTuple) -> list:
    """Same-horizon tuples obtained by shifting stages left and zero-filling.

    For ``l = 1..N-1`` the leading ``l`` stages are dropped and ``l`` inactive
    stages are appended.  Duplicates and copies of ``a`` itself are omitted.
    """
    if not is_persistent_form(a):
        raise NotPersistentForm(str(a))
    out = []
    seen = {a}
    for l in range(1, a.N):
        child = pad_with_zero_stages(drop_stages(a, l), l)
        if child not in seen:
            seen.add(child)
            out.append(child)
    return out


def is_outmost(a: ActiveSetTuple) -> bool:
    """Persistent form with a nonzero last stage."""
    return is_persistent_form(a) and any(a.stage(a.N - 1))


def to_backward_order(a: ActiveSetTuple) -> ActiveSetTuple:
    """Reverse the sequence of blocks (terminal block first); an involution."""
    blocks = a.blocks()[::-1]
    bits = tuple(b for block in blocks for b in block)
    return ActiveSetTuple(bits, a.layout, BACKWARD if a.order == FORWARD else FORWARD)


from_backward_order = to_backward_order
