"""Polar factor tree pruning and the Fast-SSC operation schedule."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .code import PolarCode


class NodeKind(str, Enum):
    BRANCH = "Branch"
    RATE0 = "Rate0"
    RATE1 = "Rate1"
    REP = "Rep"
    SPC = "Spc"


class Opcode(str, Enum):
    F = "F"
    G = "G"
    G0 = "G0"
    H = "H"
    H0 = "H0"
    H1 = "H1"
    REP = "REP"
    SPC = "SPC"
    INFO_LEAF = "INFO_LEAF"
    FROZEN_LEAF = "FROZEN_LEAF"


@dataclass(frozen=True)
class NodeLimits:
    """Optional size caps for specialised nodes; ``None`` means unlimited."""

    max_rep: int | None = None
    max_spc: int | None = None


def classify(frozen_slice, limits: NodeLimits = NodeLimits()) -> NodeKind:
    """Node kind of a leaf span given its frozen flags (1 = frozen).

    REP needs its single information bit in the last position and SPC its
    single frozen bit in the first; other one-bit patterns are not repetition
    or parity codes and stay branches.
    """
    s = np.asarray(frozen_slice, dtype=np.uint8)
    size = s.size
    if size < 1:
        raise ValueError("empty span")
    n_frozen = int(s.sum())
    if n_frozen == size:
        return NodeKind.RATE0
    if n_frozen == 0:
        return NodeKind.RATE1
    if n_frozen == size - 1 and s[-1] == 0 and (limits.max_rep is None or size <= limits.max_rep):
        return NodeKind.REP
    if n_frozen == 1 and s[0] == 1 and (limits.max_spc is None or size <= limits.max_spc):
        return NodeKind.SPC
    return NodeKind.BRANCH


@dataclass
class PftNode:
    stage: int
    lo: int
    kind: NodeKind
    children: tuple["PftNode", "PftNode"] | None = None

    @property
    def size(self) -> int:
        return 1 << self.stage

    @property
    def leaf_span(self) -> tuple[int, int]:
        return (self.lo, self.lo + self.size)


def build_tree(frozen_mask, limits: NodeLimits = NodeLimits()) -> PftNode:
    mask = np.asarray(frozen_mask, dtype=np.uint8)

    def grow(lo: int, stage: int) -> PftNode:
        size = 1 << stage
        kind = classify(mask[lo:lo + size], limits)
        node = PftNode(stage, lo, kind)
        if kind is NodeKind.BRANCH:
            half = size // 2
            node.children = (grow(lo, stage - 1), grow(lo + half, stage - 1))
        return node

    return grow(0, int(np.log2(mask.size)))


@dataclass(frozen=True)
class ScheduleOp:
    """One decoder block.

    ``in_edge`` is the LLR edge read (``alpha^v``), ``out_edge`` the LLR edge
    written (F/G/G0 only). ``beta_in`` lists the partial-sum slots read and
    ``beta_out`` the slot written; slot ids are tree node ids.
    """

    opcode: Opcode
    width: int
    leaf_span: tuple[int, int]
    in_edge: int | None = None
    out_edge: int | None = None
    beta_in: tuple[int, ...] = ()
    beta_out: int | None = None


@dataclass(frozen=True)
class PftSchedule:
    ops: tuple[ScheduleOp, ...]
    edge_count: int
    root_beta: int | None
    N: int
    edge_width: tuple[int, ...] = field(default=())
    edge_producer: tuple[str, ...] = field(default=())
    edge_parent: tuple[int | None, ...] = field(default=())

    def opcodes(self) -> list[str]:
        return [op.opcode.value for op in self.ops]

    def dump(self) -> str:
        """Text listing ``idx opcode width leaf_span edge_ids``."""
        lines = []
        for i, op in enumerate(self.ops):
            edges = []
            if op.in_edge is not None:
                edges.append(f"in={op.in_edge}")
            if op.out_edge is not None:
                edges.append(f"out={op.out_edge}")
            lo, hi = op.leaf_span
            lines.append(f"{i} {op.opcode.value} {op.width} [{lo},{hi}) {' '.join(edges) or '-'}")
        return "\n".join(lines) + "\n"


def build_schedule(code: PolarCode, limits: NodeLimits = NodeLimits()) -> PftSchedule:
    """Depth-first Fast-SSC schedule of the pruned tree.

    Rate-0 left children fold into G0/H0, Rate-1 right children into H1. Edge
    0 is the channel; every F/G/G0 output gets the next edge id.
    """
    root = build_tree(code.frozen_mask, limits)
    ops: list[ScheduleOp] = []
    widths = [code.N]
    producer = ["channel"]
    parent: list[int | None] = [None]
    counter = {"node": 0}

    def new_edge(width: int, kind: str, src: int) -> int:
        widths.append(width)
        producer.append(kind)
        parent.append(src)
        return len(widths) - 1

    def new_slot() -> int:
        counter["node"] += 1
        return counter["node"] - 1

    def emit(node: PftNode, edge: int) -> int:
        slot = new_slot()
        span, size = node.leaf_span, node.size
        terminal = {
            NodeKind.RATE0: Opcode.FROZEN_LEAF,
            NodeKind.RATE1: Opcode.INFO_LEAF,
            NodeKind.REP: Opcode.REP,
            NodeKind.SPC: Opcode.SPC,
        }
        if node.kind in terminal:
            ops.append(ScheduleOp(terminal[node.kind], size, span, in_edge=edge, beta_out=slot))
            return slot
        left, right = node.children
        half = size // 2
        if left.kind is NodeKind.RATE0:
            if right.kind is NodeKind.RATE1:
                ops.append(ScheduleOp(Opcode.H1, size, span, in_edge=edge, beta_out=slot))
                return slot
            r_edge = new_edge(half, "G0", edge)
            ops.append(ScheduleOp(Opcode.G0, half, span, in_edge=edge, out_edge=r_edge))
            r_slot = emit(right, r_edge)
            ops.append(ScheduleOp(Opcode.H0, size, span, beta_in=(r_slot,), beta_out=slot))
            return slot
        l_edge = new_edge(half, "F", edge)
        ops.append(ScheduleOp(Opcode.F, half, span, in_edge=edge, out_edge=l_edge))
        l_slot = emit(left, l_edge)
        if right.kind is NodeKind.RATE1:
            ops.append(ScheduleOp(Opcode.H1, size, span, in_edge=edge, beta_in=(l_slot,), beta_out=slot))
            return slot
        r_edge = new_edge(half, "G", edge)
        ops.append(ScheduleOp(Opcode.G, half, span, in_edge=edge, out_edge=r_edge, beta_in=(l_slot,)))
        r_slot = emit(right, r_edge)
        ops.append(ScheduleOp(Opcode.H, size, span, beta_in=(l_slot, r_slot), beta_out=slot))
        return slot

    if root.kind is NodeKind.RATE0:
        # nothing to decode: the codeword estimate is all-zero
        return PftSchedule((), 1, None, code.N, (code.N,), ("channel",), (None,))
    root_slot = emit(root, 0)
    return PftSchedule(tuple(ops), len(widths), root_slot, code.N,
                       tuple(widths), tuple(producer), tuple(parent))
