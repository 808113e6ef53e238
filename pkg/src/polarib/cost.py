"""Implementation-cost proxies for the unrolled decoder.

Everything here is a count, not a hardware model. The pipeline assumption is
one schedule op per stage: the channel word is available at stage 0 and the
result of op ``p`` at stage ``p + 1``. A value produced at stage ``a`` and last
read by op ``l`` sits in a shift register of ``l - a`` stages.
"""
from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field

from .pft import Opcode, PftSchedule

FLOAT_BITS = 32

_G_OPS = (Opcode.G, Opcode.G0)


@dataclass(frozen=True)
class DomainConfig:
    """Arithmetic of one decoder: ``kind`` is ``float``, ``fp`` or ``ib``."""

    kind: str
    q_fp: int | None = None
    q_ib: int | None = None

    def __post_init__(self):
        if self.kind not in ("float", "fp", "ib"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == "fp" and not self.q_fp:
            raise ValueError("fp domain needs q_fp")
        if self.kind == "ib":
            if not (self.q_ib and self.q_fp):
                raise ValueError("ib domain needs q_ib and q_fp")
            if self.q_ib >= self.q_fp:
                raise ValueError("q_ib must be smaller than q_fp")

    @property
    def llr_bits(self) -> int:
        """Bits per stored LLR element."""
        if self.kind == "float":
            return FLOAT_BITS
        return self.q_ib if self.kind == "ib" else self.q_fp

    @property
    def label(self) -> str:
        if self.kind == "float":
            return "float"
        if self.kind == "fp":
            return f"fp{self.q_fp}"
        return f"ib{self.q_ib}/{self.q_fp}"

    @classmethod
    def parse(cls, text: str) -> "DomainConfig":
        """``float``, ``fp5`` or ``ib4/5`` (also ``ib4`` meaning ``ib4/5``)."""
        t = text.strip().lower()
        if t == "float":
            return cls("float")
        if t.startswith("fp") and t[2:].isdigit():
            return cls("fp", q_fp=int(t[2:]))
        if t.startswith("ib"):
            body = t[2:]
            if "/" in body:
                a, b = body.split("/", 1)
            else:
                a, b = body, ""
            if a.isdigit() and (b.isdigit() or b == ""):
                q_ib = int(a)
                return cls("ib", q_fp=int(b) if b else q_ib + 1, q_ib=q_ib)
        raise ValueError(f"cannot parse domain {text!r}; use float, fpQ or ibQ/QFP")


def naive_g_entries(q_ib: int) -> int:
    """Entries of a direct two-input g table (one per sign of beta)."""
    t = 1 << q_ib
    return 2 * t * t


def g_entries(q_ib: int, q_fp: int) -> tuple[int, int]:
    """(up, down) entries for one g processing element: two input up-LUTs,
    one output down-LUT, each indexed by magnitude only."""
    return 2 * (1 << (q_ib - 1)), 1 << (q_fp - 1)


def lut_cost(schedule: PftSchedule, q_ib: int, q_fp: int) -> dict[str, int]:
    """LUT entries over the unrolled schedule (one processing element per LLR).

    g/g0: two up-LUTs and one down-LUT per element. REP and h1 read every
    input through an up-LUT; h1 reads two (left and right halves) per output
    pair. f, SPC, h, h0 and leaves need none.
    """
    up_size = 1 << (q_ib - 1)
    up = down = 0
    for op in schedule.ops:
        if op.opcode in _G_OPS:
            u, d = g_entries(q_ib, q_fp)
            up += op.width * u
            down += op.width * d
        elif op.opcode is Opcode.REP:
            up += op.width * up_size
        elif op.opcode is Opcode.H1:
            up += op.width * up_size
    return {"up": up, "down": down, "total": up + down}


def delay_lines(schedule: PftSchedule) -> list[tuple[str, int, int, int]]:
    """Every stored value as ``(kind, id, width, stages)``; kind is
    ``alpha`` or ``beta``. Values consumed by the very next op have 0 stages."""
    avail_a = {0: 0}
    width_a = {0: schedule.N}
    last_a: dict[int, int] = {}
    avail_b: dict[int, int] = {}
    width_b: dict[int, int] = {}
    last_b: dict[int, int] = {}
    for p, op in enumerate(schedule.ops):
        if op.in_edge is not None:
            last_a[op.in_edge] = p
        for b in op.beta_in:
            last_b[b] = p
        if op.out_edge is not None:
            avail_a[op.out_edge] = p + 1
            width_a[op.out_edge] = op.width
        if op.beta_out is not None:
            avail_b[op.beta_out] = p + 1
            width_b[op.beta_out] = op.width
    lines = []
    for e in sorted(last_a):
        lines.append(("alpha", e, width_a[e], last_a[e] - avail_a[e]))
    for b in sorted(last_b):
        lines.append(("beta", b, width_b[b], last_b[b] - avail_b[b]))
    return lines


def register_cost(schedule: PftSchedule, domain: DomainConfig) -> dict[str, int]:
    """Delay-line register bits: width x bits-per-element x stages.

    LLR lines use the domain's stored width; partial sums are 1 bit.
    """
    alpha = beta = 0
    for kind, _, width, stages in delay_lines(schedule):
        if kind == "alpha":
            alpha += width * domain.llr_bits * stages
        else:
            beta += width * stages
    return {"alpha": alpha, "beta": beta, "total": alpha + beta}


@dataclass
class CostReport:
    """Cost counts of one schedule under one domain."""

    domain: DomainConfig
    op_counts: dict[str, int]
    lut_up: int
    lut_down: int
    register_alpha: int
    register_beta: int
    stages: int
    notes: list[str] = field(default_factory=list)

    @property
    def lut_entries(self) -> int:
        return self.lut_up + self.lut_down

    @property
    def register_bits(self) -> int:
        return self.register_alpha + self.register_beta

    def as_dict(self) -> dict[str, object]:
        d: dict[str, object] = {"domain": self.domain.label, "stages": self.stages,
                                "lut_up": self.lut_up, "lut_down": self.lut_down,
                                "lut_entries": self.lut_entries,
                                "register_alpha": self.register_alpha,
                                "register_beta": self.register_beta,
                                "register_bits": self.register_bits}
        for name in Opcode:
            d[f"ops_{name.value}"] = self.op_counts.get(name.value, 0)
        return d


def cost_report(schedule: PftSchedule, domain: DomainConfig) -> CostReport:
    counts = Counter(op.opcode.value for op in schedule.ops)
    if domain.kind == "ib":
        luts = lut_cost(schedule, domain.q_ib, domain.q_fp)
    else:
        luts = {"up": 0, "down": 0}
    regs = register_cost(schedule, domain)
    notes = ["one schedule op per pipeline stage; delay lines only"]
    if domain.kind == "ib":
        up, down = g_entries(domain.q_ib, domain.q_fp)
        notes.append(f"one g instance: naive {naive_g_entries(domain.q_ib)} entries, "
                     f"RCQ {up + down} entries (up {up} = 2 x {up // 2}, down {down})")
    return CostReport(domain, dict(counts), luts["up"], luts["down"],
                      regs["alpha"], regs["beta"], len(schedule.ops), notes)


def format_reports(reports: list[CostReport], fmt: str = "text") -> str:
    """Side-by-side text table, or CSV. With two or more domains, ratio
    columns relative to the first are appended to the text form."""
    rows = [r.as_dict() for r in reports]
    keys = list(rows[0]) if rows else []
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return buf.getvalue()
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    out = []
    header = ["metric"] + [r.domain.label for r in reports]
    if len(reports) > 1:
        header += [f"{r.domain.label}/{reports[0].domain.label}" for r in reports[1:]]
    table = [header]
    for k in keys[1:]:
        vals = [row[k] for row in rows]
        line = [k] + [str(v) for v in vals]
        if len(reports) > 1:
            base = vals[0]
            line += [f"{v / base:.3f}" if base else "-" for v in vals[1:]]
        table.append(line)
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    for r in table:
        out.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    seen = set()
    for r in reports:
        for n in r.notes:
            if n not in seen:
                seen.add(n)
                out.append(f"# {n}")
    return "\n".join(out) + "\n"
