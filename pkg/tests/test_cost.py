import numpy as np
import pytest

from polarib.code import PolarCode, construct_code
from polarib.cost import (
    DomainConfig, cost_report, delay_lines, format_reports, g_entries, lut_cost,
    naive_g_entries, register_cost,
)
from polarib.pft import Opcode, build_schedule


def p16_8():
    mask = np.zeros(16, dtype=np.uint8)
    mask[[0, 1, 2, 3, 4, 8, 9, 10]] = 1
    return build_schedule(PolarCode(4, 8, mask))


def test_single_g_instance():
    assert naive_g_entries(4) == 512
    up, down = g_entries(4, 5)
    assert (up, down) == (16, 16)
    assert up + down == 32
    # degenerate widths still follow the formulas
    assert g_entries(5, 5) == (32, 16)


def test_lut_cost_counts_only_g_rep_h1():
    sched = p16_8()
    luts = lut_cost(sched, 4, 5)
    widths = {op.opcode: op.width for op in sched.ops if op.opcode is not Opcode.F}
    g_width = widths[Opcode.G] + widths[Opcode.G0]
    expected_up = g_width * 16 + widths[Opcode.REP] * 8 + widths[Opcode.H1] * 8
    assert luts == {"up": expected_up, "down": g_width * 16, "total": expected_up + g_width * 16}


def test_f_spc_and_leaves_need_no_luts():
    # a parity check works on IB indices directly
    spc = build_schedule(PolarCode(3, 7, np.array([1, 0, 0, 0, 0, 0, 0, 0], dtype=np.uint8)))
    assert spc.opcodes() == ["SPC"]
    assert lut_cost(spc, 4, 5)["total"] == 0
    # a length-2 repetition code only pays for its input up-tables
    sched = build_schedule(PolarCode(1, 1, np.array([1, 0], dtype=np.uint8)))
    assert sched.opcodes() == ["REP"]
    assert lut_cost(sched, 4, 5) == {"up": 16, "down": 0, "total": 16}


def test_fig3_delay_lines():
    lines = {(kind, ident): stages for kind, ident, _, stages in delay_lines(p16_8())}
    # channel word waits across the left subtree for the root G
    assert lines[("alpha", 0)] == 4
    # the root G output waits across F and REP for H1
    assert lines[("alpha", 3)] == 2
    # left partial sum waits for the root H
    assert lines[("beta", 1)] == 4


def test_register_ratio_and_beta_width():
    sched = construct_code(7, 64, 2.5)
    sched = build_schedule(sched)
    ib = register_cost(sched, DomainConfig("ib", q_fp=5, q_ib=4))
    fp = register_cost(sched, DomainConfig("fp", q_fp=5))
    assert ib["alpha"] * 5 == fp["alpha"] * 4
    assert ib["beta"] == fp["beta"]
    assert ib["total"] < fp["total"]


def test_monotone_in_q_fp():
    sched = build_schedule(construct_code(7, 64, 2.5))
    prev = None
    for q in range(3, 9):
        rep = cost_report(sched, DomainConfig("fp", q_fp=q))
        luts = lut_cost(sched, 2, q)
        cur = (rep.register_alpha, rep.register_beta, luts["up"], luts["down"])
        if prev is not None:
            assert all(c >= p for c, p in zip(cur, prev))
        prev = cur


def test_report_fields():
    sched = p16_8()
    fp = cost_report(sched, DomainConfig.parse("fp5"))
    assert fp.lut_entries == 0
    assert fp.op_counts["F"] == 2 and fp.stages == 9
    ib = cost_report(sched, DomainConfig.parse("ib4/5"))
    assert any("naive 512" in n and "RCQ 32" in n for n in ib.notes)
    assert all(v >= 0 for k, v in ib.as_dict().items() if k != "domain")
    text = format_reports([fp, ib])
    assert "ib4/5/fp5" in text.splitlines()[0]
    csv = format_reports([fp, ib], "csv")
    assert csv.splitlines()[0].startswith("domain,")
    assert len(csv.splitlines()) == 3


@pytest.mark.parametrize("text", ["fp", "ib5/4", "ib4/4", "fixed", "fpx"])
def test_domain_parse_errors(text):
    with pytest.raises(ValueError):
        DomainConfig.parse(text)


def test_domain_parse():
    assert DomainConfig.parse("ib4") == DomainConfig("ib", q_fp=5, q_ib=4)
    assert DomainConfig.parse("float").llr_bits == 32
