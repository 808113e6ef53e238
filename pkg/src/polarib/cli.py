"""``polarib`` command-line front end.

Exit codes: 0 success, 2 usage error, 1 runtime failure.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import logging
import sys
from pathlib import Path

import numpy as np

from .code import construct_code, encode, load_frozen_file, save_frozen_file
from .cost import DomainConfig, cost_report, format_reports
from .decoder import FastSSCDecoder
from .ib import DEFAULT_HEADROOM
from .pft import build_schedule

log = logging.getLogger("polarib")


class UsageError(Exception):
    """Bad arguments; reported with exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--workers", type=_positive_int, default=1,
                        help="worker processes; never changes results (default 1)")
    common.add_argument("--out", default="-", help="output file, '-' for stdout")

    p = _Parser(prog="polarib", description="Polar codes with Fast-SSC decoding in "
                "float, fixed-point and information-bottleneck domains.", parents=[common])
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    c = sub.add_parser("construct", parents=[common], help="write a frozen-set file")
    c.add_argument("--n", type=int, required=True, help="log2 of the code length")
    c.add_argument("--k", type=int, required=True, help="information bits")
    c.add_argument("--design-ebn0", type=float, default=0.0, help="construction Eb/N0 in dB")

    e = sub.add_parser("encode", parents=[common], help="encode info words (one 0/1 string per line)")
    e.add_argument("code_file")
    e.add_argument("input", help="info-word file, '-' for stdin")

    d = sub.add_parser("decode", parents=[common], help="decode LLR words (one frame per line)")
    d.add_argument("code_file")
    d.add_argument("input", help="LLR file, '-' for stdin")
    _domain_args(d)

    g = sub.add_parser("design-luts", parents=[common], help="design an IB LutSet")
    g.add_argument("code_file")
    g.add_argument("--q-ib", type=int, default=4)
    g.add_argument("--q-fp", type=int, default=5)
    g.add_argument("--q-fine", type=int, default=10)
    g.add_argument("--ebn0", type=float, default=None, help="design Eb/N0 in dB")
    g.add_argument("--samples", type=_positive_int, default=100_000, help="samples per edge")
    g.add_argument("--headroom", type=float, default=DEFAULT_HEADROOM,
                   help="compute-domain range over the top channel level")
    g.add_argument("--channel-model", choices=("exact", "sampled"), default="exact",
                   help="channel-edge statistics: Gaussian law or Monte Carlo histogram")

    s = sub.add_parser("simulate", parents=[common], help="Monte Carlo FER sweep, CSV output")
    s.add_argument("code_file")
    _domain_args(s)
    s.add_argument("--ebn0", type=_float_list, required=True, help="Eb/N0 list in dB, e.g. '3,3.5,4'")
    s.add_argument("--min-errors", type=_positive_int, default=100)
    s.add_argument("--max-frames", type=_positive_int, default=None)
    s.add_argument("--batch-size", type=_positive_int, default=10_000)
    s.add_argument("--all-zero", action="store_true", help="send the all-zero codeword only (optimistic for fixed point: zero ties decide 0)")
    s.add_argument("--gnuplot", action="store_true", help="whitespace-separated data instead of CSV")

    r = sub.add_parser("cost-report", parents=[common], help="LUT and register counts")
    r.add_argument("code_file")
    r.add_argument("--domains", default="fp5,ib4/5",
                   help="comma list of float, fpQ, ibQ/QFP (default fp5,ib4/5)")
    r.add_argument("--format", choices=["text", "csv"], default="text")
    return p


def _domain_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--domain", default="float", help="float, fpQ or ib (default float)")
    p.add_argument("--lut-file", default=None, help="LutSet file; required for the ib domain")
    p.add_argument("--design-ebn0", type=float, default=None,
                   help="design Eb/N0 that sets the fixed-point channel step")
    p.add_argument("--channel-step", type=float, default=None, help="explicit fixed-point LSB")


@contextlib.contextmanager
def _output(path: str, binary: bool = False):
    if path == "-":
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", newline="") as f:
            yield f


def _read_text(path: str) -> str:
    return sys.stdin.read() if path == "-" else Path(path).read_text()


def _load_code(path: str):
    try:
        return load_frozen_file(path)
    except FileNotFoundError:
        raise UsageError(f"code file not found: {path}") from None


def _echo(args: argparse.Namespace) -> None:
    """Effective configuration on stderr, so stdout stays machine-readable."""
    items = {k: v for k, v in sorted(vars(args).items())}
    print("# config " + " ".join(f"{k}={v}" for k, v in items.items()), file=sys.stderr)


def _make_decoder(args, code) -> FastSSCDecoder:
    spec = args.domain.strip().lower()
    if spec == "ib" or spec.startswith("ib"):
        if args.lut_file is None:
            raise UsageError("the ib domain needs --lut-file")
        from .ib import LutSet
        try:
            lutset = LutSet.load(args.lut_file)
        except FileNotFoundError:
            raise UsageError(f"lut file not found: {args.lut_file}") from None
        return FastSSCDecoder(code, "ib", lutset=lutset, q_fp=lutset.q_fp,
                              q_ib=lutset.q_ib).fit()
    if args.lut_file is not None:
        raise UsageError("--lut-file only applies to the ib domain")
    if spec == "float":
        return FastSSCDecoder(code, "float").fit()
    if spec.startswith("fp") and spec[2:].isdigit() and int(spec[2:]) >= 2:
        return FastSSCDecoder(code, "fp", q_fp=int(spec[2:]), channel_step=args.channel_step,
                              design_ebn0_db=args.design_ebn0).fit()
    raise UsageError(f"unknown domain {args.domain!r}; use float, fpQ or ib")


def cmd_construct(args) -> None:
    if args.n < 1 or not 0 <= args.k <= (1 << args.n):
        raise UsageError(f"need n >= 1 and 0 <= k <= 2^n, got n={args.n}, k={args.k}")
    code = construct_code(args.n, args.k, args.design_ebn0)
    if args.out == "-":
        buf = io.StringIO()
        mask = "".join(str(int(b)) for b in code.frozen_mask)
        buf.write(f"{code.N} {code.k}\n{mask}\n")
        sys.stdout.write(buf.getvalue())
    else:
        save_frozen_file(code, args.out)


def _bit_rows(text: str, width: int, what: str) -> np.ndarray:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    out = np.zeros((len(rows), width), dtype=np.uint8)
    for i, ln in enumerate(rows):
        s = ln.replace(" ", "")
        if len(s) != width or set(s) - {"0", "1"}:
            raise UsageError(f"{what} line {i + 1}: expected {width} bits")
        out[i] = np.frombuffer(s.encode(), dtype=np.uint8) - ord("0")
    return out


def cmd_encode(args) -> None:
    code = _load_code(args.code_file)
    u = _bit_rows(_read_text(args.input), code.k, "info word")
    x = encode(code, u) if len(u) else np.zeros((0, code.N), dtype=np.uint8)
    with _output(args.out) as f:
        for row in x:
            f.write("".join(map(str, row)) + "\n")


def cmd_decode(args) -> None:
    code = _load_code(args.code_file)
    dec = _make_decoder(args, code)
    text = _read_text(args.input)
    try:
        rows = [np.array(ln.replace(",", " ").split(), dtype=float)
                for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    except ValueError as exc:
        raise UsageError(f"bad LLR input: {exc}") from None
    if any(r.size != code.N for r in rows):
        raise UsageError(f"every LLR line needs {code.N} values")
    with _output(args.out) as f:
        if rows:
            u_hat, _ = dec.decode(np.vstack(rows))
            for row in u_hat:
                f.write("".join(map(str, row)) + "\n")


def cmd_design_luts(args) -> None:
    from .ib import design_pass
    from .sim import default_design_ebn0

    if not 2 <= args.q_ib < args.q_fp:
        raise UsageError("need 2 <= q_ib < q_fp")
    if args.q_fine < args.q_ib:
        raise UsageError("q_fine must be at least q_ib")
    code = _load_code(args.code_file)
    ebn0 = default_design_ebn0(code) if args.ebn0 is None else args.ebn0
    sched = build_schedule(code)
    if args.samples < 100_000:
        log.warning("%d samples per edge is below the recommended 100000", args.samples)
    if args.headroom < 1.0:
        raise UsageError("--headroom must be >= 1")
    lutset, designs = design_pass(code, sched, ebn0, args.q_ib, args.q_fp, args.q_fine,
                                  args.samples, args.seed, headroom=args.headroom,
                                  channel_model=args.channel_model)
    lutset.check()
    with _output(args.out) as f:
        f.write(lutset.dumps())
    for e in sorted(designs):
        d = designs[e]
        if d.mapping is not None:
            print(f"# edge {e} {d.source}: I(X;Y)={d.mapping.input_mi:.4f} "
                  f"I(X;T)={d.mapping.preserved_mi:.4f}", file=sys.stderr)


def cmd_simulate(args) -> None:
    from .sim import StopRule, sweep, write_csv

    code = _load_code(args.code_file)
    dec = _make_decoder(args, code)
    max_frames = args.max_frames
    if max_frames is None:
        max_frames = 10**8 if code.n <= 7 else 10**7
    stop = StopRule(min_errors=args.min_errors, max_frames=max_frames, batch_size=args.batch_size)
    with _output(args.out) as f:
        points = sweep(dec, args.ebn0, stop, seed=args.seed, workers=args.workers,
                       all_zero=args.all_zero)
        write_csv(_flushing(points, f), f, gnuplot=args.gnuplot)


def _flushing(points, f):
    for p in points:
        yield p
        f.flush()


def cmd_cost_report(args) -> None:
    code = _load_code(args.code_file)
    try:
        domains = [DomainConfig.parse(t) for t in args.domains.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not domains:
        raise UsageError("no domains given")
    sched = build_schedule(code)
    with _output(args.out) as f:
        f.write(format_reports([cost_report(sched, d) for d in domains], args.format))


COMMANDS = {
    "construct": cmd_construct,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "design-luts": cmd_design_luts,
    "simulate": cmd_simulate,
    "cost-report": cmd_cost_report,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="polarib: %(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        _echo(args)
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"polarib: usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, KeyError) as exc:
        print(f"polarib: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
