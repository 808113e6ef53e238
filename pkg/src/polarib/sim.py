"""BPSK/AWGN channel model and Monte Carlo frame-error-rate measurement."""
from __future__ import annotations

import csv
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .code import encode

log = logging.getLogger(__name__)

CSV_HEADER = ("ebn0_db", "frames", "frame_errors", "bit_errors", "fer", "seed", "capped")


@dataclass(frozen=True)
class ChannelParams:
    ebn0_db: float
    rate: float

    @property
    def sigma2(self) -> float:
        return 1.0 / (2.0 * self.rate * 10.0 ** (self.ebn0_db / 10.0))

    @property
    def mean_llr(self) -> float:
        """Mean channel LLR of a transmitted 0 (``2 / sigma2``)."""
        return 2.0 / self.sigma2


@dataclass(frozen=True)
class StopRule:
    min_errors: int = 100
    max_frames: int = 10**8
    batch_size: int = 10_000

    def __post_init__(self):
        if self.max_frames < 1 or self.batch_size < 1 or self.min_errors < 1:
            raise ValueError("stop rule values must be positive")


@dataclass(frozen=True)
class FerPoint:
    ebn0_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    fer: float
    seed: int
    capped: bool

    def row(self) -> tuple:
        return (f"{self.ebn0_db:g}", self.frames, self.frame_errors, self.bit_errors,
                f"{self.fer:.6e}", self.seed, int(self.capped))


def default_design_ebn0(code) -> float:
    """Quantizer design Eb/N0 in dB, near the FER = 1e-3 operating point of a
    rate-1/2 code: 4.5 dB up to N = 128, 3.25 dB from N = 1024, linear in between."""
    frac = min(max((code.n - 7) / 3.0, 0.0), 1.0)
    return 4.5 - 1.25 * frac


def default_channel_step(q_fp: int, design_ebn0_db: float, rate: float) -> float:
    """LLR units per LSB for the fixed-point channel quantizer.

    The LSB is shared by all widths (``LSBS_PER_MEAN`` steps per mean channel
    LLR at the design point); extra bits only extend the saturation range.
    ``q_fp`` is accepted for signature symmetry.
    """
    return ChannelParams(design_ebn0_db, rate).mean_llr / LSBS_PER_MEAN


LSBS_PER_MEAN = 6.0  # flat FP5 optimum on both short and long codes


def channel_llrs(codewords: np.ndarray, params: ChannelParams, rng: np.random.Generator,
                 noise: bool = True) -> np.ndarray:
    """BPSK (0 -> +1, 1 -> -1) over AWGN; returns ``2 y / sigma^2``."""
    symbols = 1.0 - 2.0 * np.asarray(codewords, dtype=float)
    y = symbols
    if noise:
        y = symbols + np.sqrt(params.sigma2) * rng.standard_normal(symbols.shape)
    return 2.0 * y / params.sigma2


def batch_rng(seed: int, point: int, batch: int) -> np.random.Generator:
    """Counter-based stream for one batch of frames."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, point, batch])))


def random_frames(code, frames: int, params: ChannelParams, rng: np.random.Generator,
                  all_zero: bool = False):
    """``(u, x, llrs)`` for ``frames`` transmissions."""
    if all_zero:
        u = np.zeros((frames, code.k), dtype=np.uint8)
    else:
        u = rng.integers(0, 2, size=(frames, code.k), dtype=np.uint8)
    x = encode(code, u)
    return u, x, channel_llrs(x, params, rng)


def _run_batch(decoder, params, seed, point, batch, size, all_zero):
    rng = batch_rng(seed, point, batch)
    u, x, llrs = random_frames(decoder.code, size, params, rng, all_zero)
    u_hat, x_hat = decoder.decode(llrs)
    frame_err = int(np.any(x_hat != x, axis=1).sum())
    bit_err = int((u_hat != u).sum())
    return frame_err, bit_err


_WORKER_DECODER = None


def _init_worker(decoder):
    global _WORKER_DECODER
    _WORKER_DECODER = decoder


def _worker_batch(args):
    return _run_batch(_WORKER_DECODER, *args)


def measure_fer(decoder, params: ChannelParams, stop: StopRule = StopRule(), seed: int = 0,
                point: int = 0, workers: int = 1, all_zero: bool = False,
                _pool=None) -> FerPoint:
    """Simulate until ``stop.min_errors`` frame errors or ``stop.max_frames`` frames.

    Frames are drawn in fixed batches; batch ``b`` uses the stream
    ``(seed, point, b)``. Batches are reduced in order and the stopping rule
    is checked after each, so the result does not depend on ``workers``.
    """
    n_batches = -(-stop.max_frames // stop.batch_size)

    def sizes(b):
        return min(stop.batch_size, stop.max_frames - b * stop.batch_size)

    frames = frame_errors = bit_errors = 0
    pool = _pool
    own_pool = False
    if workers > 1 and pool is None:
        pool = ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(decoder,))
        own_pool = True
    try:
        b = 0
        while b < n_batches and frame_errors < stop.min_errors:
            chunk = range(b, min(b + max(workers, 1), n_batches))
            if pool is None:
                results = (_run_batch(decoder, params, seed, point, i, sizes(i), all_zero) for i in chunk)
            else:
                args = [(params, seed, point, i, sizes(i), all_zero) for i in chunk]
                results = pool.map(_worker_batch, args)
            for i, (fe, be) in zip(chunk, results):
                if frame_errors >= stop.min_errors:
                    break
                frames += sizes(i)
                frame_errors += fe
                bit_errors += be
                b = i + 1
    finally:
        if own_pool:
            pool.shutdown()
    capped = frame_errors < stop.min_errors
    point_result = FerPoint(float(params.ebn0_db), frames, frame_errors, bit_errors,
                            frame_errors / frames, seed, capped)
    log.info("%s", point_result)
    return point_result


def sweep(decoder, ebn0_list: Iterable[float], stop: StopRule = StopRule(), seed: int = 0,
          workers: int = 1, all_zero: bool = False) -> Iterator[FerPoint]:
    """Yield one :class:`FerPoint` per Eb/N0 in input order.

    Point ``i`` draws from streams ``(seed, i, *)`` so points are decorrelated.
    """
    rate = decoder.code.rate
    pool = None
    if workers > 1:
        pool = ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(decoder,))
    try:
        for i, ebn0 in enumerate(ebn0_list):
            yield measure_fer(decoder, ChannelParams(float(ebn0), rate), stop, seed, point=i,
                              workers=workers, all_zero=all_zero, _pool=pool)
    finally:
        if pool is not None:
            pool.shutdown()


def write_csv(points: Iterable[FerPoint], stream, gnuplot: bool = False) -> None:
    """FER table as CSV, or two whitespace-separated columns for gnuplot."""
    if gnuplot:
        stream.write("# ebn0_db fer\n")
        for p in points:
            stream.write(f"{p.ebn0_db:g} {p.fer:.6e}\n")
            stream.flush()
        return
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for p in points:
        writer.writerow(p.row())
        stream.flush()


def read_csv(text: str) -> list[FerPoint]:
    rows = list(csv.DictReader(io.StringIO(text)))
    return [FerPoint(float(r["ebn0_db"]), int(r["frames"]), int(r["frame_errors"]),
                     int(r["bit_errors"]), float(r["fer"]), int(r["seed"]), bool(int(r["capped"])))
            for r in rows]


def ebn0_at_fer(points: list[FerPoint], target: float) -> float:
    """Eb/N0 where the FER curve crosses ``target`` (log-linear interpolation).

    Points must be ordered by Eb/N0; raises if the curve never brackets the
    target.
    """
    pts = sorted(points, key=lambda p: p.ebn0_db)
    for lo, hi in zip(pts, pts[1:]):
        if lo.fer >= target >= hi.fer and lo.fer > 0 and hi.fer > 0 and lo.fer != hi.fer:
            t = (np.log10(lo.fer) - np.log10(target)) / (np.log10(lo.fer) - np.log10(hi.fer))
            return float(lo.ebn0_db + t * (hi.ebn0_db - lo.ebn0_db))
    raise ValueError(f"FER {target:g} not bracketed by {[(p.ebn0_db, p.fer) for p in pts]}")



