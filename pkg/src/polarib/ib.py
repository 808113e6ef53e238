"""Information-bottleneck LUT design for the RCQ decoder.

Samples are collected by genie-aided Monte Carlo: random codewords go through
BPSK/AWGN, and the decoder schedule runs with the encoder's true partial sums
so every edge sees error-free density-evolution statistics. Edges are designed
in decode order, each one from samples that already passed through the LUTs
designed upstream.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .code import PolarCode, scatter, tree_encode
from .kernels import FixedDomain
from .numerics import SmWord, max_magnitude
from .pft import Opcode, PftSchedule
from .sim import ChannelParams, batch_rng, channel_llrs

log = logging.getLogger(__name__)

DESIGN_STREAM = 0x1B  # keeps design draws apart from FER point streams
DEFAULT_HEADROOM = 1.5  # compute-domain range / top channel reconstruction level


def mutual_information(p) -> float:
    """``I(X;T)`` in bits of a joint table ``p[x, t]``.

    The table is normalised first; empty cells contribute nothing.
    """
    p = np.asarray(p, dtype=float)
    if (p < 0).any():
        raise ValueError("probabilities must be non-negative")
    total = p.sum()
    if total <= 0:
        raise ValueError("empty distribution")
    p = p / total
    px = p.sum(axis=1, keepdims=True)
    pt = p.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = p * np.log2(p / (px * pt))
    return float(np.nansum(np.where(p > 0, terms, 0.0)))


@dataclass
class JointDistribution:
    """Histogram estimate of ``p(x, y)``; column ``b`` covers ``bin_edges[b:b+2]``."""

    bins: np.ndarray
    bin_edges: np.ndarray
    samples: int = 0

    def __post_init__(self):
        self.bins = np.asarray(self.bins, dtype=float)
        self.bin_edges = np.asarray(self.bin_edges, dtype=float)
        if self.bins.ndim != 2 or self.bins.shape[0] != 2:
            raise ValueError("joint table must have shape (2, B)")
        if self.bin_edges.size != self.bins.shape[1] + 1:
            raise ValueError("need B + 1 bin edges")

    @property
    def n_bins(self) -> int:
        return self.bins.shape[1]

    @property
    def mi(self) -> float:
        return mutual_information(self.bins)

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.bins[0], self.bins[1, ::-1]))

    @classmethod
    def from_counts(cls, x: np.ndarray, b: np.ndarray, bin_edges: np.ndarray) -> "JointDistribution":
        """Symmetrised histogram: each sample ``(x, b)`` also adds ``(1-x, B-1-b)``."""
        n_bins = len(bin_edges) - 1
        counts = symmetric_counts(x, b, n_bins)
        return cls(counts / counts.sum(), bin_edges, samples=int(x.size))


def symmetric_counts(x: np.ndarray, b: np.ndarray, n_bins: int) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64).ravel()
    b = np.asarray(b, dtype=np.int64).ravel()
    counts = np.bincount(x * n_bins + b, minlength=2 * n_bins).reshape(2, n_bins).astype(float)
    return counts + counts[::-1, ::-1]


@dataclass
class IbMapping:
    """Contiguous clustering of fine bins: cluster ``c`` is ``[boundaries[c], boundaries[c+1])``."""

    boundaries: np.ndarray
    preserved_mi: float
    input_mi: float
    history: list = field(default_factory=list, repr=False)

    @property
    def t_count(self) -> int:
        return len(self.boundaries) - 1

    def labels(self, n_bins: int) -> np.ndarray:
        """Cluster index of every fine bin."""
        return np.searchsorted(self.boundaries, np.arange(n_bins), side="right") - 1

    def compress(self, p: np.ndarray) -> np.ndarray:
        """Joint ``p(x, t)`` of the clustered variable."""
        return np.add.reduceat(np.asarray(p, dtype=float), self.boundaries[:-1], axis=1)


def _phi(p0: np.ndarray, p1: np.ndarray, px0: float, px1: float) -> np.ndarray:
    """Per-cluster contribution to ``I(X;T)``."""
    pt = p0 + p1
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(p0 > 0, p0 * np.log2(p0 / (px0 * pt)), 0.0)
        b = np.where(p1 > 0, p1 * np.log2(p1 / (px1 * pt)), 0.0)
    return a + b


def merge_costs(p0: np.ndarray, p1: np.ndarray, px0: float, px1: float) -> np.ndarray:
    """MI lost by merging each adjacent cluster pair ``(j, j+1)`` (one half only)."""
    phi = _phi(p0, p1, px0, px1)
    merged = _phi(p0[:-1] + p0[1:], p1[:-1] + p1[1:], px0, px1)
    return np.maximum(phi[:-1] + phi[1:] - merged, 0.0)


def symmetric_ib_compress(joint: JointDistribution | np.ndarray, t_count: int,
                          record_history: bool = False) -> IbMapping:
    """Greedy symmetric agglomerative IB over adjacent bins.

    Works on the upper (positive-LLR) half and mirrors every merge onto the
    lower half, so the clusters stay contiguous, ordered and symmetric.
    Each step merges the adjacent pair with the smallest MI loss (lowest
    index on ties).
    """
    p = joint.bins if isinstance(joint, JointDistribution) else np.asarray(joint, dtype=float)
    p = p / p.sum()
    n_bins = p.shape[1]
    if t_count % 2 or t_count < 2:
        raise ValueError(f"t_count must be even and >= 2, got {t_count}")
    if n_bins % 2:
        raise ValueError("symmetric compression needs an even number of bins")
    if t_count > n_bins:
        raise ValueError(f"cannot form {t_count} clusters from {n_bins} bins")
    half = n_bins // 2
    px0, px1 = p[0].sum(), p[1].sum()
    starts = list(range(half, n_bins))
    p0 = list(p[0, half:])
    p1 = list(p[1, half:])
    history = []
    input_mi = mutual_information(p)
    while len(starts) > t_count // 2:
        costs = merge_costs(np.array(p0), np.array(p1), px0, px1)
        j = int(np.argmin(costs))
        if record_history:
            history.append((np.array(starts), 2.0 * float(costs[j])))
        p0[j:j + 2] = [p0[j] + p0[j + 1]]
        p1[j:j + 2] = [p1[j] + p1[j + 1]]
        del starts[j + 1]
    upper = np.array(starts + [n_bins])
    lower = n_bins - upper[::-1]
    boundaries = np.concatenate([lower[:-1], upper])
    mapping = IbMapping(boundaries, 0.0, input_mi, history)
    mapping.preserved_mi = mutual_information(mapping.compress(p))
    return mapping


def _round_half_up(v: np.ndarray) -> np.ndarray:
    return np.floor(np.asarray(v, dtype=float) + 0.5).astype(np.int64)


def strictly_increasing(levels: np.ndarray, top: int) -> np.ndarray:
    """Nearest strictly increasing integer sequence inside ``0..top``."""
    levels = np.asarray(levels, dtype=np.int64).copy()
    n = levels.size
    if n - 1 > top:
        raise ValueError(f"{n} distinct levels do not fit in 0..{top}")
    idx = np.arange(n)
    levels = np.clip(levels, idx, top - (n - 1 - idx))
    for i in range(1, n):
        levels[i] = max(levels[i], levels[i - 1] + 1)
    return levels


def nearest_level_lut(levels: np.ndarray, size: int) -> np.ndarray:
    """Map ``0..size-1`` to the index of the nearest level (ties go up)."""
    levels = np.asarray(levels, dtype=float)
    mids = (levels[:-1] + levels[1:]) / 2.0
    return np.searchsorted(mids, np.arange(size), side="right").astype(np.int64)


@dataclass
class LutSet:
    """Channel quantizer plus per-edge magnitude LUTs.

    ``channel_thresholds[m-1]`` is the smallest |LLR| mapped to IB magnitude
    ``m``. ``lut_up[e][m]`` is the fixed-point magnitude of IB magnitude ``m``
    on edge ``e``; ``lut_down[e][j]`` the IB magnitude of fixed-point
    magnitude ``j`` written to edge ``e``.
    """

    q_ib: int
    q_fp: int
    channel_thresholds: np.ndarray
    lut_up: dict[int, np.ndarray]
    lut_down: dict[int, np.ndarray]
    fp_step: float = 1.0
    meta: dict = field(default_factory=dict)

    def quantize_channel(self, llr: np.ndarray) -> SmWord:
        llr = np.asarray(llr, dtype=float)
        sign = np.signbit(llr).astype(np.uint8)
        mag = np.searchsorted(self.channel_thresholds, np.abs(llr), side="right").astype(np.int16)
        return SmWord(sign, mag)

    @property
    def edge_count(self) -> int:
        return len(self.lut_up)

    def check_schedule(self, schedule: PftSchedule) -> None:
        if self.edge_count != schedule.edge_count:
            raise ValueError(f"LutSet has {self.edge_count} edges, schedule has {schedule.edge_count}")
        if "N" in self.meta and int(self.meta["N"]) != schedule.N:
            raise ValueError(f"LutSet designed for N = {self.meta['N']}, schedule has N = {schedule.N}")

    def check(self) -> None:
        """Assert monotone, range-limited and mutually consistent tables."""
        top = max_magnitude(self.q_fp)
        for e, up in self.lut_up.items():
            down = self.lut_down[e]
            if up.size != 1 << (self.q_ib - 1) or down.size != 1 << (self.q_fp - 1):
                raise ValueError(f"edge {e}: LUT sizes {up.size}/{down.size}")
            if np.any(np.diff(up) <= 0) or up.min() < 0 or up.max() > top:
                raise ValueError(f"edge {e}: lut_up not strictly increasing within 0..{top}")
            if np.any(np.diff(down) < 0):
                raise ValueError(f"edge {e}: lut_down not monotone")
            if not np.array_equal(down[up], np.arange(up.size)):
                raise ValueError(f"edge {e}: lut_down(lut_up(m)) != m")

    # -- persistence -------------------------------------------------------
    def dumps(self) -> str:
        lines = ["# polarib lutset v1"]
        for key in ("N", "K", "frozen", "q_fine", "design_ebn0_db", "seed", "n_samples",
                    "headroom", "channel_model"):
            if key in self.meta:
                lines.append(f"{key} {self.meta[key]}")
        lines.append(f"q_ib {self.q_ib}")
        lines.append(f"q_fp {self.q_fp}")
        lines.append(f"fp_step {float(self.fp_step)!r}")
        lines.append("channel_thresholds " + " ".join(repr(float(t)) for t in self.channel_thresholds))
        lines.append(f"edges {self.edge_count}")
        for e in sorted(self.lut_up):
            up = " ".join(map(str, self.lut_up[e].tolist()))
            down = " ".join(map(str, self.lut_down[e].tolist()))
            lines.append(f"edge {e} up {up} down {down}")
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "LutSet":
        meta: dict = {}
        up: dict[int, np.ndarray] = {}
        down: dict[int, np.ndarray] = {}
        fields: dict = {}
        n_edges = None
        for lineno, line in enumerate(text.splitlines(), 1):
            if not line.strip() or line.startswith("#"):
                continue
            key, _, rest = line.partition(" ")
            try:
                if key == "edge":
                    tok = rest.split()
                    e = int(tok[0])
                    i_up, i_down = tok.index("up"), tok.index("down")
                    up[e] = np.array([int(v) for v in tok[i_up + 1:i_down]], dtype=np.int64)
                    down[e] = np.array([int(v) for v in tok[i_down + 1:]], dtype=np.int64)
                elif key == "channel_thresholds":
                    fields[key] = np.array([float(v) for v in rest.split()])
                elif key in ("q_ib", "q_fp"):
                    fields[key] = int(rest)
                elif key == "fp_step":
                    fields[key] = float(rest)
                elif key == "edges":
                    n_edges = int(rest)
                elif key in ("N", "K", "q_fine", "seed", "n_samples"):
                    meta[key] = int(rest)
                elif key in ("design_ebn0_db", "headroom"):
                    meta[key] = float(rest)
                else:
                    meta[key] = rest
            except (ValueError, IndexError) as exc:
                raise ValueError(f"malformed LutSet line {lineno}: {line!r}") from exc
        if n_edges is None or len(up) != n_edges or sorted(up) != list(range(n_edges)):
            raise ValueError("LutSet edge records incomplete")
        missing = {"q_ib", "q_fp", "channel_thresholds"} - set(fields)
        if missing:
            raise ValueError(f"LutSet missing {sorted(missing)}")
        return cls(fields["q_ib"], fields["q_fp"], fields["channel_thresholds"], up, down,
                   fields.get("fp_step", 1.0), meta)

    @classmethod
    def load(cls, path: str | Path) -> "LutSet":
        return cls.loads(Path(path).read_text())


def channel_bin_edges(params: ChannelParams, q_fine: int) -> np.ndarray:
    """Uniform fine bins over ``[-L, L]`` with ``L = 4 * 2 / sigma^2``."""
    limit = 4.0 * params.mean_llr
    return np.linspace(-limit, limit, (1 << q_fine) + 1)


def fp_bin_edges(q_fp: int, step: float) -> np.ndarray:
    """Bins of the ``q_fp``-bit SM values in LLR order ``-M .. -0, +0 .. +M``."""
    top = max_magnitude(q_fp)
    upper = (np.arange(top + 1) + 0.5) * step
    return np.concatenate([-upper[::-1], [0.0], upper])


def sm_bin_index(word: SmWord, q: int) -> np.ndarray:
    """Position of each SM value in the LLR-ordered alphabet of ``2**q`` bins."""
    half = 1 << (q - 1)
    mag = word.mag.astype(np.int64)
    return np.where(word.sign.astype(bool), half - 1 - mag, half + mag)


def posterior_llrs(p: np.ndarray) -> np.ndarray:
    """``log p(x=0|t) / p(x=1|t)`` per column; empty cells get half a count."""
    p = np.asarray(p, dtype=float)
    floor = 0.5 * p[p > 0].min() if (p > 0).any() else 1.0
    return np.log(np.maximum(p[0], floor) / np.maximum(p[1], floor))


def awgn_llr_joint(params: ChannelParams, edges: np.ndarray) -> JointDistribution:
    """Exact binned joint of the BPSK/AWGN channel LLR; outer bins take the tails.

    Given ``x``, the LLR is Gaussian with mean ``±mu`` and variance ``2 mu``.
    """
    mu = params.mean_llr
    sd = np.sqrt(2.0 * mu)
    phi = np.vectorize(lambda z: 0.5 * math.erfc(-z / math.sqrt(2.0)))
    cdf0 = phi((edges - mu) / sd)
    cdf1 = phi((edges + mu) / sd)
    cdf0[0] = cdf1[0] = 0.0
    cdf0[-1] = cdf1[-1] = 1.0
    p = 0.5 * np.vstack([np.diff(cdf0), np.diff(cdf1)])
    return JointDistribution(0.5 * (p + p[::-1, ::-1]), edges)


@dataclass
class EdgeDesign:
    joint: JointDistribution
    mapping: IbMapping | None
    source: str


def _frames_needed(schedule: PftSchedule, n_samples: int) -> int:
    narrowest = min(schedule.edge_width) if schedule.edge_width else schedule.N
    return -(-n_samples // narrowest)


def design_pass(code: PolarCode, schedule: PftSchedule, design_ebn0_db: float, q_ib: int,
                q_fp: int, q_fine: int = 10, n_samples: int = 100_000, seed: int = 0,
                chunk_frames: int = 4096, reconstruction: str = "centroid",
                headroom: float = DEFAULT_HEADROOM,
                channel_model: str = "exact") -> tuple[LutSet, dict[int, EdgeDesign]]:
    """Progressive genie-aided design of every edge; returns the LutSet and per-edge data.

    ``reconstruction="centroid"`` reconstructs each cluster at its mean
    fixed-point magnitude and lets f outputs inherit their parent's tables.
    ``"posterior"`` uses each cluster's empirical LLR instead (clamped into the
    cluster on g edges) and gives f outputs their own up-tables.

    ``channel_model="exact"`` bins the channel LLR with its Gaussian law, so
    the channel partition does not depend on the seed; ``"sampled"`` histograms
    the Monte Carlo frames like every other edge.

    The compute-domain LSB maps the largest channel centroid to the largest
    fixed-point magnitude divided by ``headroom``; ``headroom > 1`` leaves
    range for g sums above the channel's reconstruction levels.
    """
    if not q_ib <= q_fp <= q_fine:
        raise ValueError(f"need q_ib <= q_fp <= q_fine, got {q_ib}, {q_fp}, {q_fine}")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if headroom < 1.0:
        raise ValueError(f"headroom must be >= 1, got {headroom}")
    if channel_model not in ("exact", "sampled"):
        raise ValueError(f"channel_model must be 'exact' or 'sampled', got {channel_model!r}")
    if reconstruction not in ("centroid", "posterior"):
        raise ValueError(f"reconstruction must be 'centroid' or 'posterior', got {reconstruction!r}")
    params = ChannelParams(design_ebn0_db, code.rate)
    frames = _frames_needed(schedule, n_samples)
    t_count = 1 << q_ib
    ib_top = max_magnitude(q_ib)
    fp_top = max_magnitude(q_fp)
    n_chunks = -(-frames // chunk_frames)

    def chunk(i):
        rng = batch_rng(seed, DESIGN_STREAM, i)
        size = min(chunk_frames, frames - i * chunk_frames)
        u = rng.integers(0, 2, size=(size, code.k), dtype=np.uint8)
        v = scatter(code, u)
        return v, channel_llrs(tree_encode(v), params, rng)

    # channel edge: fine histogram, then compression
    edges = channel_bin_edges(params, q_fine)
    n_fine = edges.size - 1
    if channel_model == "exact":
        joint0 = awgn_llr_joint(params, edges)
    else:
        counts = np.zeros((2, n_fine))
        for i in range(n_chunks):
            v, llr = chunk(i)
            x = tree_encode(v)
            b = np.clip(np.searchsorted(edges, llr, side="right") - 1, 0, n_fine - 1)
            counts += symmetric_counts(x, b, n_fine)
        joint0 = JointDistribution(counts / counts.sum(), edges, samples=frames * code.N)
    map0 = symmetric_ib_compress(joint0, t_count)
    upper = map0.boundaries[t_count // 2:]
    thresholds = edges[upper[1:-1]]
    # centroid of |LLR| per magnitude cluster, from the mirrored upper half
    centres = (edges[:-1] + edges[1:]) / 2.0
    mass = joint0.bins.sum(axis=0)
    centroids = []
    for c in range(t_count // 2):
        lo, hi = upper[c], upper[c + 1]
        w = mass[lo:hi]
        centroids.append(float((w * centres[lo:hi]).sum() / w.sum()) if w.sum() > 0
                         else float(centres[lo:hi].mean()))
    centroids = np.array(centroids)
    fp_step = headroom * centroids[-1] / fp_top
    up0 = strictly_increasing(_round_half_up(centroids / fp_step), fp_top)
    lut_up = {0: up0}
    lut_down = {0: nearest_level_lut(up0, fp_top + 1)}
    designs = {0: EdgeDesign(joint0, map0, "channel")}
    log.info("channel edge: I(X;Y)=%.4f, I(X;T)=%.4f bits", map0.input_mi, map0.preserved_mi)

    lutset = LutSet(q_ib, q_fp, thresholds, lut_up, lut_down, fp_step,
                    {"N": code.N, "K": code.k,
                     "frozen": "".join(map(str, code.frozen_mask.tolist())),
                     "q_fine": q_fine, "design_ebn0_db": float(design_ebn0_db), "seed": seed,
                     "n_samples": n_samples, "headroom": float(headroom),
                     "channel_model": channel_model})

    # genie pass through the schedule with all frames at once
    vs, words = [], []
    for i in range(n_chunks):
        v, llr = chunk(i)
        vs.append(v)
        words.append(lutset.quantize_channel(llr))
    v_all = np.concatenate(vs)
    del vs
    alpha = {0: SmWord(np.concatenate([w.sign for w in words]),
                       np.concatenate([w.mag for w in words]).astype(np.uint8))}
    del words
    fixed = FixedDomain(q_fp)
    last = {}
    for i, op in enumerate(schedule.ops):
        if op.in_edge is not None:
            last[op.in_edge] = i
    ib_edges = fp_bin_edges(q_ib, 1.0)

    for i, op in enumerate(schedule.ops):
        if op.opcode in (Opcode.F, Opcode.G, Opcode.G0):
            lo, hi = op.leaf_span
            mid = (lo + hi) // 2
            a = alpha[op.in_edge]
            e = op.out_edge
            labels = tree_encode(v_all[:, mid:hi] if op.opcode is not Opcode.F else v_all[:, lo:mid])
            if op.opcode is Opcode.F:
                out = fixed.f(a)
                joint = JointDistribution.from_counts(labels, sm_bin_index(out, q_ib), ib_edges)
                if reconstruction == "posterior":
                    llr = posterior_llrs(joint.bins)[ib_top + 1:]
                    up = strictly_increasing(_round_half_up(np.minimum(llr / fp_step, fp_top)), fp_top)
                    lut_up[e] = up
                    lut_down[e] = nearest_level_lut(up, fp_top + 1)
                else:
                    lut_up[e] = lut_up[op.in_edge]
                    lut_down[e] = lut_down[op.in_edge]
                designs[e] = EdgeDesign(joint, None, "F")
            else:
                beta = tree_encode(v_all[:, lo:mid]) if op.opcode is Opcode.G else None
                recon = SmWord(a.sign, lut_up[op.in_edge][a.mag])
                fp = fixed.g(recon, beta)
                joint = JointDistribution.from_counts(labels, sm_bin_index(fp, q_fp),
                                                      fp_bin_edges(q_fp, fp_step))
                mapping = symmetric_ib_compress(joint, t_count)
                # magnitude j of the FP value sits in fine bin 2**(q_fp-1) + j
                cuts = mapping.boundaries[t_count // 2:] - (fp_top + 1)
                down = np.searchsorted(cuts, np.arange(fp_top + 1), side="right") - 1
                pmag = joint.bins.sum(axis=0)[fp_top + 1:] + joint.bins.sum(axis=0)[fp_top::-1]
                up = np.empty(ib_top + 1, dtype=np.int64)
                post = posterior_llrs(mapping.compress(joint.bins))[ib_top + 1:] / fp_step
                for m in range(ib_top + 1):
                    js = np.arange(cuts[m], cuts[m + 1])
                    w = pmag[js]
                    if reconstruction == "posterior":
                        up[m] = np.clip(_round_half_up(min(post[m], fp_top)), js[0], js[-1])
                    else:
                        up[m] = _round_half_up((w * js).sum() / w.sum() if w.sum() > 0 else js.mean())
                lut_up[e] = up
                lut_down[e] = down
                out = SmWord(fp.sign, down[fp.mag].astype(np.uint8))
                designs[e] = EdgeDesign(joint, mapping, op.opcode.value)
            alpha[e] = out
        if op.in_edge is not None and last[op.in_edge] == i:
            del alpha[op.in_edge]
    return lutset, designs


def collect_edge_distributions(code: PolarCode, schedule: PftSchedule, design_ebn0_db: float,
                               q_fine: int = 10, n_samples: int = 100_000, seed: int = 0,
                               q_ib: int = 4, q_fp: int = 5) -> dict[int, JointDistribution]:
    """Per-edge symmetrised joint distributions from the progressive genie run.

    The channel edge is binned over ``2**q_fine`` fine LLR bins, g-outputs over
    the ``q_fp``-bit values they hold before requantization, and f-outputs
    over the IB indices they carry.
    """
    _, designs = design_pass(code, schedule, design_ebn0_db, q_ib, q_fp, q_fine, n_samples, seed)
    return {e: d.joint for e, d in designs.items()}


def build_lutset(code: PolarCode, schedule: PftSchedule, design_ebn0_db: float, q_ib: int = 4,
                 q_fp: int = 5, q_fine: int = 10, n_samples: int = 100_000, seed: int = 0,
                 headroom: float = DEFAULT_HEADROOM) -> LutSet:
    if n_samples < 100_000:
        log.warning("%d samples per edge is below the recommended 100000", n_samples)
    lutset, _ = design_pass(code, schedule, design_ebn0_db, q_ib, q_fp, q_fine, n_samples, seed,
                            headroom=headroom)
    lutset.check()
    return lutset
