"""Schedule interpreter, unpruned SC reference and the estimator front end."""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .code import PolarCode, extract_info
from .kernels import FixedDomain, FloatDomain, IbDomain, check_domain_word, h_combine
from .numerics import SmWord
from .pft import NodeLimits, Opcode, PftSchedule, build_schedule
from ._validation import check_llrs


@lru_cache(maxsize=64)
def _last_use(schedule: PftSchedule) -> dict[int, int]:
    last = {}
    for i, op in enumerate(schedule.ops):
        if op.in_edge is not None:
            last[op.in_edge] = i
    return last


def run_schedule(domain, schedule: PftSchedule, word) -> np.ndarray:
    """Decode a batch of channel words in ``domain``; returns ``beta^0``."""
    frames = word.shape[0]
    if not schedule.ops:
        return np.zeros((frames, schedule.N), dtype=np.uint8)
    alpha = {0: word}
    beta: dict[int, np.ndarray] = {}
    last = _last_use(schedule)
    for i, op in enumerate(schedule.ops):
        code = op.opcode
        a = alpha.get(op.in_edge) if op.in_edge is not None else None
        if code is Opcode.F:
            alpha[op.out_edge] = domain.f(a)
        elif code is Opcode.G:
            alpha[op.out_edge] = domain.g(a, beta[op.beta_in[0]], op.in_edge, op.out_edge)
        elif code is Opcode.G0:
            alpha[op.out_edge] = domain.g(a, None, op.in_edge, op.out_edge)
        elif code is Opcode.H:
            left, right = op.beta_in
            beta[op.beta_out] = h_combine(beta.pop(left), beta.pop(right))
        elif code is Opcode.H0:
            right = beta.pop(op.beta_in[0])
            beta[op.beta_out] = h_combine(np.zeros_like(right), right)
        elif code is Opcode.H1:
            left = beta.pop(op.beta_in[0]) if op.beta_in else None
            beta[op.beta_out] = domain.h1(a, left, op.in_edge)
        elif code is Opcode.REP:
            beta[op.beta_out] = domain.rep(a, op.in_edge)
        elif code is Opcode.SPC:
            beta[op.beta_out] = domain.spc(a)
        elif code is Opcode.INFO_LEAF:
            beta[op.beta_out] = domain.hd(a)
        elif code is Opcode.FROZEN_LEAF:
            beta[op.beta_out] = np.zeros((frames, op.width), dtype=np.uint8)
        if op.in_edge is not None and last[op.in_edge] == i:
            del alpha[op.in_edge]
    return beta[schedule.root_beta]


def decode(domain, schedule: PftSchedule, code: PolarCode, word):
    """Return ``(u_hat, x_hat)`` for a batch of domain-native channel words."""
    check_domain_word(domain, word, code.N)
    x_hat = run_schedule(domain, schedule, word)
    return extract_info(code, x_hat), x_hat


def sc_decode(domain, frozen_mask, word) -> np.ndarray:
    """Plain successive cancellation over the full tree (no node merging).

    Uses the domain's f, g and hard decision only, so it serves as an
    oracle for the pruned schedule.
    """
    mask = np.asarray(frozen_mask, dtype=np.uint8)

    def node(a, lo: int, size: int) -> np.ndarray:
        if size == 1:
            if mask[lo]:
                return np.zeros((a.shape[0], 1), dtype=np.uint8)
            return domain.hd(a)
        half = size // 2
        beta_l = node(domain.f(a), lo, half)
        beta_r = node(domain.g(a, beta_l), lo + half, half)
        return h_combine(beta_l, beta_r)

    return node(word, 0, mask.size)


DOMAINS = ("float", "fp", "ib")


class FastSSCDecoder(BaseEstimator):
    """Fast-SSC polar decoder with float, fixed-point or IB-quantized messages.

    ``fit`` builds the pruned schedule and, for ``domain="ib"`` without a
    supplied ``lutset``, designs the per-edge LUTs by genie-aided Monte Carlo.
    ``predict`` maps channel LLRs of shape ``(frames, N)`` to codeword estimates.

    Parameters
    ----------
    code : PolarCode
    domain : {"float", "fp", "ib"}
    q_fp : int
        Fixed-point width; for ``"ib"`` the width of the RCQ compute domain.
    q_ib : int
        IB index width (``"ib"`` only).
    channel_step : float or None
        LLR units per fixed-point LSB at the channel (``"fp"`` only). ``None``
        picks :func:`polarib.sim.default_channel_step` at ``design_ebn0_db``.
    lutset : LutSet or None
        Pre-designed LUTs (``"ib"`` only).
    design_ebn0_db : float or None
        Design point; ``None`` uses the code's default design SNR.
    headroom : float or None
        Range of the IB compute domain relative to the top channel level
        (``"ib"`` only); ``None`` uses :data:`polarib.ib.DEFAULT_HEADROOM`.
    """

    def __init__(self, code: PolarCode | None = None, domain: str = "float", q_fp: int = 5,
                 q_ib: int = 4, channel_step: float | None = None, lutset=None,
                 design_ebn0_db: float | None = None, q_fine: int = 10,
                 n_samples: int = 100_000, seed: int = 0, node_limits: NodeLimits | None = None,
                 headroom: float | None = None):
        self.code = code
        self.domain = domain
        self.q_fp = q_fp
        self.q_ib = q_ib
        self.channel_step = channel_step
        self.lutset = lutset
        self.design_ebn0_db = design_ebn0_db
        self.q_fine = q_fine
        self.n_samples = n_samples
        self.seed = seed
        self.node_limits = node_limits
        self.headroom = headroom

    def fit(self, X=None, y=None):
        from .sim import default_channel_step, default_design_ebn0

        if self.code is None:
            raise ValueError("a PolarCode is required")
        if self.domain not in DOMAINS:
            raise ValueError(f"domain must be one of {DOMAINS}, got {self.domain!r}")
        code = self.code
        self.schedule_ = build_schedule(code, self.node_limits or NodeLimits())
        design = self.design_ebn0_db
        if design is None:
            design = default_design_ebn0(code)
        self.design_ebn0_db_ = design
        if self.domain == "float":
            self.domain_ = FloatDomain()
        elif self.domain == "fp":
            step = self.channel_step
            if step is None:
                step = default_channel_step(self.q_fp, design, code.rate)
            self.domain_ = FixedDomain(self.q_fp, step)
        else:
            from .ib import DEFAULT_HEADROOM, build_lutset

            lutset = self.lutset
            if lutset is None:
                headroom = DEFAULT_HEADROOM if self.headroom is None else self.headroom
                lutset = build_lutset(code, self.schedule_, design, self.q_ib, self.q_fp,
                                      self.q_fine, self.n_samples, self.seed, headroom)
            lutset.check_schedule(self.schedule_)
            frozen = lutset.meta.get("frozen")
            if frozen is not None and frozen != "".join(map(str, code.frozen_mask.tolist())):
                raise ValueError("LutSet was designed for a different frozen set")
            self.lutset_ = lutset
            self.domain_ = IbDomain(lutset)
        return self

    def _check_fitted(self):
        if not hasattr(self, "domain_"):
            raise NotFittedError("call fit() before decoding")

    def quantize(self, llrs) -> np.ndarray | SmWord:
        """Channel LLRs in the decoder's native number format."""
        self._check_fitted()
        return self.domain_.quantize(check_llrs(llrs, self.code.N))

    def decode(self, llrs):
        """``(u_hat, x_hat)`` for real-valued channel LLRs."""
        self._check_fitted()
        return decode(self.domain_, self.schedule_, self.code, self.quantize(llrs))

    def predict(self, llrs) -> np.ndarray:
        return self.decode(llrs)[1]

    def score(self, llrs, codewords) -> float:
        """Fraction of frames decoded without error."""
        x_hat = self.predict(llrs)
        return float(np.mean(np.all(x_hat == np.asarray(codewords), axis=1)))
