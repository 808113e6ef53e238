"""Fast-SSC node kernels for the float, fixed-point SM and IB domains.

All kernels work on batches: axis 0 indexes frames, axis 1 the node's LLRs.
Pairs are ``(alpha[:, 2i], alpha[:, 2i + 1])``.
"""
from __future__ import annotations

import numpy as np

from .numerics import SmWord, max_magnitude, quantize_uniform, sm_to_tc_array, tc_to_sm_array


def h_combine(beta_l: np.ndarray, beta_r: np.ndarray) -> np.ndarray:
    """Partial-sum combination ``(b_l ^ b_r, b_r)`` interleaved per pair."""
    if beta_l.shape != beta_r.shape:
        raise ValueError(f"beta shapes differ: {beta_l.shape} vs {beta_r.shape}")
    out = np.empty(beta_l.shape[:-1] + (2 * beta_l.shape[-1],), dtype=np.uint8)
    out[..., 0::2] = beta_l ^ beta_r
    out[..., 1::2] = beta_r
    return out


def spc_decisions(bits: np.ndarray, reliability: np.ndarray) -> np.ndarray:
    """Flip the least reliable bit of every odd-parity row (lowest index on ties)."""
    bits = bits.copy()
    parity = np.bitwise_xor.reduce(bits, axis=-1)
    rows = np.arange(bits.shape[0])
    weakest = np.argmin(reliability, axis=-1)
    bits[rows, weakest] ^= parity
    return bits


class FloatDomain:
    """Unquantized LLRs with min-sum check nodes."""

    name = "float"

    def quantize(self, llr: np.ndarray) -> np.ndarray:
        return np.asarray(llr, dtype=float)

    def f(self, a):
        x, y = a[:, 0::2], a[:, 1::2]
        return np.sign(x) * np.sign(y) * np.minimum(np.abs(x), np.abs(y))

    def g(self, a, beta=None, in_edge=None, out_edge=None):
        x, y = a[:, 0::2], a[:, 1::2]
        if beta is None:
            return x + y
        return np.where(beta.astype(bool), -x, x) + y

    def hd(self, a) -> np.ndarray:
        return (a < 0).astype(np.uint8)

    def rep(self, a, in_edge=None) -> np.ndarray:
        decision = (a.sum(axis=1) < 0).astype(np.uint8)
        return np.repeat(decision[:, None], a.shape[1], axis=1)

    def spc(self, a) -> np.ndarray:
        return spc_decisions(self.hd(a), np.abs(a))

    def h1(self, a, beta_l=None, in_edge=None) -> np.ndarray:
        beta_r = self.hd(self.g(a, beta_l))
        if beta_l is None:
            beta_l = np.zeros_like(beta_r)
        return h_combine(beta_l, beta_r)

    def zeros(self, frames: int, width: int):
        return np.zeros((frames, width))


class FixedDomain:
    """Uniform sign-magnitude fixed point with ``q`` bits per LLR.

    Additions run in two's complement: one extra bit for g, an exact adder
    tree for REP. Results are saturated back to ``q`` bits SM.
    """

    def __init__(self, q: int, step: float = 1.0):
        if q < 2:
            raise ValueError("fixed-point LLRs need at least 2 bits")
        self.q = q
        self.step = float(step)

    @property
    def name(self) -> str:
        return f"fp{self.q}"

    def quantize(self, llr: np.ndarray) -> SmWord:
        return quantize_uniform(llr, self.step, self.q)

    def f(self, a: SmWord) -> SmWord:
        sign = a.sign[:, 0::2] ^ a.sign[:, 1::2]
        mag = np.minimum(a.mag[:, 0::2], a.mag[:, 1::2])
        return SmWord(sign, mag)

    def _tc_sum(self, a: SmWord, beta=None) -> np.ndarray:
        sign_x = a.sign[:, 0::2]
        if beta is not None:
            sign_x = sign_x ^ beta
        x = sm_to_tc_array(SmWord(sign_x, a.mag[:, 0::2]))
        y = sm_to_tc_array(a[:, 1::2])
        return x + y

    def g(self, a: SmWord, beta=None, in_edge=None, out_edge=None) -> SmWord:
        return tc_to_sm_array(self._tc_sum(a, beta), self.q)

    def hd(self, a: SmWord) -> np.ndarray:
        return a.sign.astype(np.uint8)

    def rep(self, a: SmWord, in_edge=None) -> np.ndarray:
        total = sm_to_tc_array(a).sum(axis=1)
        decision = (total < 0).astype(np.uint8)
        return np.repeat(decision[:, None], a.shape[1], axis=1)

    def spc(self, a: SmWord) -> np.ndarray:
        return spc_decisions(self.hd(a), a.mag)

    def h1(self, a: SmWord, beta_l=None, in_edge=None) -> np.ndarray:
        beta_r = (self._tc_sum(a, beta_l) < 0).astype(np.uint8)
        if beta_l is None:
            beta_l = np.zeros_like(beta_r)
        return h_combine(beta_l, beta_r)

    def zeros(self, frames: int, width: int) -> SmWord:
        return SmWord(np.zeros((frames, width), np.uint8), np.zeros((frames, width), np.int16))


class IbDomain(FixedDomain):
    """Sign-magnitude IB indices decoded with RCQ.

    f, SPC and hard decisions act on the indices directly. g, REP and h1
    reconstruct magnitudes through the input edge's ``lut_up``, compute in
    ``q_fp``-bit fixed point, and (g only) requantize with the output edge's
    ``lut_down``.
    """

    def __init__(self, lutset):
        super().__init__(lutset.q_fp)
        self.lutset = lutset
        self.q_ib = lutset.q_ib
        self._up = {e: np.asarray(t, dtype=np.int16) for e, t in lutset.lut_up.items()}
        self._down = {e: np.asarray(t, dtype=np.int16) for e, t in lutset.lut_down.items()}

    @property
    def name(self) -> str:
        return f"ib{self.q_ib}"

    def quantize(self, llr: np.ndarray) -> SmWord:
        return self.lutset.quantize_channel(llr)

    def _lut(self, table: dict, edge, kind: str) -> np.ndarray:
        try:
            return table[edge]
        except KeyError:
            raise KeyError(f"no {kind} LUT for edge {edge}") from None

    def reconstruct(self, a: SmWord, edge: int) -> SmWord:
        return SmWord(a.sign, self._lut(self._up, edge, "lut_up")[a.mag])

    def g(self, a: SmWord, beta=None, in_edge=None, out_edge=None) -> SmWord:
        fp = super().g(self.reconstruct(a, in_edge), beta)
        return SmWord(fp.sign, self._lut(self._down, out_edge, "lut_down")[fp.mag])

    def rep(self, a: SmWord, in_edge=None) -> np.ndarray:
        return super().rep(self.reconstruct(a, in_edge))

    def h1(self, a: SmWord, beta_l=None, in_edge=None) -> np.ndarray:
        return super().h1(self.reconstruct(a, in_edge), beta_l)


def check_domain_word(domain, word, width: int):
    """Raise if ``word`` is not a batch of ``width`` LLRs of ``domain``."""
    if isinstance(domain, FixedDomain):
        if not isinstance(word, SmWord):
            raise TypeError(f"{domain.name} decoder expects SmWord input")
        limit = max_magnitude(domain.q_ib if isinstance(domain, IbDomain) else domain.q)
        if word.mag.ndim != 2 or word.mag.shape[1] != width:
            raise ValueError(f"expected (frames, {width}) word, got {word.mag.shape}")
        if word.mag.size and (word.mag.min() < 0 or word.mag.max() > limit):
            raise ValueError(f"magnitudes outside 0..{limit}")
    else:
        if isinstance(word, SmWord):
            raise TypeError("float decoder expects a real-valued LLR array")
        if word.ndim != 2 or word.shape[1] != width:
            raise ValueError(f"expected (frames, {width}) LLRs, got {word.shape}")
