"""Polar code construction, frozen-set files and encoding."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True, eq=False)
class PolarCode:
    """A polar code ``P(N, K)``.

    ``frozen_mask[i] == 1`` freezes leaf ``i`` of the decoding tree (natural
    order, before the bit-reversal of the transmitted codeword).
    """

    n: int
    k: int
    frozen_mask: np.ndarray
    construction: dict = field(default_factory=dict)

    def __post_init__(self):
        mask = np.asarray(self.frozen_mask, dtype=np.uint8).copy()
        mask.setflags(write=False)
        object.__setattr__(self, "frozen_mask", mask)
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if mask.shape != (1 << self.n,):
            raise ValueError(f"frozen mask length {mask.size} != N = {1 << self.n}")
        if not np.isin(mask, (0, 1)).all():
            raise ValueError("frozen mask must be binary")
        if int(mask.sum()) != self.N - self.k:
            raise ValueError(f"mask freezes {int(mask.sum())} bits, expected N-K = {self.N - self.k}")

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def rate(self) -> float:
        return self.k / self.N

    @property
    def info_positions(self) -> np.ndarray:
        return np.flatnonzero(self.frozen_mask == 0)

    def __eq__(self, other):
        if not isinstance(other, PolarCode):
            return NotImplemented
        return (self.n, self.k) == (other.n, other.k) and np.array_equal(
            self.frozen_mask, other.frozen_mask
        )

    def __hash__(self):
        return hash((self.n, self.k, self.frozen_mask.tobytes()))

    def __repr__(self):
        return f"PolarCode(N={self.N}, K={self.k}, {self.construction})"


def bhattacharyya_parameters(n: int, design_ebn0_db: float, rate: float) -> np.ndarray:
    """Bhattacharyya bound of every leaf, in tree (natural) order.

    Leaf ``2i`` is the degraded (check-node) child of ``i`` one level up.
    """
    z = np.array([np.exp(-rate * 10.0 ** (design_ebn0_db / 10.0))])
    for _ in range(n):
        nxt = np.empty(2 * z.size)
        nxt[0::2] = 2 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z


def construct_code(n: int, k: int, design_ebn0_db: float = 0.0,
                   method: str = "bhattacharyya", path: str | Path | None = None) -> PolarCode:
    N = 1 << n
    if not 0 <= k <= N:
        raise ValueError(f"k = {k} outside 0..{N}")
    if method == "file":
        if path is None:
            raise ValueError("file construction needs a path")
        code = load_frozen_file(path)
        if (code.n, code.k) != (n, k):
            raise ValueError(f"{path} holds P({code.N},{code.k}), expected P({N},{k})")
        return code
    if method != "bhattacharyya":
        raise ValueError(f"unknown construction method {method!r}")
    z = bhattacharyya_parameters(n, design_ebn0_db, k / N if N else 0.0)
    # stable sort: ties freeze the lower index first
    worst = np.argsort(-z, kind="stable")[: N - k]
    mask = np.zeros(N, dtype=np.uint8)
    mask[worst] = 1
    return PolarCode(n, k, mask, {"method": "bhattacharyya", "design_ebn0_db": float(design_ebn0_db)})


def bit_reversal_permutation(i: int, n: int) -> int:
    if not 0 <= i < (1 << n):
        raise ValueError(f"index {i} outside 0..{(1 << n) - 1}")
    out = 0
    for _ in range(n):
        out = (out << 1) | (i & 1)
        i >>= 1
    return out


def bit_reversal_indices(n: int) -> np.ndarray:
    return np.array([bit_reversal_permutation(i, n) for i in range(1 << n)], dtype=np.intp)


def polar_transform(v: np.ndarray) -> np.ndarray:
    """Multiply bit vectors (last axis) by ``F^{(x)n}`` with ``F = [[1,0],[1,1]]``."""
    x = np.array(v, dtype=np.uint8, copy=True)
    N = x.shape[-1]
    span = 1
    while span < N:
        x = x.reshape(*x.shape[:-1], N // (2 * span), 2, span)
        x[..., 0, :] ^= x[..., 1, :]
        x = x.reshape(*x.shape[:-3], N)
        span *= 2
    return x


def tree_encode(v: np.ndarray) -> np.ndarray:
    """Polar transform followed by bit reversal; an involution on length-N words."""
    v = np.asarray(v, dtype=np.uint8)
    n = int(np.log2(v.shape[-1]))
    return polar_transform(v)[..., bit_reversal_indices(n)]


def scatter(code: PolarCode, u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=np.uint8)
    if u.shape[-1] != code.k:
        raise ValueError(f"information word has length {u.shape[-1]}, expected K = {code.k}")
    v = np.zeros(u.shape[:-1] + (code.N,), dtype=np.uint8)
    v[..., code.info_positions] = u
    return v


def encode(code: PolarCode, u: np.ndarray) -> np.ndarray:
    """Encode one information word (shape ``(K,)``) or a batch ``(frames, K)``."""
    return tree_encode(scatter(code, u))


def extract_info(code: PolarCode, x: np.ndarray) -> np.ndarray:
    """Recover the information bits from a codeword estimate."""
    return tree_encode(x)[..., code.info_positions]


def save_frozen_file(code: PolarCode, path: str | Path) -> None:
    text = f"{code.N} {code.k}\n{''.join(map(str, code.frozen_mask.tolist()))}\n"
    Path(path).write_text(text)


def load_frozen_file(path: str | Path) -> PolarCode:
    lines = Path(path).read_text().split()
    try:
        N, k = int(lines[0]), int(lines[1])
        mask_text = lines[2]
    except (IndexError, ValueError) as exc:
        raise ValueError(f"malformed frozen-set file {path}") from exc
    if len(lines) != 3 or len(mask_text) != N or set(mask_text) - {"0", "1"}:
        raise ValueError(f"malformed frozen-set file {path}")
    n = N.bit_length() - 1
    if N < 2 or 1 << n != N:
        raise ValueError(f"code length {N} is not a power of two >= 2")
    mask = np.frombuffer(mask_text.encode(), dtype=np.uint8) - ord("0")
    return PolarCode(n, k, mask, {"method": "file", "path": str(path)})
