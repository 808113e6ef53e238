import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.exceptions import NotFittedError

from polarib.code import PolarCode, construct_code, encode
from polarib.decoder import FastSSCDecoder, decode, sc_decode
from polarib.ib import LutSet
from polarib.kernels import FixedDomain, FloatDomain, IbDomain, h_combine
from polarib.numerics import SmWord
from polarib.pft import build_schedule
from polarib.sim import ChannelParams, channel_llrs


def sm(pairs):
    """One-frame SmWord from (sign, magnitude) pairs."""
    s, m = zip(*pairs)
    return SmWord(np.array([s], dtype=np.uint8), np.array([m], dtype=np.int16))


def row(x):
    return np.array([x], dtype=float)


FLOAT = FloatDomain()
FP5 = FixedDomain(5)


# -- kernels ------------------------------------------------------------------

def test_f_kernels():
    assert FLOAT.f(row([3.0, -2.0]))[0, 0] == -2.0
    out = FP5.f(sm([(0, 4), (1, 4)]))
    assert (out.sign[0, 0], out.mag[0, 0]) == (1, 4)
    # 3-bit index table: t = -3 is (1, 3), t = +1 is (0, 1)
    out = FixedDomain(3).f(sm([(1, 3), (0, 1)]))
    assert (out.sign[0, 0], out.mag[0, 0]) == (1, 1)


def test_g_kernels():
    assert FLOAT.g(row([2.0, 3.0]), np.array([[0]]))[0, 0] == 5.0
    assert FLOAT.g(row([2.0, 3.0]), np.array([[1]]))[0, 0] == 1.0
    assert FLOAT.g(row([-1.0, 4.0]))[0, 0] == 3.0
    out = FP5.g(sm([(0, 15), (0, 15)]), np.array([[0]], dtype=np.uint8))
    assert (out.sign[0, 0], out.mag[0, 0]) == (0, 15)


def test_g0_equals_g_with_zero_beta():
    d = FixedDomain(4)
    for s1, m1, s2, m2 in itertools.product([0, 1], range(8), [0, 1], range(8)):
        a = sm([(s1, m1), (s2, m2)])
        x, y = d.g(a), d.g(a, np.zeros((1, 1), dtype=np.uint8))
        assert (x.sign[0, 0], x.mag[0, 0]) == (y.sign[0, 0], y.mag[0, 0])


def test_h_kernel():
    np.testing.assert_array_equal(h_combine(np.array([[1]]), np.array([[0]])), [[1, 0]])
    np.testing.assert_array_equal(h_combine(np.array([[0, 1]]), np.array([[1, 1]])), [[1, 1, 0, 1]])


def test_hard_decisions():
    assert FLOAT.hd(row([0.0]))[0, 0] == 0
    assert FP5.hd(sm([(1, 0)]))[0, 0] == 1
    assert FixedDomain(3).hd(sm([(0, 2)]))[0, 0] == 0


def test_rep_kernel():
    np.testing.assert_array_equal(FLOAT.rep(row([1, -3, 1, -1])), [[1, 1, 1, 1]])
    np.testing.assert_array_equal(FLOAT.rep(row([1, -1])), [[0, 0]])
    np.testing.assert_array_equal(FP5.rep(sm([(0, 15)] * 4)), [[0, 0, 0, 0]])
    # the sum is exact: four +15 against three -15 and a -14 stays positive
    np.testing.assert_array_equal(FP5.rep(sm([(0, 15)] * 4 + [(1, 15)] * 3 + [(1, 14)])), [[0] * 8])


def test_spc_kernel():
    np.testing.assert_array_equal(FLOAT.spc(row([2, -1, 3, 4])), [[0, 0, 0, 0]])
    np.testing.assert_array_equal(FLOAT.spc(row([2, -1, -3, 4])), [[0, 1, 1, 0]])
    np.testing.assert_array_equal(FLOAT.spc(row([1, 2, 3, 4])), [[0, 0, 0, 0]])


def test_spc_matches_brute_force_ml():
    rng = np.random.default_rng(3)
    words = list(itertools.product([0, 1], repeat=4))
    even = np.array([w for w in words if sum(w) % 2 == 0])
    for _ in range(200):
        a = rng.normal(size=4) * 3
        ml = even[np.argmax((1 - 2 * even) @ a)]
        np.testing.assert_array_equal(FLOAT.spc(a[None])[0], ml)


def test_h1_kernel():
    # g(2, 3, 0) = 5 and g(-1, 4, 1) = 5, so beta_r = (0, 0)
    out = FLOAT.h1(row([2, 3, -1, 4]), np.array([[0, 1]], dtype=np.uint8))
    np.testing.assert_array_equal(out, [[0, 0, 1, 0]])
    np.testing.assert_array_equal(FLOAT.h1(row([1, 2, 3, 4])), [[0, 0, 0, 0]])


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=50, deadline=None)
def test_kernel_properties(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(5, 8)) * 4
    swapped = a.reshape(5, 4, 2)[:, :, ::-1].reshape(5, 8)
    np.testing.assert_array_equal(FLOAT.f(a), FLOAT.f(swapped))
    np.testing.assert_array_equal(FLOAT.f(-a), FLOAT.f(a))
    beta = rng.integers(0, 2, (5, 4), dtype=np.uint8)
    np.testing.assert_allclose(FLOAT.g(-a, beta), -FLOAT.g(a, beta))
    spc = FLOAT.spc(a)
    assert not np.bitwise_xor.reduce(spc, axis=1).any()
    rep = FLOAT.rep(a)
    assert np.all(rep == rep[:, :1])
    w = FP5.quantize(a)
    neg = SmWord(1 - w.sign, w.mag)
    gp, gn = FP5.g(w, beta), FP5.g(neg, beta)
    np.testing.assert_array_equal(gp.mag, gn.mag)
    nz = gp.mag > 0
    np.testing.assert_array_equal(gp.sign[nz], 1 - gn.sign[nz])


# -- decoder ------------------------------------------------------------------

def noisy_frames(code, frames, ebn0, seed):
    rng = np.random.default_rng(seed)
    u = rng.integers(0, 2, (frames, code.k), dtype=np.uint8)
    x = encode(code, u)
    return u, x, channel_llrs(x, ChannelParams(ebn0, code.rate), rng)


@pytest.mark.parametrize("n, k", [(4, 8), (7, 64)])
def test_fast_ssc_equals_sc_float(n, k):
    code = construct_code(n, k, 2.5)
    _, _, llr = noisy_frames(code, 2000, 1.5, 11)
    dom = FloatDomain()
    _, x_fast = decode(dom, build_schedule(code), code, llr)
    np.testing.assert_array_equal(x_fast, sc_decode(dom, code.frozen_mask, llr))


@pytest.mark.parametrize("domain, kw", [("float", {}), ("fp", {"q_fp": 4}), ("fp", {"q_fp": 6})])
def test_noiseless_recovery(domain, kw):
    code = construct_code(7, 64, 2.5)
    rng = np.random.default_rng(0)
    u = rng.integers(0, 2, (200, 64), dtype=np.uint8)
    x = encode(code, u)
    dec = FastSSCDecoder(code, domain, **kw).fit()
    u_hat, x_hat = dec.decode(20.0 * (1.0 - 2.0 * x))
    np.testing.assert_array_equal(u_hat, u)
    np.testing.assert_array_equal(x_hat, x)
    assert dec.score(20.0 * (1.0 - 2.0 * x), x) == 1.0


def identity_lutset(code, q_ib, step):
    """IB tables that reproduce the FP(q_ib) decoder exactly: up doubles, down halves."""
    sched = build_schedule(code)
    half = 1 << (q_ib - 1)
    up = np.arange(half) * 2
    down = np.minimum(np.arange(2 * half) // 2, half - 1)
    thresholds = (np.arange(1, half) - 0.5) * step
    return LutSet(q_ib, q_ib + 1, thresholds, {e: up for e in range(sched.edge_count)},
                  {e: down for e in range(sched.edge_count)}, step / 2, {"N": code.N})


def test_identity_lutset_matches_fixed_point():
    code = construct_code(7, 64, 2.5)
    step = 0.8
    lutset = identity_lutset(code, 4, step)
    lutset.check()
    _, _, llr = noisy_frames(code, 3000, 2.0, 5)
    ib = FastSSCDecoder(code, "ib", lutset=lutset).fit()
    fp = FastSSCDecoder(code, "fp", q_fp=4, channel_step=step).fit()
    np.testing.assert_array_equal(ib.predict(llr), fp.predict(llr))


def test_ib_missing_lut_raises():
    code = construct_code(4, 8, 2.5)
    lutset = identity_lutset(code, 3, 1.0)
    del lutset.lut_up[1]
    dom = IbDomain(lutset)
    with pytest.raises(KeyError, match="no lut_up"):
        dom.g(sm([(0, 1), (0, 1)]), np.zeros((1, 1), dtype=np.uint8), in_edge=1, out_edge=2)


def test_lutset_edge_count_checked():
    lutset = identity_lutset(construct_code(4, 8, 2.5), 3, 1.0)
    with pytest.raises(ValueError):
        FastSSCDecoder(construct_code(5, 16, 2.5), "ib", lutset=lutset).fit()


def test_estimator_api():
    code = construct_code(4, 8)
    dec = FastSSCDecoder(code, "fp", q_fp=5)
    assert dec.get_params()["q_fp"] == 5
    with pytest.raises(NotFittedError):
        dec.predict(np.zeros((1, 16)))
    dec.set_params(q_fp=6).fit()
    assert dec.domain_.q == 6
    with pytest.raises(ValueError):
        FastSSCDecoder(code, "complex").fit()
    with pytest.raises(ValueError):
        dec.predict(np.zeros((1, 15)))
    with pytest.raises(ValueError):
        dec.predict(np.full((1, 16), np.nan))


def test_all_frozen_decodes_to_zero():
    code = PolarCode(3, 0, np.ones(8, dtype=np.uint8))
    u_hat, x_hat = FastSSCDecoder(code).fit().decode(np.random.default_rng(0).normal(size=(4, 8)))
    assert u_hat.shape == (4, 0) and not x_hat.any()
