import io

import numpy as np
import pytest

from polarib.code import construct_code, encode
from polarib.decoder import FastSSCDecoder
from polarib.sim import (
    CSV_HEADER, ChannelParams, FerPoint, StopRule, batch_rng, channel_llrs,
    default_channel_step, default_design_ebn0, ebn0_at_fer, measure_fer, read_csv, sweep,
    write_csv,
)


def test_channel_params():
    p = ChannelParams(0.0, 0.5)
    assert p.sigma2 == pytest.approx(1.0)
    assert p.mean_llr == pytest.approx(2.0)


def test_llr_statistics_are_consistent():
    params = ChannelParams(2.0, 0.5)
    llr = channel_llrs(np.zeros((200, 500), dtype=np.uint8), params, np.random.default_rng(0))
    assert llr.mean() == pytest.approx(params.mean_llr, rel=0.01)
    # consistent Gaussian LLRs have variance twice the mean
    assert llr.var() == pytest.approx(2 * params.mean_llr, rel=0.02)
    clean = channel_llrs(np.array([[0, 1]], dtype=np.uint8), params, None, noise=False)
    np.testing.assert_allclose(clean, [[params.mean_llr, -params.mean_llr]])


def test_batch_streams_are_independent():
    a = batch_rng(1, 0, 0).random(4)
    np.testing.assert_array_equal(a, batch_rng(1, 0, 0).random(4))
    assert not np.array_equal(a, batch_rng(1, 0, 1).random(4))
    assert not np.array_equal(a, batch_rng(1, 1, 0).random(4))


def test_stop_rule_validation():
    with pytest.raises(ValueError):
        StopRule(min_errors=0)
    with pytest.raises(ValueError):
        StopRule(batch_size=0)


def test_measure_fer_stops_on_errors_and_caps():
    dec = FastSSCDecoder(construct_code(5, 16, 2.0)).fit()
    pt = measure_fer(dec, ChannelParams(0.0, 0.5), StopRule(min_errors=50, max_frames=10**6, batch_size=100))
    assert pt.frame_errors >= 50 and not pt.capped
    assert pt.frames % 100 == 0
    pt = measure_fer(dec, ChannelParams(8.0, 0.5), StopRule(min_errors=50, max_frames=300, batch_size=100))
    assert pt.capped and pt.frames == 300


def test_results_independent_of_workers():
    dec = FastSSCDecoder(construct_code(6, 32, 2.0), "fp", q_fp=5).fit()
    stop = StopRule(min_errors=40, max_frames=20_000, batch_size=500)
    one = list(sweep(dec, [1.0, 2.0], stop, seed=9, workers=1))
    three = list(sweep(dec, [1.0, 2.0], stop, seed=9, workers=3))
    assert one == three


def _same_noise_errors(dec, ebn0_db, frames, seed):
    """Frame errors for the all-zero and a random codeword under identical noise."""
    code = dec.code
    params = ChannelParams(ebn0_db, code.rate)
    rng = np.random.default_rng(seed)
    u = rng.integers(0, 2, (frames, code.k), dtype=np.uint8)
    x = encode(code, u)
    llr0 = channel_llrs(np.zeros_like(x), params, rng)
    llrx = llr0 * (1.0 - 2.0 * x)
    return (dec.predict(llr0) != 0).any(1), (dec.predict(llrx) != x).any(1)


def test_float_decoder_is_codeword_symmetric():
    dec = FastSSCDecoder(construct_code(6, 32, 2.0), "float").fit()
    zero, rand = _same_noise_errors(dec, 2.0, 4000, 1)
    assert zero.sum() > 100
    np.testing.assert_array_equal(zero, rand)


def test_all_zero_matches_random_codewords():
    dec = FastSSCDecoder(construct_code(6, 32, 2.0), "float").fit()
    stop = StopRule(min_errors=400, max_frames=10**6, batch_size=2000)
    rnd = measure_fer(dec, ChannelParams(2.0, 0.5), stop, seed=1)
    zero = measure_fer(dec, ChannelParams(2.0, 0.5), stop, seed=2, all_zero=True)
    se = np.sqrt(rnd.fer * (1 - rnd.fer) / rnd.frames + zero.fer * (1 - zero.fer) / zero.frames)
    assert abs(rnd.fer - zero.fer) <= 3 * se


def test_fixed_point_zero_ties_favour_the_zero_codeword():
    # an exact 0 sum decides bit 0, so fixed point is not codeword-symmetric;
    # this is why simulations send random codewords by default
    dec = FastSSCDecoder(construct_code(6, 32, 2.0), "fp", q_fp=5).fit()
    zero, rand = _same_noise_errors(dec, 2.0, 4000, 5)
    assert zero.sum() < rand.sum()


def test_csv_roundtrip():
    pts = [FerPoint(1.5, 1000, 120, 900, 0.12, 3, False), FerPoint(2.0, 5000, 10, 40, 0.002, 3, True)]
    buf = io.StringIO()
    write_csv(pts, buf)
    text = buf.getvalue()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert read_csv(text) == pts
    buf = io.StringIO()
    write_csv(pts, buf, gnuplot=True)
    assert buf.getvalue().startswith("#")


def test_ebn0_at_fer_log_linear():
    pts = [FerPoint(1.0, 1, 1, 0, 1e-2, 0, False), FerPoint(2.0, 1, 1, 0, 1e-4, 0, False)]
    assert ebn0_at_fer(pts, 1e-3) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        ebn0_at_fer(pts, 1e-5)


def test_design_defaults():
    assert default_design_ebn0(construct_code(7, 64)) == 4.5
    assert default_design_ebn0(construct_code(10, 512)) == 3.25
    # one LSB for every width
    assert default_channel_step(4, 4.5, 0.5) == default_channel_step(6, 4.5, 0.5)
