"""Fast-SSC polar decoding with float, fixed-point and IB-quantized messages."""
from .code import PolarCode, construct_code, encode, bit_reversal_permutation
from .decoder import FastSSCDecoder, decode, sc_decode
from .pft import build_schedule, classify

__all__ = ["PolarCode", "construct_code", "encode", "bit_reversal_permutation",
           "FastSSCDecoder", "decode", "sc_decode", "build_schedule", "classify"]
__version__ = "0.1.0"
