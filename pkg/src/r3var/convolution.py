"""Exact cyclic convolution of non-negative integer vectors.

Small inputs use a direct shift-and-add; larger ones compute the linear
convolution with a real FFT padded to a fast length (prime lengths would force
the much slower Bluestein path) and fold it back to length n. The first operand
is split into limbs
small enough that float64 round-off stays far below 1/2, and every output is
checked to lie within 0.25 of the integer it is rounded to.
"""
from __future__ import annotations

import numpy as np
import scipy.fft as sfft

DIRECT_THRESHOLD = 512
# per-limb product bound keeping FFT round-off well under 0.25
_SAFE_BOUND = 2.0**40
_ROUND_TOL = 0.25


class ConvolutionPrecisionError(ArithmeticError):
    pass


def cyclic_convolve_direct(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    n = a.size
    out = np.zeros(n, dtype=np.int64)
    for i in np.flatnonzero(a):
        out += a[i] * np.roll(b, int(i))
    return out


def _fft_pass(a: np.ndarray, fb: np.ndarray, n: int, size: int) -> np.ndarray:
    lin = sfft.irfft(sfft.rfft(a.astype(np.float64), size) * fb, size)
    raw = lin[:n].copy()
    raw[: n - 1] += lin[n : 2 * n - 1]
    out = np.rint(raw)
    err = float(np.max(np.abs(raw - out))) if n else 0.0
    if err >= _ROUND_TOL:
        raise ConvolutionPrecisionError(f"FFT rounding error {err:.3g} >= {_ROUND_TOL}")
    return out.astype(np.int64)


def cyclic_convolve_fft(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.min(initial=0) < 0 or b.min(initial=0) < 0:
        raise ValueError("inputs must be non-negative")
    n = a.size
    b_mass = float(b.sum())
    if float(a.max(initial=0)) * b_mass >= 2.0**62:
        raise OverflowError("convolution values would overflow int64")
    size = sfft.next_fast_len(2 * n - 1, real=True)
    fb = sfft.rfft(b.astype(np.float64), size)
    limb_bits = 62
    while limb_bits > 1 and 2.0**limb_bits * b_mass > _SAFE_BOUND:
        limb_bits -= 1
    if float(a.max(initial=0)) * b_mass <= _SAFE_BOUND:
        return _fft_pass(a, fb, n, size)
    out = np.zeros(n, dtype=np.int64)
    mask = (1 << limb_bits) - 1
    shift = 0
    rest = a.copy()
    while rest.any():
        limb = rest & mask
        out += _fft_pass(limb, fb, n, size) << shift
        rest >>= limb_bits
        shift += limb_bits
    return out


def cyclic_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a * b)[k] = sum_i a[i] b[(k - i) mod n] for equal-length integer vectors."""
    if np.shape(a) != np.shape(b):
        raise ValueError("operands must have equal length")
    if np.size(a) < DIRECT_THRESHOLD:
        return cyclic_convolve_direct(a, b)
    return cyclic_convolve_fft(a, b)
