"""Hot enumeration kernels: exact log-sum-exp over all 2^N configurations.

Each kernel exists twice: a numba-jitted scalar loop and a chunked
vectorized numpy fallback.  ``GREMPHASE_BACKEND`` picks the dispatch (see
_backend); both give the same result up to summation order.

Configuration encoding: integer s in [0, 2^N); spin j (1-based) is +1 when
bit (N - j) of s is 0, so the first spins are the most significant bits and
the level-k tree prefix is simply s >> (N - n_k).
"""
from __future__ import annotations

import math

import numpy as np

from ._backend import USE_NUMBA

_CHUNK_BITS = 18


def _lse_merge(m1: float, a1: float, m2: float, a2: float) -> tuple[float, float]:
    """Merge two (max, sum-of-exp-shifted) accumulators."""
    if m1 == -math.inf:
        return m2, a2
    if m2 == -math.inf:
        return m1, a1
    if m1 >= m2:
        return m1, a1 + a2 * math.exp(m2 - m1)
    return m2, a2 + a1 * math.exp(m1 - m2)


def _low_field_sums(h_weights: np.ndarray, n_spins: int, low_bits: int) -> np.ndarray:
    """Longitudinal field sums of the last ``low_bits`` spins for every
    low-bit pattern, built by doubling (bit 0 is the last spin)."""
    out = np.zeros(1)
    for j in range(n_spins, n_spins - low_bits, -1):
        w = h_weights[j - 1]
        out = np.concatenate([out + w, out - w])
    return out


def _high_field_sum(h_weights: np.ndarray, n_spins: int, low_bits: int, high: int) -> float:
    total = 0.0
    for j in range(1, n_spins - low_bits + 1):
        bit = (high >> (n_spins - low_bits - j)) & 1
        total += -h_weights[j - 1] if bit else h_weights[j - 1]
    return total


def _tree_energy_chunk(
    s_arr: np.ndarray,
    xcat: np.ndarray,
    offsets: np.ndarray,
    shifts: np.ndarray,
    coefs: np.ndarray,
) -> np.ndarray:
    u = np.zeros(len(s_arr))
    for k in range(len(coefs)):
        u += coefs[k] * xcat[offsets[k] + (s_arr >> int(shifts[k]))]
    return u


def lse_iid_numpy(xcat, offsets, shifts, coefs, h_weights, beta, n_spins) -> float:
    total = 1 << n_spins
    low_bits = min(n_spins, _CHUNK_BITS)
    chunk = 1 << low_bits
    h_low = _low_field_sums(h_weights, n_spins, low_bits)
    m, acc = -math.inf, 0.0
    for base in range(0, total, chunk):
        s_arr = np.arange(base, base + chunk, dtype=np.int64)
        u = _tree_energy_chunk(s_arr, xcat, offsets, shifts, coefs)
        h_high = _high_field_sum(h_weights, n_spins, low_bits, base >> low_bits)
        e = beta * (h_high + h_low - u)
        cm = float(e.max())
        ca = float(np.exp(e - cm).sum())
        m, acc = _lse_merge(m, acc, cm, ca)
    return (m + math.log(acc)) / n_spins


def lse_hier_numpy(xcat, offsets, shifts, coefs, hier_tab, beta, n_spins) -> float:
    total = 1 << n_spins
    chunk = 1 << min(n_spins, _CHUNK_BITS)
    m, acc = -math.inf, 0.0
    for base in range(0, total, chunk):
        s_arr = np.arange(base, base + chunk, dtype=np.int64)
        u = _tree_energy_chunk(s_arr, xcat, offsets, shifts, coefs)
        # first disagreement with the all-plus state: N - msb(s); exact via
        # frexp since s < 2^53
        _, exp2 = np.frexp(s_arr.astype(np.float64))
        j_first = np.where(s_arr == 0, n_spins, n_spins - (exp2 - 1))
        h_vals = hier_tab[j_first]
        e = beta * (h_vals - u)
        cm = float(e.max())
        ca = float(np.exp(e - cm).sum())
        m, acc = _lse_merge(m, acc, cm, ca)
    return (m + math.log(acc)) / n_spins


if USE_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _lse_iid_jit(xcat, offsets, shifts, coefs, h_weights, h_low, low_bits, n_spins, beta):
        nlev = len(coefs)
        n_high = n_spins - low_bits
        chunk = 1 << low_bits
        m = -1.0e308
        acc = 0.0
        for high in range(1 << n_high):
            h_high = 0.0
            for j in range(n_high):
                if (high >> (n_high - 1 - j)) & 1:
                    h_high -= h_weights[j]
                else:
                    h_high += h_weights[j]
            base = high << low_bits
            for off in range(chunk):
                s = base + off
                u = 0.0
                for k in range(nlev):
                    u += coefs[k] * xcat[offsets[k] + (s >> shifts[k])]
                e = beta * (h_high + h_low[off] - u)
                if e > m:
                    acc = acc * math.exp(m - e) + 1.0
                    m = e
                else:
                    acc += math.exp(e - m)
        return (m + math.log(acc)) / n_spins

    @njit(cache=True)
    def _lse_hier_jit(xcat, offsets, shifts, coefs, hier_tab, beta, n_spins):
        total = 1 << n_spins
        nlev = len(coefs)
        m = -1.0e308
        acc = 0.0
        msb = -1
        next_pow = 1
        for s in range(total):
            if s == next_pow:
                msb += 1
                next_pow <<= 1
            u = 0.0
            for k in range(nlev):
                u += coefs[k] * xcat[offsets[k] + (s >> shifts[k])]
            if s == 0:
                hs = hier_tab[n_spins]
            else:
                hs = hier_tab[n_spins - msb]
            e = beta * (hs - u)
            if e > m:
                acc = acc * math.exp(m - e) + 1.0
                m = e
            else:
                acc += math.exp(e - m)
        return (m + math.log(acc)) / n_spins

    def lse_iid_numba(xcat, offsets, shifts, coefs, h_weights, beta, n_spins) -> float:
        low_bits = min(n_spins, _CHUNK_BITS)
        h_low = _low_field_sums(h_weights, n_spins, low_bits)
        return float(
            _lse_iid_jit(
                xcat,
                offsets.astype(np.int64),
                shifts.astype(np.int64),
                coefs,
                h_weights,
                h_low,
                low_bits,
                n_spins,
                beta,
            )
        )

    def lse_hier_numba(xcat, offsets, shifts, coefs, hier_tab, beta, n_spins) -> float:
        return float(
            _lse_hier_jit(
                xcat,
                offsets.astype(np.int64),
                shifts.astype(np.int64),
                coefs,
                hier_tab,
                beta,
                n_spins,
            )
        )

    lse_iid = lse_iid_numba
    lse_hier = lse_hier_numba
else:
    lse_iid_numba = None
    lse_hier_numba = None
    lse_iid = lse_iid_numpy
    lse_hier = lse_hier_numpy
