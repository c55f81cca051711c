"""Numba kernels for the hot per-character loops.

Float semantics are pinned: every accumulator adds its terms in ascending
index order, one IEEE double add per term, no fastmath and no FMA
contraction. This makes the sparse paths bit-identical to naive dense
reference implementations, which the oracle test suite asserts.

Layout convention: `w` is the canonical (n, m+n) weight matrix; `wt` is its
transposed mirror (m+n, n), kept in sync so that both the forward pass
(column sums of `w` = row sums of `wt`) and the reconstruction pass (row
sums of `w`) read contiguous memory.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NO_ERROR = -1


@njit(cache=True)
def accum_rows(mat, idx, out):
    # out[i] += sum over rows mat[idx[0]], mat[idx[1]], ... in idx order.
    for t in range(idx.shape[0]):
        r = idx[t]
        for i in range(out.shape[0]):
            out[i] += mat[r, i]


@njit(cache=True)
def block_update(w, wt, rows, cols, delta):
    # w[r, c] += delta[c] for every (r, c) in rows x cols, mirrored into wt.
    for ri in range(rows.shape[0]):
        r = rows[ri]
        for ci in range(cols.shape[0]):
            c = cols[ci]
            w[r, c] += delta[c]
    for ci in range(cols.shape[0]):
        c = cols[ci]
        dc = delta[c]
        for ri in range(rows.shape[0]):
            wt[c, rows[ri]] += dc


@njit(cache=True)
def run_chars(wt, b, m, chars, h, counts):
    """Frozen forward pass over a character sequence.

    Updates the state `h` in place after each character and accumulates the
    post-character states into `counts`. Returns the step index at which a
    non-finite pre-activation appeared, or NO_ERROR.
    """
    n = b.shape[0]
    z = np.empty(n, dtype=np.float64)
    for t in range(chars.shape[0]):
        c = chars[t]
        for i in range(n):
            z[i] = wt[c, i]
        for j in range(n):
            if h[j]:
                r = m + j
                for i in range(n):
                    z[i] += wt[r, i]
        bad = False
        for i in range(n):
            z[i] += b[i]
            if not np.isfinite(z[i]):
                bad = True
            h[i] = np.uint8(1) if z[i] > 0.0 else np.uint8(0)
        if bad:
            return t
        for i in range(n):
            counts[i] += h[i]
    return NO_ERROR


@njit(cache=True)
def train_chars(w, wt, a, b, rvec, rh, dvec, m, chars, h, use_next_state,
                state_err, input_err, active_count):
    """One unsupervised training pass over a character sequence.

    For each character: compute the next state, reconstruct the previous
    input and state from it using the pre-update parameters, then apply the
    weight and bias updates as one batch. `h` is updated in place; the three
    telemetry arrays receive one entry per character. Returns the step index
    of the first non-finite pre-activation, or NO_ERROR.
    """
    n = b.shape[0]
    mn = a.shape[0]
    z = np.empty(n, dtype=np.float64)
    hn = np.empty(n, dtype=np.uint8)
    y = np.empty(mn, dtype=np.float64)
    rb = np.empty(mn, dtype=np.uint8)
    delta = np.zeros(mn, dtype=np.float64)
    cols = np.empty(mn, dtype=np.int64)
    rows = np.empty(n, dtype=np.int64)

    for t in range(chars.shape[0]):
        c = chars[t]

        # next state: threshold of column sums at the active input positions
        for i in range(n):
            z[i] = wt[c, i]
        for j in range(n):
            if h[j]:
                r = m + j
                for i in range(n):
                    z[i] += wt[r, i]
        bad = False
        for i in range(n):
            z[i] += b[i]
            if not np.isfinite(z[i]):
                bad = True
            hn[i] = np.uint8(1) if z[i] > 0.0 else np.uint8(0)
        if bad:
            return t

        # reconstruction from the next state, pre-update parameters
        for j in range(mn):
            y[j] = 0.0
        for i in range(n):
            if hn[i]:
                for j in range(mn):
                    y[j] += w[i, j]
        for j in range(mn):
            y[j] += a[j]
            rb[j] = np.uint8(1) if y[j] > 0.0 else np.uint8(0)

        ie = 0
        for j in range(m):
            xj = 1 if j == c else 0
            if xj != rb[j]:
                ie += 1
        se = 0
        for j in range(n):
            if h[j] != rb[m + j]:
                se += 1
        ac = 0
        for i in range(n):
            ac += hn[i]
        input_err[t] = ie
        state_err[t] = se
        active_count[t] = ac

        # batch update computed from pre-update values
        ncols = 0
        for j in range(mn):
            if j < m:
                v = 1 if j == c else 0
            else:
                v = np.int64(h[j - m])
            e = v - np.int64(rb[j])
            if e != 0:
                delta[j] = rvec[j] * np.float64(e)
                cols[ncols] = j
                ncols += 1
        nrows = 0
        if use_next_state:
            for i in range(n):
                if hn[i]:
                    rows[nrows] = i
                    nrows += 1
        else:
            for i in range(n):
                if h[i]:
                    rows[nrows] = i
                    nrows += 1
        for ri in range(nrows):
            r = rows[ri]
            for ci in range(ncols):
                j = cols[ci]
                w[r, j] += delta[j]
        for ci in range(ncols):
            j = cols[ci]
            dj = delta[j]
            for ri in range(nrows):
                wt[j, rows[ri]] += dj
        for ci in range(ncols):
            j = cols[ci]
            a[j] += delta[j]
        for i in range(n):
            b[i] += rh[i] * (dvec[i] - np.float64(hn[i]))
        for i in range(n):
            h[i] = hn[i]
    return NO_ERROR
