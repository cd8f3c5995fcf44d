# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# cython: language_level=3
"""Compiled kernel for skip-gram negative-sampling updates.

Mirrors _sgns_numpy.train_sentence: identical RNG stream and update order,
so the two backends stay interchangeable. The heavy loop runs without the
GIL, which also enables lock-free multi-worker training.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log1p


cdef inline unsigned long long _lcg_next(unsigned long long s) nogil:
    return s * 6364136223846793005ULL + 1442695040888963407ULL


cdef inline double _lcg_uniform(unsigned long long* s) nogil:
    s[0] = _lcg_next(s[0])
    return <double>(s[0] >> 11) * (1.0 / 9007199254740992.0)


cdef inline long _lcg_randint(unsigned long long* s, long n) nogil:
    s[0] = _lcg_next(s[0])
    return <long>((s[0] >> 32) % (<unsigned long long>n))


cdef inline long _sample(const double[::1] cdf, double u) nogil:
    # index of the first cdf entry strictly greater than u (bisect_right)
    cdef long lo = 0
    cdef long hi = cdf.shape[0]
    cdef long mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if cdf[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline double _softplus(double x) nogil:
    if x > 0:
        return x + log1p(exp(-x))
    return log1p(exp(x))


cdef double _train(
    double[:, ::1] W, double[:, ::1] C, double[:, ::1] F,
    const long long[::1] foff, const int[::1] fids,
    const double[::1] cdf, const double[::1] keep_prob, bint subsample,
    const int[::1] sent, int window, int negatives, double alpha,
    unsigned long long* state, int[::1] kept, double[::1] u,
    double[::1] grad, long long[::1] tgt, double[::1] gbuf,
    long* pairs_out,
) nogil:
    cdef int n_sent = sent.shape[0]
    cdef int dim = W.shape[1]
    cdef int n = 0
    cdef int i, j, d, a, m
    cdef int lo, hi, win
    cdef long center, ctx, t, k, nf
    cdef long long k0, k1, kk
    cdef double f, sig, g, coef, u01
    cdef double loss = 0.0
    cdef long pairs = 0

    if subsample:
        for i in range(n_sent):
            u01 = _lcg_uniform(state)
            if u01 < keep_prob[sent[i]]:
                kept[n] = sent[i]
                n += 1
    else:
        for i in range(n_sent):
            kept[i] = sent[i]
        n = n_sent

    for i in range(n):
        center = kept[i]
        win = window - <int>_lcg_randint(state, window)
        lo = i - win
        if lo < 0:
            lo = 0
        hi = i + win
        if hi > n - 1:
            hi = n - 1
        k0 = foff[center]
        k1 = foff[center + 1]
        nf = k1 - k0
        for j in range(lo, hi + 1):
            if j == i:
                continue
            ctx = kept[j]

            # composed input: word vector plus feature mean
            if nf > 0:
                for d in range(dim):
                    u[d] = 0.0
                for kk in range(k0, k1):
                    t = fids[kk]
                    for d in range(dim):
                        u[d] += F[t, d]
                for d in range(dim):
                    u[d] = W[center, d] + u[d] / nf
            else:
                for d in range(dim):
                    u[d] = W[center, d]

            tgt[0] = ctx
            m = 1
            for k in range(negatives):
                u01 = _lcg_uniform(state)
                t = _sample(cdf, u01)
                if t == ctx:
                    continue
                tgt[m] = t
                m += 1

            # dots and gradients from pre-update context rows
            for d in range(dim):
                grad[d] = 0.0
            for a in range(m):
                t = tgt[a]
                f = 0.0
                for d in range(dim):
                    f += u[d] * C[t, d]
                sig = 1.0 / (1.0 + exp(-f))
                if a == 0:
                    g = sig - 1.0
                    loss += _softplus(-f)
                else:
                    g = sig
                    loss += _softplus(f)
                gbuf[a] = alpha * g
                for d in range(dim):
                    grad[d] += g * C[t, d]
            for a in range(m):
                t = tgt[a]
                for d in range(dim):
                    C[t, d] -= gbuf[a] * u[d]
            for d in range(dim):
                W[center, d] -= alpha * grad[d]
            if nf > 0:
                coef = alpha / nf
                for kk in range(k0, k1):
                    t = fids[kk]
                    for d in range(dim):
                        F[t, d] -= coef * grad[d]
            pairs += 1

    pairs_out[0] = pairs
    return loss


def train_sentence(
    double[:, ::1] word_vecs,
    double[:, ::1] ctx_vecs,
    double[:, ::1] feat_vecs,
    long long[::1] feat_offsets,
    int[::1] feat_ids,
    double[::1] neg_cdf,
    double[::1] keep_prob,
    bint subsample,
    int[::1] sent,
    int window,
    int negatives,
    double alpha,
    unsigned long long state,
):
    """Drop-in replacement for _sgns_numpy.train_sentence (see its docstring)."""
    cdef int n = sent.shape[0]
    cdef int dim = word_vecs.shape[1]
    kept_arr = np.empty(max(n, 1), dtype=np.int32)
    u_arr = np.empty(dim, dtype=np.float64)
    grad_arr = np.empty(dim, dtype=np.float64)
    tgt_arr = np.empty(negatives + 1, dtype=np.int64)
    g_arr = np.empty(negatives + 1, dtype=np.float64)
    cdef int[::1] kept = kept_arr
    cdef double[::1] u = u_arr
    cdef double[::1] grad = grad_arr
    cdef long long[::1] tgt = tgt_arr
    cdef double[::1] gbuf = g_arr
    cdef unsigned long long st = state
    cdef long pairs = 0
    cdef double loss
    with nogil:
        loss = _train(
            word_vecs, ctx_vecs, feat_vecs, feat_offsets, feat_ids,
            neg_cdf, keep_prob, subsample, sent, window, negatives, alpha,
            &st, kept, u, grad, tgt, gbuf, &pairs,
        )
    return st, loss, pairs
