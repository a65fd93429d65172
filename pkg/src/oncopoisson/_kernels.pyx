# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling kernel.

Implements the same counter-based Philox4x64-10 stream as
:mod:`oncopoisson.streams` (verified bit-for-bit in the test suite) and
interprets :class:`~oncopoisson.point_process.SamplingPlan` tables with the
identical stream-consumption order as the pure-Python sampler, so both
backends produce identical trajectories.  The cohort entry point releases
the GIL, which lets the caller spread index ranges across threads.
"""

from libc.math cimport INFINITY, log1p, pow
from libc.stdlib cimport free, malloc, realloc

import numpy as np

cdef extern from *:
    """
    #include <stdint.h>

    typedef struct {
        uint64_t ctr[4];
        uint64_t key[2];
        uint64_t buf[4];
        int pos;
    } opx_philox;

    static const uint64_t OPX_M0 = 0xD2E7470EE14C6C93ULL;
    static const uint64_t OPX_M1 = 0xCA5A826395121157ULL;
    static const uint64_t OPX_W0 = 0x9E3779B97F4A7C15ULL;
    static const uint64_t OPX_W1 = 0xBB67AE8584CAA73BULL;

    static inline void opx_init(opx_philox *st, uint64_t k0, uint64_t k1) {
        st->ctr[0] = st->ctr[1] = st->ctr[2] = st->ctr[3] = 0;
        st->key[0] = k0;
        st->key[1] = k1;
        st->pos = 4; /* forces a fresh block on the first draw */
    }

    static inline void opx_block(opx_philox *st) {
        uint64_t c0 = st->ctr[0], c1 = st->ctr[1], c2 = st->ctr[2], c3 = st->ctr[3];
        uint64_t k0 = st->key[0], k1 = st->key[1];
        int i;
        for (i = 0; i < 10; i++) {
            __uint128_t p0 = (__uint128_t)OPX_M0 * c0;
            __uint128_t p2 = (__uint128_t)OPX_M1 * c2;
            uint64_t hi0 = (uint64_t)(p0 >> 64), lo0 = (uint64_t)p0;
            uint64_t hi2 = (uint64_t)(p2 >> 64), lo2 = (uint64_t)p2;
            uint64_t n0 = hi2 ^ c1 ^ k0;
            uint64_t n1 = lo2;
            uint64_t n2 = hi0 ^ c3 ^ k1;
            uint64_t n3 = lo0;
            c0 = n0; c1 = n1; c2 = n2; c3 = n3;
            k0 += OPX_W0; k1 += OPX_W1;
        }
        st->buf[0] = c0; st->buf[1] = c1; st->buf[2] = c2; st->buf[3] = c3;
    }

    static inline uint64_t opx_next64(opx_philox *st) {
        if (st->pos < 4) {
            return st->buf[st->pos++];
        }
        /* counter is bumped (with carry) before each new block */
        st->ctr[0]++;
        if (st->ctr[0] == 0) {
            st->ctr[1]++;
            if (st->ctr[1] == 0) {
                st->ctr[2]++;
                if (st->ctr[2] == 0) st->ctr[3]++;
            }
        }
        opx_block(st);
        st->pos = 1;
        return st->buf[0];
    }

    static inline double opx_next_double(opx_philox *st) {
        return (double)(opx_next64(st) >> 11) * (1.0 / 9007199254740992.0);
    }

    static inline double opx_next_positive(opx_philox *st) {
        double u = opx_next_double(st);
        while (u == 0.0) u = opx_next_double(st);
        return u;
    }
    """
    ctypedef struct opx_philox:
        pass
    void opx_init(opx_philox *st, unsigned long long k0, unsigned long long k1) nogil
    unsigned long long opx_next64(opx_philox *st) nogil
    double opx_next_double(opx_philox *st) nogil
    double opx_next_positive(opx_philox *st) nogil


# Method/kind codes and piece-table columns; keep in sync with point_process.py.
cdef enum:
    METHOD_INVERSION = 0
    KIND_CONSTANT = 0
    KIND_POWER_LAW = 1
    COL_START = 0
    COL_END = 1
    COL_RL = 2
    COL_RR = 3
    COL_BOUND = 4
    COL_IA = 5
    COL_IW = 6
    COL_ACCEPT = 7
    NCOL = 8


cdef inline int _grow(double **buf, Py_ssize_t *cap) noexcept nogil:
    cdef Py_ssize_t new_cap = cap[0] * 2
    cdef double *p = <double *> realloc(buf[0], new_cap * sizeof(double))
    if p == NULL:
        return -1
    buf[0] = p
    cap[0] = new_cap
    return 0


cdef Py_ssize_t _sample_into(
    int method, int kind, double horizon, double total,
    double mu, double scale, double exponent, double inv_exponent,
    const double *pieces, Py_ssize_t n_pieces, const double *cum,
    opx_philox *st, double **buf, Py_ssize_t *cap,
) noexcept nogil:
    """Sample event times into *buf; returns the count or -1 on OOM."""
    cdef Py_ssize_t cnt = 0
    cdef Py_ssize_t i, j
    cdef double s, t, start, end, rl, rr, bound, ia, iw, u, rate_t
    cdef bint accept

    if method == METHOD_INVERSION:
        if total <= 0.0:
            return 0
        s = 0.0
        if kind == KIND_CONSTANT:
            while True:
                s += -log1p(-opx_next_positive(st))
                if s >= total:
                    break
                t = s / mu
                if t > horizon:
                    t = horizon
                if cnt == cap[0] and _grow(buf, cap) < 0:
                    return -1
                buf[0][cnt] = t
                cnt += 1
        elif kind == KIND_POWER_LAW:
            while True:
                s += -log1p(-opx_next_positive(st))
                if s >= total:
                    break
                t = pow(exponent * s / scale, inv_exponent)
                if t > horizon:
                    t = horizon
                if cnt == cap[0] and _grow(buf, cap) < 0:
                    return -1
                buf[0][cnt] = t
                cnt += 1
        else:  # piecewise-constant inversion
            j = 0
            while True:
                s += -log1p(-opx_next_positive(st))
                if s >= total:
                    break
                while s > cum[j + 1]:
                    j += 1
                rl = pieces[j * NCOL + COL_RL]
                end = pieces[j * NCOL + COL_END]
                if rl > 0.0:
                    t = pieces[j * NCOL + COL_START] + (s - cum[j]) / rl
                    if t > end:
                        t = end
                else:
                    t = end
                if cnt == cap[0] and _grow(buf, cap) < 0:
                    return -1
                buf[0][cnt] = t
                cnt += 1
    else:  # thinning
        for i in range(n_pieces):
            start = pieces[i * NCOL + COL_START]
            end = pieces[i * NCOL + COL_END]
            rl = pieces[i * NCOL + COL_RL]
            rr = pieces[i * NCOL + COL_RR]
            bound = pieces[i * NCOL + COL_BOUND]
            ia = pieces[i * NCOL + COL_IA]
            iw = pieces[i * NCOL + COL_IW]
            accept = pieces[i * NCOL + COL_ACCEPT] != 0.0
            if bound <= 0.0:
                continue
            t = start
            while True:
                t += -log1p(-opx_next_positive(st)) / bound
                if t >= end:
                    break
                if accept:
                    u = opx_next_double(st)
                    rate_t = rl + (rr - rl) * (t - ia) / iw
                    if u * bound >= rate_t:
                        continue
                if cnt == cap[0] and _grow(buf, cap) < 0:
                    return -1
                buf[0][cnt] = t
                cnt += 1
    return cnt


def philox_raw(unsigned long long key0, unsigned long long key1, Py_ssize_t n):
    """First n raw 64-bit outputs of the stream keyed (key0, key1)."""
    out = np.empty(n, dtype=np.uint64)
    cdef unsigned long long[::1] view = out
    cdef opx_philox st
    cdef Py_ssize_t i
    opx_init(&st, key0, key1)
    for i in range(n):
        view[i] = opx_next64(&st)
    return out


def philox_doubles(unsigned long long key0, unsigned long long key1, Py_ssize_t n):
    """First n uniform doubles of the stream keyed (key0, key1)."""
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] view = out
    cdef opx_philox st
    cdef Py_ssize_t i
    opx_init(&st, key0, key1)
    for i in range(n):
        view[i] = opx_next_double(&st)
    return out


def sample_one(
    int method, int kind, double horizon, double total,
    double mu, double scale, double exponent, double inv_exponent,
    const double[:, ::1] pieces, const double[::1] cum,
    double sigma, bint do_mark,
    unsigned long long key0, unsigned long long key1,
):
    """Sample one trajectory (and optionally its marks) for backend parity."""
    cdef const double *pieces_p = NULL
    cdef const double *cum_p = NULL
    cdef Py_ssize_t n_pieces = pieces.shape[0]
    if n_pieces > 0:
        pieces_p = &pieces[0, 0]
    if cum.shape[0] > 0:
        cum_p = &cum[0]

    cdef Py_ssize_t cap = 64
    cdef double *buf = <double *> malloc(cap * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    cdef opx_philox st
    opx_init(&st, key0, key1)
    cdef Py_ssize_t cnt = _sample_into(
        method, kind, horizon, total, mu, scale, exponent, inv_exponent,
        pieces_p, n_pieces, cum_p, &st, &buf, &cap,
    )
    if cnt < 0:
        free(buf)
        raise MemoryError()

    times = np.empty(cnt, dtype=np.float64)
    cdef double[::1] tview = times
    cdef Py_ssize_t k
    for k in range(cnt):
        tview[k] = buf[k]
    flags = None
    cdef unsigned char[::1] fview
    if do_mark:
        flags = np.empty(cnt, dtype=np.bool_)
        fview = flags.view(np.uint8)
        for k in range(cnt):
            fview[k] = 1 if opx_next_double(&st) < sigma else 0
    free(buf)
    return times, flags


def run_cohort(
    int method, int kind, double horizon, double total,
    double mu, double scale, double exponent, double inv_exponent,
    const double[:, ::1] pieces, const double[::1] cum,
    double sigma,
    unsigned long long key0, unsigned long long idx_start, Py_ssize_t n,
    double[::1] out_first, long long[::1] out_events, long long[::1] out_success,
):
    """Simulate individuals idx_start..idx_start+n-1 and reduce per individual.

    Writes the first-success age (or +inf), event count, and success count
    of individual i into slot i of the output views.
    """
    if out_first.shape[0] < n or out_events.shape[0] < n or out_success.shape[0] < n:
        raise ValueError("output buffers are shorter than the index range")
    cdef const double *pieces_p = NULL
    cdef const double *cum_p = NULL
    cdef Py_ssize_t n_pieces = pieces.shape[0]
    if n_pieces > 0:
        pieces_p = &pieces[0, 0]
    if cum.shape[0] > 0:
        cum_p = &cum[0]

    cdef Py_ssize_t cap = 64
    cdef double *buf = NULL
    cdef opx_philox st
    cdef Py_ssize_t i, k, cnt
    cdef long long n_succ
    cdef double first
    cdef bint oom = False

    with nogil:
        buf = <double *> malloc(cap * sizeof(double))
        if buf == NULL:
            oom = True
        else:
            for i in range(n):
                opx_init(&st, key0, idx_start + <unsigned long long> i)
                cnt = _sample_into(
                    method, kind, horizon, total, mu, scale, exponent, inv_exponent,
                    pieces_p, n_pieces, cum_p, &st, &buf, &cap,
                )
                if cnt < 0:
                    oom = True
                    break
                n_succ = 0
                first = INFINITY
                for k in range(cnt):
                    if opx_next_double(&st) < sigma:
                        n_succ += 1
                        if first == INFINITY:
                            first = buf[k]
                out_first[i] = first
                out_events[i] = cnt
                out_success[i] = n_succ
            free(buf)
    if oom:
        raise MemoryError()
