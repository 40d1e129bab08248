# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled Viterbi kernel. Same contract as scmlink._viterbi_np."""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs

BACKEND = "compiled"


def decode_batch(object r_in, object prev_state_in, object prev_pattern_in,
                 int n_tail, bint terminated):
    cdef double[:, :, ::1] r = np.ascontiguousarray(r_in, dtype=np.float64)
    cdef int[:, ::1] prev_state = np.ascontiguousarray(prev_state_in, dtype=np.int32)
    cdef int[:, ::1] prev_pattern = np.ascontiguousarray(prev_pattern_in, dtype=np.int32)

    cdef Py_ssize_t batch = r.shape[0]
    cdef Py_ssize_t steps = r.shape[1]
    cdef Py_ssize_t num_states = prev_state.shape[0]
    cdef int shift = 0
    while (2 << shift) < num_states:
        shift += 1

    out = np.empty((batch, steps - n_tail if n_tail else steps), dtype=np.uint8)
    cdef unsigned char[:, ::1] out_v = out
    dec_buf = np.empty((steps, num_states), dtype=np.uint8)
    cdef unsigned char[:, ::1] dec = dec_buf
    pm_buf = np.empty(num_states, dtype=np.float64)
    npm_buf = np.empty(num_states, dtype=np.float64)
    cdef double[::1] pm = pm_buf
    cdef double[::1] npm = npm_buf

    cdef Py_ssize_t b, t, s, keep
    cdef int state, sel
    cdef double r0, r1, best
    cdef double m4[4]
    cdef double c0, c1

    keep = steps - n_tail
    for b in range(batch):
        for s in range(num_states):
            pm[s] = INFINITY
        pm[0] = 0.0
        for t in range(steps):
            r0 = r[b, t, 0]
            r1 = r[b, t, 1]
            m4[0] = fabs(r0) + fabs(r1)
            m4[1] = fabs(r0) + fabs(1.0 - r1)
            m4[2] = fabs(1.0 - r0) + fabs(r1)
            m4[3] = fabs(1.0 - r0) + fabs(1.0 - r1)
            for s in range(num_states):
                c0 = pm[prev_state[s, 0]] + m4[prev_pattern[s, 0]]
                c1 = pm[prev_state[s, 1]] + m4[prev_pattern[s, 1]]
                # tie goes to transition 0, matching np.argmin
                if c1 < c0:
                    npm[s] = c1
                    dec[t, s] = 1
                else:
                    npm[s] = c0
                    dec[t, s] = 0
            pm, npm = npm, pm
        if terminated:
            state = 0
        else:
            state = 0
            best = pm[0]
            for s in range(1, num_states):
                if pm[s] < best:
                    best = pm[s]
                    state = <int> s
        for t in range(steps - 1, -1, -1):
            if t < keep:
                out_v[b, t] = <unsigned char> (state >> shift)
            sel = dec[t, state]
            state = prev_state[state, sel]
    return out
