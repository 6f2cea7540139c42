# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled forward-pass kernels (hot path of every attack query)."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def conv2d_forward(x, w, b, int stride, int pad):
    """Cross-correlation of x (cin, H, W) with w (cout, cin, kh, kw) plus bias."""
    cdef double[:, :, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, :, :, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)

    cdef int cin = xv.shape[0]
    cdef int hh = xv.shape[1]
    cdef int ww = xv.shape[2]
    cdef int cout = wv.shape[0]
    cdef int kh = wv.shape[2]
    cdef int kw = wv.shape[3]
    cdef int ho = (hh + 2 * pad - kh) // stride + 1
    cdef int wo = (ww + 2 * pad - kw) // stride + 1

    out_arr = np.empty((cout, ho, wo), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr

    cdef int o, i, u, v, ki, kj, ri, base_r, base_c
    cdef int ki_lo, ki_hi, kj_lo, kj_hi
    cdef double acc

    # Valid kernel index ranges are hoisted out of the inner loops so the
    # zero-padding never costs a branch per multiply.
    with nogil:
        for o in range(cout):
            for u in range(ho):
                base_r = u * stride - pad
                ki_lo = -base_r if base_r < 0 else 0
                ki_hi = hh - base_r if hh - base_r < kh else kh
                for v in range(wo):
                    base_c = v * stride - pad
                    kj_lo = -base_c if base_c < 0 else 0
                    kj_hi = ww - base_c if ww - base_c < kw else kw
                    acc = bv[o]
                    for i in range(cin):
                        for ki in range(ki_lo, ki_hi):
                            ri = base_r + ki
                            for kj in range(kj_lo, kj_hi):
                                acc += xv[i, ri, base_c + kj] * wv[o, i, ki, kj]
                    out[o, u, v] = acc
    return out_arr


def dense_forward(x, w, b):
    """Affine map w (out, in) @ x (in,) + b (out,)."""
    cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef double[:, ::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)

    cdef int n_out = wv.shape[0]
    cdef int n_in = wv.shape[1]
    out_arr = np.empty(n_out, dtype=np.float64)
    cdef double[::1] out = out_arr

    cdef int o, j
    cdef double acc
    with nogil:
        for o in range(n_out):
            acc = bv[o]
            for j in range(n_in):
                acc += wv[o, j] * xv[j]
            out[o] = acc
    return out_arr
