# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sub-step kernel: gather-shift fused with the surrounding 2x2 maps."""

cimport cython

ctypedef double complex cplx


def substep(const cplx[::1] src_l, const cplx[::1] src_r,
            cplx[::1] dst_l, cplx[::1] dst_r,
            const long long[::1] idx_l, const long long[::1] idx_r,
            const cplx[:, ::1] pre, const cplx[:, ::1] post,
            phase_l=None, phase_r=None):
    cdef Py_ssize_t n = src_l.shape[0]
    cdef Py_ssize_t s, il, ir
    cdef cplx q00 = pre[0, 0], q01 = pre[0, 1], q10 = pre[1, 0], q11 = pre[1, 1]
    cdef cplx p00 = post[0, 0], p01 = post[0, 1], p10 = post[1, 0], p11 = post[1, 1]
    cdef cplx cl, cr
    cdef const cplx[::1] ph_l
    cdef const cplx[::1] ph_r
    if phase_l is None:
        with nogil:
            for s in range(n):
                il = idx_l[s]
                ir = idx_r[s]
                cl = q00 * src_l[il] + q01 * src_r[il]
                cr = q10 * src_l[ir] + q11 * src_r[ir]
                dst_l[s] = p00 * cl + p01 * cr
                dst_r[s] = p10 * cl + p11 * cr
    else:
        ph_l = phase_l
        ph_r = phase_r
        with nogil:
            for s in range(n):
                il = idx_l[s]
                ir = idx_r[s]
                cl = (q00 * src_l[il] + q01 * src_r[il]) * ph_l[s]
                cr = (q10 * src_l[ir] + q11 * src_r[ir]) * ph_r[s]
                dst_l[s] = p00 * cl + p01 * cr
                dst_r[s] = p10 * cl + p11 * cr
