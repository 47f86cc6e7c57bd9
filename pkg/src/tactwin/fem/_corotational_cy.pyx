# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled corotational kernel.

Same contract as _corotational_np.forces_and_blocks. Rotations come from a
scaled Higham polar iteration instead of SVD; for det(F) > 0 the two agree
to machine precision. Elements with det(F) <= 0 keep an identity rotation
here, which is fine because callers reject the whole evaluation via the
returned minimum determinant before using the forces.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, cbrt

cnp.import_array()


cdef inline double _det3(double m[3][3]) nogil:
    return (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


cdef inline void _cofactor3(double m[3][3], double c[3][3]) nogil:
    c[0][0] = m[1][1] * m[2][2] - m[1][2] * m[2][1]
    c[0][1] = m[1][2] * m[2][0] - m[1][0] * m[2][2]
    c[0][2] = m[1][0] * m[2][1] - m[1][1] * m[2][0]
    c[1][0] = m[0][2] * m[2][1] - m[0][1] * m[2][2]
    c[1][1] = m[0][0] * m[2][2] - m[0][2] * m[2][0]
    c[1][2] = m[0][1] * m[2][0] - m[0][0] * m[2][1]
    c[2][0] = m[0][1] * m[1][2] - m[0][2] * m[1][1]
    c[2][1] = m[0][2] * m[1][0] - m[0][0] * m[1][2]
    c[2][2] = m[0][0] * m[1][1] - m[0][1] * m[1][0]


cdef inline void _polar3(double f[3][3], double r[3][3]) nogil:
    # Higham iteration R <- (g R + (R^-T) / g) / 2 with determinant scaling
    cdef double cof[3][3]
    cdef double nxt[3][3]
    cdef double det, g, inv_det, diff, scale
    cdef int i, j, it
    for i in range(3):
        for j in range(3):
            r[i][j] = f[i][j]
    for it in range(30):
        det = _det3(r)
        if fabs(det) < 1e-300:
            return
        _cofactor3(r, cof)
        g = 1.0 / cbrt(fabs(det))
        inv_det = 1.0 / det
        diff = 0.0
        scale = 0.0
        for i in range(3):
            for j in range(3):
                # cof holds the matrix of cofactors, so cof/det is R^-T
                nxt[i][j] = 0.5 * (g * r[i][j] + cof[i][j] * inv_det / g)
                if fabs(nxt[i][j] - r[i][j]) > diff:
                    diff = fabs(nxt[i][j] - r[i][j])
                if fabs(nxt[i][j]) > scale:
                    scale = fabs(nxt[i][j])
                r[i][j] = nxt[i][j]
        if diff <= 1e-14 * scale:
            break


def forces_and_blocks(positions, tets, bm, ke, rest, bint want_blocks=True):
    cdef double[:, ::1] pos = np.ascontiguousarray(positions, dtype=np.float64)
    cdef cnp.int32_t[:, ::1] tv = np.ascontiguousarray(tets, dtype=np.int32)
    cdef double[:, :, ::1] bmv = np.ascontiguousarray(bm, dtype=np.float64)
    cdef double[:, :, ::1] kev = np.ascontiguousarray(ke, dtype=np.float64)
    cdef double[:, ::1] restv = np.ascontiguousarray(rest, dtype=np.float64)

    cdef Py_ssize_t m = tv.shape[0]
    cdef Py_ssize_t n = pos.shape[0]
    f_int_arr = np.zeros((n, 3), dtype=np.float64)
    cdef double[:, ::1] f_int = f_int_arr
    blocks_arr = np.empty((m, 12, 12), dtype=np.float64) if want_blocks else None
    cdef double[:, :, ::1] blocks
    if want_blocks:
        blocks = blocks_arr

    cdef double ds[3][3]
    cdef double f[3][3]
    cdef double r[3][3]
    cdef double local[12]
    cdef double fl[12]
    cdef double tmp[12][12]
    cdef double min_detf = 1e300
    cdef double det, acc, dx
    cdef Py_ssize_t e, i, j, k, a, b, l
    cdef cnp.int32_t v0, va

    for e in range(m):
        v0 = tv[e, 0]
        for j in range(3):
            va = tv[e, j + 1]
            for i in range(3):
                ds[i][j] = pos[va, i] - pos[v0, i]
        for i in range(3):
            for j in range(3):
                acc = 0.0
                for k in range(3):
                    acc += ds[i][k] * bmv[e, k, j]
                f[i][j] = acc
        det = _det3(f)
        if det < min_detf:
            min_detf = det
        if det > 0.0:
            _polar3(f, r)
        else:
            for i in range(3):
                for j in range(3):
                    r[i][j] = 1.0 if i == j else 0.0

        # local = R^T x - x0 stacked over the four nodes
        for a in range(4):
            va = tv[e, a]
            for i in range(3):
                acc = 0.0
                for j in range(3):
                    acc += r[j][i] * pos[va, j]
                local[3 * a + i] = acc - restv[va, i]
        for i in range(12):
            acc = 0.0
            for j in range(12):
                acc += kev[e, i, j] * local[j]
            fl[i] = acc
        for a in range(4):
            va = tv[e, a]
            for i in range(3):
                acc = 0.0
                for j in range(3):
                    acc += r[i][j] * fl[3 * a + j]
                f_int[va, i] += acc

        if want_blocks:
            # tmp = blockdiag(R) Ke, then blocks = tmp blockdiag(R)^T
            for a in range(4):
                for i in range(3):
                    for j in range(12):
                        acc = 0.0
                        for k in range(3):
                            acc += r[i][k] * kev[e, 3 * a + k, j]
                        tmp[3 * a + i][j] = acc
            for i in range(12):
                for b in range(4):
                    for l in range(3):
                        acc = 0.0
                        for k in range(3):
                            acc += tmp[i][3 * b + k] * r[l][k]
                        blocks[e, i, 3 * b + l] = acc

    return f_int_arr, blocks_arr, min_detf
