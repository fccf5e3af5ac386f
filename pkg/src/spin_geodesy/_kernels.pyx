# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled interpolation and streamline kernels; see _kernels_py for the reference."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, sqrt

cnp.import_array()

cdef enum:
    OK = 0
    ZERO_SPIN = 1
    MASKED = 2
    MAX_STEPS = 3


cdef inline int _wrap(long i, long n) nogil:
    cdef long r = i % n
    if r < 0:
        r += n
    return <int>r


cdef inline int _weights(double f, long n, int order, int* idx, double* w) nogil:
    cdef long i0
    cdef double t, t2, t3
    if n == 1:
        idx[0] = 0
        w[0] = 1.0
        return 1
    i0 = <long>floor(f)
    t = f - i0
    if order == 1:
        idx[0] = _wrap(i0, n)
        idx[1] = _wrap(i0 + 1, n)
        w[0] = 1.0 - t
        w[1] = t
        return 2
    t2 = t * t
    t3 = t2 * t
    idx[0] = _wrap(i0 - 1, n)
    idx[1] = _wrap(i0, n)
    idx[2] = _wrap(i0 + 1, n)
    idx[3] = _wrap(i0 + 2, n)
    if order == 3:
        w[0] = 0.5 * (-t3 + 2 * t2 - t)
        w[1] = 0.5 * (3 * t3 - 5 * t2 + 2)
        w[2] = 0.5 * (-3 * t3 + 4 * t2 + t)
        w[3] = 0.5 * (t3 - t2)
    else:
        w[0] = (1.0 - t) * (1.0 - t) * (1.0 - t) / 6.0
        w[1] = (3 * t3 - 6 * t2 + 4) / 6.0
        w[2] = (-3 * t3 + 3 * t2 + 3 * t + 1) / 6.0
        w[3] = t3 / 6.0
    return 4


cdef void _interp(double[:, :, :, ::1] data, double* origin, double* spacing,
                  double* p, int order, double* out) nogil:
    cdef int ix[4]
    cdef int iy[4]
    cdef int iz[4]
    cdef double wx[4]
    cdef double wy[4]
    cdef double wz[4]
    cdef int nxw, nyw, nzw, a, b, c, comp
    cdef double wab, wabc
    cdef Py_ssize_t ncomp = data.shape[0]
    nxw = _weights((p[0] - origin[0]) / spacing[0], data.shape[1], order, ix, wx)
    nyw = _weights((p[1] - origin[1]) / spacing[1], data.shape[2], order, iy, wy)
    nzw = _weights((p[2] - origin[2]) / spacing[2], data.shape[3], order, iz, wz)
    for comp in range(ncomp):
        out[comp] = 0.0
    for a in range(nxw):
        for b in range(nyw):
            wab = wx[a] * wy[b]
            for c in range(nzw):
                wabc = wab * wz[c]
                for comp in range(ncomp):
                    out[comp] += wabc * data[comp, ix[a], iy[b], iz[c]]


def interp(double[:, :, :, ::1] data, double[::1] origin, double[::1] spacing,
           double[::1] p, int order):
    out = np.zeros(data.shape[0])
    cdef double[::1] o = out
    _interp(data, &origin[0], &spacing[0], &p[0], order, &o[0])
    return out


def interp_many(double[:, :, :, ::1] data, double[::1] origin, double[::1] spacing,
                double[:, ::1] points, int order):
    out = np.zeros((points.shape[0], data.shape[0]))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t n
    with nogil:
        for n in range(points.shape[0]):
            _interp(data, &origin[0], &spacing[0], &points[n, 0], order, &o[n, 0])
    return out


cdef int _direction(double[:, :, :, ::1] data, double* origin, double* spacing,
                    double* x, int order, double min_norm, double* buf, double* d) nogil:
    cdef double norm
    _interp(data, origin, spacing, x, order, buf)
    norm = sqrt(buf[0] * buf[0] + buf[1] * buf[1] + buf[2] * buf[2])
    if norm < min_norm:
        return ZERO_SPIN
    if buf[3] < 0.999:
        return MASKED
    d[0] = buf[0] / norm
    d[1] = buf[1] / norm
    d[2] = buf[2] / norm
    return OK


def trace(double[:, :, :, ::1] data, double[::1] origin, double[::1] spacing,
          seed, double ds, int nsteps, int order, double min_norm):
    pts_arr = np.zeros((nsteps + 1, 3))
    tan_arr = np.zeros((nsteps + 1, 3))
    cdef double[:, ::1] pts = pts_arr
    cdef double[:, ::1] tan = tan_arr
    cdef double x[3]
    cdef double y[3]
    cdef double k1[3]
    cdef double k2[3]
    cdef double k3[3]
    cdef double k4[3]
    cdef double buf[4]
    cdef int status, n, i
    cdef int count = 0
    for i in range(3):
        x[i] = seed[i]
        pts[0, i] = x[i]
    with nogil:
        status = _direction(data, &origin[0], &spacing[0], x, order, min_norm, buf, k1)
        if status == OK:
            for i in range(3):
                tan[0, i] = k1[i]
            count = 1
            status = MAX_STEPS
            for n in range(nsteps):
                for i in range(3):
                    y[i] = x[i] + 0.5 * ds * k1[i]
                status = _direction(data, &origin[0], &spacing[0], y, order, min_norm, buf, k2)
                if status != OK:
                    break
                for i in range(3):
                    y[i] = x[i] + 0.5 * ds * k2[i]
                status = _direction(data, &origin[0], &spacing[0], y, order, min_norm, buf, k3)
                if status != OK:
                    break
                for i in range(3):
                    y[i] = x[i] + ds * k3[i]
                status = _direction(data, &origin[0], &spacing[0], y, order, min_norm, buf, k4)
                if status != OK:
                    break
                for i in range(3):
                    x[i] = x[i] + ds / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i])
                status = _direction(data, &origin[0], &spacing[0], x, order, min_norm, buf, k1)
                if status != OK:
                    break
                for i in range(3):
                    pts[n + 1, i] = x[i]
                    tan[n + 1, i] = k1[i]
                count = n + 2
                status = MAX_STEPS
    return pts_arr, tan_arr, count, status
