# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same API as ``_kernels_py``."""
from libc.math cimport sqrt, sin, cos
from libc.stdlib cimport malloc, free


def first_primes(long count):
    if count < 1:
        return 0
    cdef long *primes = <long *> malloc(count * sizeof(long))
    if primes == NULL:
        raise MemoryError()
    cdef long n = 1, candidate = 3, i, p
    cdef bint is_prime
    primes[0] = 2
    try:
        while n < count:
            is_prime = True
            for i in range(n):
                p = primes[i]
                if p * p > candidate:
                    break
                if candidate % p == 0:
                    is_prime = False
                    break
            if is_prime:
                primes[n] = candidate
                n += 1
            candidate += 2
        return primes[count - 1]
    finally:
        free(primes)


def quat_multiply(a, b):
    cdef double ax = a[0], ay = a[1], az = a[2], aw = a[3]
    cdef double bx = b[0], by = b[1], bz = b[2], bw = b[3]
    return (
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
        aw * bw - ax * bx - ay * by - az * bz,
    )


def quat_rotate(q, v):
    cdef double qx = q[0], qy = q[1], qz = q[2], qw = q[3]
    cdef double vx = v[0], vy = v[1], vz = v[2]
    cdef double tx = 2.0 * (qy * vz - qz * vy)
    cdef double ty = 2.0 * (qz * vx - qx * vz)
    cdef double tz = 2.0 * (qx * vy - qy * vx)
    return (
        vx + qw * tx + (qy * tz - qz * ty),
        vy + qw * ty + (qz * tx - qx * tz),
        vz + qw * tz + (qx * ty - qy * tx),
    )


def quat_from_rotation_vector(double rx, double ry, double rz):
    cdef double angle = sqrt(rx * rx + ry * ry + rz * rz)
    cdef double s
    if angle < 1e-12:
        return (0.5 * rx, 0.5 * ry, 0.5 * rz, 1.0 - angle * angle / 8.0)
    s = sin(0.5 * angle) / angle
    return (rx * s, ry * s, rz * s, cos(0.5 * angle))


def apply_homography(h, double x, double y):
    cdef double w = h[6] * x + h[7] * y + h[8]
    return ((h[0] * x + h[1] * y + h[2]) / w, (h[3] * x + h[4] * y + h[5]) / w)
