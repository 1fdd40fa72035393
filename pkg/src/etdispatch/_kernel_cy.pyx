# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled stepping kernel.

Mirrors the contract of _kernel_py.step exactly; the driver selects whichever
backend imported successfully.  The full state is flattened into one work
vector so the four-stage update is a handful of tight C loops.
"""

import numpy as np

from libc.math cimport fabs, pow

cdef double BOUNDARY_TOL = 1e-9

cdef int KIND_DYNAMIC_PAPER = 0
cdef int KIND_STATIC = 1
cdef int KIND_DYNAMIC_PRIOR = 2


cdef inline double _tangent(double pos, double lo, double hi, double v) nogil:
    if pos <= lo + BOUNDARY_TOL and v < 0.0:
        return 0.0
    if pos >= hi - BOUNDARY_TOL and v > 0.0:
        return 0.0
    return v


cdef inline double _clip(double v, double lo, double hi) nogil:
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


cdef void _rhs(
    int K, int N,
    double[::1] s, double[::1] out,
    double g1, double g2, double g3,
    double[::1] cons1, double[::1] q1,
    double[::1] cons2, double[::1] q2,
    double[:, ::1] ybar, double[::1] nubar,
    double[::1] lii, double[::1] lo, double[::1] hi, double[::1] d,
    double[:, :, ::1] gpoly, double[:, :, ::1] vpoly,
    double p, double u_floor,
    double[:, ::1] phi1, double[:, ::1] delta1, double[:, ::1] beta1,
    double[:, ::1] inv2s1, int kind1,
    double[::1] phi2, double[::1] delta2, double[::1] beta2,
    double[::1] inv2s2, int kind2,
) nogil:
    cdef int KN = K * N
    cdef int o_xbar = 0, o_y = KN, o_z = 2 * KN, o_eta1 = 3 * KN, o_xhat = 4 * KN
    cdef int o_x = 5 * KN, o_nu = o_x + N, o_mu = o_nu + N, o_eta2 = o_mu + N
    cdef int k, i, idx
    cdef double pos, gf, v, e, term, sx, tot, fx, fh, gap, sp, num, u, gradu
    cdef double g3c, g2c, g1c, g0c

    for k in range(K):
        for i in range(N):
            idx = k * N + i
            # decision estimate: projected gradient/consensus direction
            pos = s[o_xbar + idx]
            gf = ((gpoly[k, i, 0] * pos + gpoly[k, i, 1]) * pos + gpoly[k, i, 2]) * pos + gpoly[k, i, 3]
            v = g1 * (s[o_y + idx] - gf)
            out[o_xbar + idx] = _tangent(pos, lo[i], hi[i], v)
            # auxiliary consensus / balance variables
            out[o_y + idx] = g1 * (-cons1[idx] - s[o_z + idx] + d[i] - pos)
            out[o_z + idx] = g1 * cons1[idx]
            # trigger threshold variable
            if kind1 == KIND_STATIC:
                out[o_eta1 + idx] = 0.0
            else:
                e = ybar[k, i] - s[o_y + idx]
                term = (inv2s1[k, i] + lii[i]) * e * e
                if kind1 == KIND_DYNAMIC_PAPER:
                    term = term - 0.5 * beta1[k, i] * q1[idx]
                out[o_eta1 + idx] = g1 * (-phi1[k, i] * s[o_eta1 + idx] - delta1[k, i] * term)
            # ideal-point descent
            pos = s[o_xhat + idx]
            gf = ((gpoly[k, i, 0] * pos + gpoly[k, i, 1]) * pos + gpoly[k, i, 2]) * pos + gpoly[k, i, 3]
            out[o_xhat + idx] = _tangent(pos, lo[i], hi[i], -g2 * gf)

    for i in range(N):
        sx = s[o_x + i]
        # live weights from the subproblem states, live ideals from xhat
        tot = 0.0
        for k in range(K):
            pos = s[o_xbar + k * N + i]
            fx = (((vpoly[k, i, 0] * pos + vpoly[k, i, 1]) * pos + vpoly[k, i, 2]) * pos + vpoly[k, i, 3]) * pos + vpoly[k, i, 4]
            tot += fabs(fx)
        sp = 0.0
        num = 0.0
        for k in range(K):
            pos = s[o_xbar + k * N + i]
            fx = (((vpoly[k, i, 0] * pos + vpoly[k, i, 1]) * pos + vpoly[k, i, 2]) * pos + vpoly[k, i, 3]) * pos + vpoly[k, i, 4]
            if tot > 0.0:
                fx = fabs(fx) / tot
            else:
                fx = 1.0 / K
            # fx now holds the weight omega_{k,i}
            pos = s[o_xhat + k * N + i]
            fh = (((vpoly[k, i, 0] * pos + vpoly[k, i, 1]) * pos + vpoly[k, i, 2]) * pos + vpoly[k, i, 3]) * pos + vpoly[k, i, 4]
            gap = (((vpoly[k, i, 0] * sx + vpoly[k, i, 1]) * sx + vpoly[k, i, 2]) * sx + vpoly[k, i, 3]) * sx + vpoly[k, i, 4] - fh
            if gap < 0.0:
                gap = 0.0
            gf = ((gpoly[k, i, 0] * sx + gpoly[k, i, 1]) * sx + gpoly[k, i, 2]) * sx + gpoly[k, i, 3]
            if p == 1.0:
                num += fx * gf
            elif p == 2.0:
                sp += fx * gap * gap
                num += fx * gap * gf
            else:
                sp += fx * pow(gap, p)
                num += fx * pow(gap, p - 1.0) * gf
        if p == 1.0:
            gradu = num
        else:
            if p == 2.0:
                u = sp ** 0.5
            else:
                u = pow(sp, 1.0 / p)
            if u >= u_floor:
                gradu = pow(u, 1.0 - p) * num
            else:
                gradu = 0.0
        out[o_x + i] = _tangent(sx, lo[i], hi[i], g3 * (s[o_nu + i] - gradu))
        out[o_nu + i] = g3 * (-cons2[i] - s[o_mu + i] + d[i] - sx)
        out[o_mu + i] = g3 * cons2[i]
        if kind2 == KIND_STATIC:
            out[o_eta2 + i] = 0.0
        else:
            e = nubar[i] - s[o_nu + i]
            term = (inv2s2[i] + lii[i]) * e * e
            if kind2 == KIND_DYNAMIC_PAPER:
                term = term - 0.5 * beta2[i] * q2[i]
            out[o_eta2 + i] = g3 * (-phi2[i] * s[o_eta2 + i] - delta2[i] * term)


def step(
    double h,
    double[:, ::1] gains,
    double[:, ::1] xbar,
    double[:, ::1] y,
    double[:, ::1] z,
    double[:, ::1] eta1,
    double[:, ::1] ybar,
    double[:, ::1] xhat,
    double[::1] x,
    double[::1] nu,
    double[::1] mu,
    double[::1] eta2,
    double[::1] nubar,
    double[:, ::1] adj,
    double[::1] lii,
    double[::1] lo,
    double[::1] hi,
    double[::1] d,
    double[:, :, ::1] gpoly,
    double[:, :, ::1] vpoly,
    double p,
    double u_floor,
    double[:, ::1] alpha1,
    double[:, ::1] phi1,
    double[:, ::1] delta1,
    double[:, ::1] beta1,
    double[:, ::1] inv2s1,
    int kind1,
    double[::1] alpha2,
    double[::1] phi2,
    double[::1] delta2,
    double[::1] beta2,
    double[::1] inv2s2,
    int kind2,
    unsigned char[:, ::1] fired1,
    unsigned char[::1] fired2,
):
    cdef int K = xbar.shape[0]
    cdef int N = xbar.shape[1]
    cdef int KN = K * N
    cdef int L = 5 * KN + 4 * N
    cdef int k, i, j, idx, m
    cdef double acc, diff, e, theta

    buf = np.empty(6 * L + 2 * KN + 2 * N, dtype=np.float64)
    cdef double[::1] w = buf
    cdef double[::1] s0 = w[0:L]
    cdef double[::1] st = w[L:2 * L]
    cdef double[::1] k1 = w[2 * L:3 * L]
    cdef double[::1] k2 = w[3 * L:4 * L]
    cdef double[::1] k3 = w[4 * L:5 * L]
    cdef double[::1] k4 = w[5 * L:6 * L]
    cdef double[::1] cons1 = w[6 * L:6 * L + KN]
    cdef double[::1] q1 = w[6 * L + KN:6 * L + 2 * KN]
    cdef double[::1] cons2 = w[6 * L + 2 * KN:6 * L + 2 * KN + N]
    cdef double[::1] q2 = w[6 * L + 2 * KN + N:6 * L + 2 * KN + 2 * N]

    cdef int o_xbar = 0, o_y = KN, o_z = 2 * KN, o_eta1 = 3 * KN, o_xhat = 4 * KN
    cdef int o_x = 5 * KN, o_nu = o_x + N, o_mu = o_nu + N, o_eta2 = o_mu + N

    with nogil:
        # broadcast-dependent terms, constant within the step
        for k in range(K):
            for i in range(N):
                idx = k * N + i
                acc = 0.0
                theta = 0.0
                for j in range(N):
                    diff = ybar[k, i] - ybar[k, j]
                    acc += adj[i, j] * diff
                    theta += adj[i, j] * diff * diff
                cons1[idx] = acc
                q1[idx] = 0.5 * theta
        for i in range(N):
            acc = 0.0
            theta = 0.0
            for j in range(N):
                diff = nubar[i] - nubar[j]
                acc += adj[i, j] * diff
                theta += adj[i, j] * diff * diff
            cons2[i] = acc
            q2[i] = 0.5 * theta

        # pack
        for k in range(K):
            for i in range(N):
                idx = k * N + i
                s0[o_xbar + idx] = xbar[k, i]
                s0[o_y + idx] = y[k, i]
                s0[o_z + idx] = z[k, i]
                s0[o_eta1 + idx] = eta1[k, i]
                s0[o_xhat + idx] = xhat[k, i]
        for i in range(N):
            s0[o_x + i] = x[i]
            s0[o_nu + i] = nu[i]
            s0[o_mu + i] = mu[i]
            s0[o_eta2 + i] = eta2[i]

        _rhs(K, N, s0, k1, gains[0, 0], gains[1, 0], gains[2, 0],
             cons1, q1, cons2, q2, ybar, nubar, lii, lo, hi, d, gpoly, vpoly,
             p, u_floor, phi1, delta1, beta1, inv2s1, kind1,
             phi2, delta2, beta2, inv2s2, kind2)
        for m in range(L):
            st[m] = s0[m] + 0.5 * h * k1[m]
        _rhs(K, N, st, k2, gains[0, 1], gains[1, 1], gains[2, 1],
             cons1, q1, cons2, q2, ybar, nubar, lii, lo, hi, d, gpoly, vpoly,
             p, u_floor, phi1, delta1, beta1, inv2s1, kind1,
             phi2, delta2, beta2, inv2s2, kind2)
        for m in range(L):
            st[m] = s0[m] + 0.5 * h * k2[m]
        _rhs(K, N, st, k3, gains[0, 1], gains[1, 1], gains[2, 1],
             cons1, q1, cons2, q2, ybar, nubar, lii, lo, hi, d, gpoly, vpoly,
             p, u_floor, phi1, delta1, beta1, inv2s1, kind1,
             phi2, delta2, beta2, inv2s2, kind2)
        for m in range(L):
            st[m] = s0[m] + h * k3[m]
        _rhs(K, N, st, k4, gains[0, 2], gains[1, 2], gains[2, 2],
             cons1, q1, cons2, q2, ybar, nubar, lii, lo, hi, d, gpoly, vpoly,
             p, u_floor, phi1, delta1, beta1, inv2s1, kind1,
             phi2, delta2, beta2, inv2s2, kind2)
        for m in range(L):
            s0[m] = s0[m] + (h / 6.0) * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m])

        # unpack with drift repair on the decision variables
        for k in range(K):
            for i in range(N):
                idx = k * N + i
                xbar[k, i] = _clip(s0[o_xbar + idx], lo[i], hi[i])
                y[k, i] = s0[o_y + idx]
                z[k, i] = s0[o_z + idx]
                eta1[k, i] = s0[o_eta1 + idx]
                xhat[k, i] = _clip(s0[o_xhat + idx], lo[i], hi[i])
        for i in range(N):
            x[i] = _clip(s0[o_x + i], lo[i], hi[i])
            nu[i] = s0[o_nu + i]
            mu[i] = s0[o_mu + i]
            eta2[i] = s0[o_eta2 + i]

        # trigger evaluation against the pre-update broadcasts
        for k in range(K):
            for i in range(N):
                idx = k * N + i
                e = ybar[k, i] - y[k, i]
                theta = (inv2s1[k, i] + lii[i]) * e * e - 0.5 * beta1[k, i] * q1[idx]
                if kind1 == KIND_STATIC:
                    fired1[k, i] = theta >= 0.0
                elif kind1 == KIND_DYNAMIC_PAPER:
                    fired1[k, i] = alpha1[k, i] * theta >= eta1[k, i]
                else:
                    fired1[k, i] = (
                        alpha1[k, i] * (inv2s1[k, i] + lii[i]) * e * e >= eta1[k, i]
                    )
        for i in range(N):
            e = nubar[i] - nu[i]
            theta = (inv2s2[i] + lii[i]) * e * e - 0.5 * beta2[i] * q2[i]
            if kind2 == KIND_STATIC:
                fired2[i] = theta >= 0.0
            elif kind2 == KIND_DYNAMIC_PAPER:
                fired2[i] = alpha2[i] * theta >= eta2[i]
            else:
                fired2[i] = alpha2[i] * (inv2s2[i] + lii[i]) * e * e >= eta2[i]

        # synchronous broadcast update for every fired channel
        for k in range(K):
            for i in range(N):
                if fired1[k, i]:
                    ybar[k, i] = y[k, i]
        for i in range(N):
            if fired2[i]:
                nubar[i] = nu[i]
