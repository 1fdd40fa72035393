"""Pure-numpy stepping kernel (fallback backend).

One call advances every layer of the coupled flow by a single fixed step of
the classical 4th-order scheme, holding broadcast values constant, then
evaluates the trigger predicates and performs the fired broadcasts.  The
compiled backend implements the identical contract; see kernels.py.

Array layout: subproblem / ideal quantities are (K, N) with K objectives and
N agents; compromise quantities are (N,).  Gains is a (3, 3) array of layer
gains at the three stage times (t, t + h/2, t + h).
"""

import numpy as np

BOUNDARY_TOL = 1e-9

KIND_DYNAMIC_PAPER = 0
KIND_STATIC = 1
KIND_DYNAMIC_PRIOR = 2


def _tangent(pos, lo, hi, v):
    blocked = ((pos <= lo + BOUNDARY_TOL) & (v < 0.0)) | (
        (pos >= hi - BOUNDARY_TOL) & (v > 0.0)
    )
    return np.where(blocked, 0.0, v)


def _gradval(gpoly, pos):
    return ((gpoly[..., 0] * pos + gpoly[..., 1]) * pos + gpoly[..., 2]) * pos + gpoly[
        ..., 3
    ]


def _value(vpoly, pos):
    acc = vpoly[..., 0]
    for j in range(1, 5):
        acc = acc * pos + vpoly[..., j]
    return acc


def step(
    h,
    gains,
    xbar,
    y,
    z,
    eta1,
    ybar,
    xhat,
    x,
    nu,
    mu,
    eta2,
    nubar,
    adj,
    lii,
    lo,
    hi,
    d,
    gpoly,
    vpoly,
    p,
    u_floor,
    alpha1,
    phi1,
    delta1,
    beta1,
    inv2s1,
    kind1,
    alpha2,
    phi2,
    delta2,
    beta2,
    inv2s2,
    kind2,
    fired1,
    fired2,
):
    n_obj = xbar.shape[0]
    # broadcast-dependent terms are constant within the step
    cons1 = lii * ybar - ybar @ adj
    q1 = 0.5 * (lii * ybar**2 - 2.0 * ybar * (ybar @ adj) + (ybar**2) @ adj)
    cons2 = lii * nubar - adj @ nubar
    q2 = 0.5 * (lii * nubar**2 - 2.0 * nubar * (adj @ nubar) + adj @ nubar**2)

    def rhs(s, stage):
        sxbar, sy, sz, seta1, sxhat, sx, snu, smu, seta2 = s
        g1, g2, g3 = gains[0, stage], gains[1, stage], gains[2, stage]

        gradf = _gradval(gpoly, sxbar)
        dxbar = _tangent(sxbar, lo, hi, g1 * (sy - gradf))
        dy = g1 * (-cons1 - sz + d - sxbar)
        dz = g1 * cons1
        e1 = ybar - sy
        if kind1 == KIND_STATIC:
            deta1 = np.zeros_like(seta1)
        else:
            term1 = (inv2s1 + lii) * e1**2
            if kind1 == KIND_DYNAMIC_PAPER:
                term1 = term1 - 0.5 * beta1 * q1
            deta1 = g1 * (-phi1 * seta1 - delta1 * term1)

        dxhat = _tangent(sxhat, lo, hi, -g2 * _gradval(gpoly, sxhat))

        # live weights and ideal values from the stage states
        fx = np.abs(_value(vpoly, sxbar))
        tot = fx.sum(axis=0)
        omega = np.where(tot > 0.0, fx / np.where(tot > 0.0, tot, 1.0), 1.0 / n_obj)
        fh = _value(vpoly, sxhat)
        gaps = np.maximum(_value(vpoly, sx[None, :]) - fh, 0.0)
        gradfx = _gradval(gpoly, sx[None, :])
        if p == 1.0:
            gradu = np.sum(omega * gradfx, axis=0)
        else:
            u = np.sum(omega * gaps**p, axis=0) ** (1.0 / p)
            num = np.sum(omega * gaps ** (p - 1.0) * gradfx, axis=0)
            u_safe = np.where(u >= u_floor, u, 1.0)
            gradu = np.where(u >= u_floor, u_safe ** (1.0 - p) * num, 0.0)
        dx = _tangent(sx, lo, hi, g3 * (snu - gradu))
        dnu = g3 * (-cons2 - smu + d - sx)
        dmu = g3 * cons2
        e2 = nubar - snu
        if kind2 == KIND_STATIC:
            deta2 = np.zeros_like(seta2)
        else:
            term2 = (inv2s2 + lii) * e2**2
            if kind2 == KIND_DYNAMIC_PAPER:
                term2 = term2 - 0.5 * beta2 * q2
            deta2 = g3 * (-phi2 * seta2 - delta2 * term2)

        return (dxbar, dy, dz, deta1, dxhat, dx, dnu, dmu, deta2)

    s0 = (xbar, y, z, eta1, xhat, x, nu, mu, eta2)
    k1 = rhs(s0, 0)
    k2 = rhs(tuple(a + 0.5 * h * b for a, b in zip(s0, k1)), 1)
    k3 = rhs(tuple(a + 0.5 * h * b for a, b in zip(s0, k2)), 1)
    k4 = rhs(tuple(a + h * b for a, b in zip(s0, k3)), 2)
    for arr, d1, d2, d3, d4 in zip(s0, k1, k2, k3, k4):
        arr += (h / 6.0) * (d1 + 2.0 * d2 + 2.0 * d3 + d4)

    # drift repair: discrete steps can leave states a hair outside the box
    np.clip(xbar, lo, hi, out=xbar)
    np.clip(xhat, lo, hi, out=xhat)
    np.clip(x, lo, hi, out=x)

    # trigger evaluation against the pre-update broadcasts
    e1 = ybar - y
    theta1 = (inv2s1 + lii) * e1**2 - 0.5 * beta1 * q1
    if kind1 == KIND_STATIC:
        f1 = theta1 >= 0.0
    elif kind1 == KIND_DYNAMIC_PAPER:
        f1 = alpha1 * theta1 >= eta1
    else:
        f1 = alpha1 * (inv2s1 + lii) * e1**2 >= eta1
    e2 = nubar - nu
    theta2 = (inv2s2 + lii) * e2**2 - 0.5 * beta2 * q2
    if kind2 == KIND_STATIC:
        f2 = theta2 >= 0.0
    elif kind2 == KIND_DYNAMIC_PAPER:
        f2 = alpha2 * theta2 >= eta2
    else:
        f2 = alpha2 * (inv2s2 + lii) * e2**2 >= eta2

    fired1[:] = f1
    fired2[:] = f2
    ybar[f1] = y[f1]
    nubar[f2] = nu[f2]
