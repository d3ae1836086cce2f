"""Compiled pair-interaction engine shared by all collision operators.

Every operator here is a sum over unordered node pairs (p, q) and
scattering directions: the pair's product mass moves from the nodes
p, q onto the post-collision sphere through (v_p, v_q).  Deposits use
multilinear spreading, whose weights sum to 1 and reproduce linear
functions exactly, so every retained interaction conserves mass and
momentum to rounding.  A direction is retained only when both antipodal
deposit stencils are fully inside the grid, and the matching loss uses
only retained weight, which keeps the balance exact under truncation.

All geometry is done in grid-index units (nodes sit on the integer
lattice), so the inner loop is division-free.  Work is split over a
fixed number of blocks, each accumulated sequentially into its own
buffer and reduced in block order, so results are bit-identical for any
thread count.
"""

import numpy as np
from numba import njit, prange

NBLOCKS = 64

MODE_STEP = 0  # gain minus loss
MODE_GAIN = 1  # deposits only


@njit(cache=True, parallel=True)
def pair_scatter_3d(fv, n, hd, active, ww, qc1, qc2, qc3, prod_cut, mode):
    """Scatter sum over active node pairs on a 3-D grid.

    ww[k2, j] is the combined direction weight (quadrature weight times
    symmetrized kernel) for integer squared index distance k2 and
    half-set direction j; qc1/qc2/qc3 are the direction components along
    the pair axis and the two transverse frame vectors.  hd is the cell
    volume h^3.
    """
    nn = n * n
    npts = nn * n
    na = active.shape[0]
    nh = qc1.shape[0]

    ax = np.empty(na, dtype=np.int64)
    ay = np.empty(na, dtype=np.int64)
    az = np.empty(na, dtype=np.int64)
    vals = np.empty(na)
    for i in range(na):
        p = active[i]
        ax[i] = p // nn
        ay[i] = (p // n) % n
        az[i] = p % n
        vals[i] = fv[p]

    k2max = 3 * (n - 1) * (n - 1)
    rq = np.empty(k2max + 1)
    inv = np.empty(k2max + 1)
    rq[0] = 0.0
    inv[0] = 0.0
    for k in range(1, k2max + 1):
        s = np.sqrt(float(k))
        rq[k] = 0.5 * s  # post-collision radius in index units
        inv[k] = 1.0 / s

    out2 = np.zeros((NBLOCKS, npts))
    top = float(n - 1)

    for b in prange(NBLOCKS):
        buf = out2[b]
        for ii in range(b, na, NBLOCKS):
            fp = vals[ii]
            pxi = ax[ii]
            pyi = ay[ii]
            pzi = az[ii]
            pflat = (pxi * n + pyi) * n + pzi
            for kk in range(ii + 1, na):
                c = fp * vals[kk]
                if abs(c) <= prod_cut:
                    continue
                dx = pxi - ax[kk]
                dy = pyi - ay[kk]
                dz = pzi - az[kk]
                k2 = dx * dx + dy * dy + dz * dz
                s = inv[k2]
                ux = dx * s
                uy = dy * s
                uz = dz * s
                r = rq[k2]
                mx = 0.5 * (pxi + ax[kk])
                my = 0.5 * (pyi + ay[kk])
                mz = 0.5 * (pzi + az[kk])
                # orthonormal frame transverse to the pair axis
                if -0.6 < ux < 0.6:
                    e1x, e1y, e1z = 0.0, -uz, uy
                else:
                    e1x, e1y, e1z = -uz, 0.0, ux
                einv = 1.0 / np.sqrt(e1x * e1x + e1y * e1y + e1z * e1z)
                e1x *= einv
                e1y *= einv
                e1z *= einv
                e2x = uy * e1z - uz * e1y
                e2y = uz * e1x - ux * e1z
                e2z = ux * e1y - uy * e1x
                # pre-scale by the sphere radius
                rux = r * ux
                ruy = r * uy
                ruz = r * uz
                r1x = r * e1x
                r1y = r * e1y
                r1z = r * e1z
                r2x = r * e2x
                r2y = r * e2y
                r2z = r * e2z

                ch = hd * c
                kept = 0.0
                wrow = ww[k2]
                for j in range(nh):
                    a1 = qc1[j]
                    a2 = qc2[j]
                    a3 = qc3[j]
                    sx = a1 * rux + a2 * r1x + a3 * r2x
                    sy = a1 * ruy + a2 * r1y + a3 * r2y
                    sz = a1 * ruz + a2 * r1z + a3 * r2z

                    rxa = mx + sx
                    rya = my + sy
                    rza = mz + sz
                    rxb = mx - sx
                    ryb = my - sy
                    rzb = mz - sz
                    if (
                        rxa < 0.0 or rxa >= top or rya < 0.0 or rya >= top
                        or rza < 0.0 or rza >= top
                        or rxb < 0.0 or rxb >= top or ryb < 0.0 or ryb >= top
                        or rzb < 0.0 or rzb >= top
                    ):
                        continue
                    amt = ch * wrow[j]
                    kept += 2.0 * amt

                    ixa = int(rxa)
                    iya = int(rya)
                    iza = int(rza)
                    fx = rxa - ixa
                    fy = rya - iya
                    fz = rza - iza
                    base = (ixa * n + iya) * n + iza
                    w00 = (1.0 - fx) * (1.0 - fy)
                    w01 = (1.0 - fx) * fy
                    w10 = fx * (1.0 - fy)
                    w11 = fx * fy
                    gz = 1.0 - fz
                    buf[base] += amt * w00 * gz
                    buf[base + 1] += amt * w00 * fz
                    buf[base + n] += amt * w01 * gz
                    buf[base + n + 1] += amt * w01 * fz
                    buf[base + nn] += amt * w10 * gz
                    buf[base + nn + 1] += amt * w10 * fz
                    buf[base + nn + n] += amt * w11 * gz
                    buf[base + nn + n + 1] += amt * w11 * fz

                    ixa = int(rxb)
                    iya = int(ryb)
                    iza = int(rzb)
                    fx = rxb - ixa
                    fy = ryb - iya
                    fz = rzb - iza
                    base = (ixa * n + iya) * n + iza
                    w00 = (1.0 - fx) * (1.0 - fy)
                    w01 = (1.0 - fx) * fy
                    w10 = fx * (1.0 - fy)
                    w11 = fx * fy
                    gz = 1.0 - fz
                    buf[base] += amt * w00 * gz
                    buf[base + 1] += amt * w00 * fz
                    buf[base + n] += amt * w01 * gz
                    buf[base + n + 1] += amt * w01 * fz
                    buf[base + nn] += amt * w10 * gz
                    buf[base + nn + 1] += amt * w10 * fz
                    buf[base + nn + n] += amt * w11 * gz
                    buf[base + nn + n + 1] += amt * w11 * fz

                if mode == MODE_STEP and kept != 0.0:
                    half = 0.5 * kept
                    buf[pflat] -= half
                    buf[(ax[kk] * n + ay[kk]) * n + az[kk]] -= half

    out = np.zeros(npts)
    for b in range(NBLOCKS):
        for i in range(npts):
            out[i] += out2[b, i]
    return out


@njit(cache=True, parallel=True)
def pair_scatter_2d(fv, n, hd, active, ww, qc1, qc2, prod_cut, mode):
    """2-D analog of pair_scatter_3d with bilinear deposits; hd = h^2."""
    npts = n * n
    na = active.shape[0]
    nh = qc1.shape[0]

    ax = np.empty(na, dtype=np.int64)
    ay = np.empty(na, dtype=np.int64)
    vals = np.empty(na)
    for i in range(na):
        p = active[i]
        ax[i] = p // n
        ay[i] = p % n
        vals[i] = fv[p]

    k2max = 2 * (n - 1) * (n - 1)
    rq = np.empty(k2max + 1)
    inv = np.empty(k2max + 1)
    rq[0] = 0.0
    inv[0] = 0.0
    for k in range(1, k2max + 1):
        s = np.sqrt(float(k))
        rq[k] = 0.5 * s
        inv[k] = 1.0 / s

    out2 = np.zeros((NBLOCKS, npts))
    top = float(n - 1)

    for b in prange(NBLOCKS):
        buf = out2[b]
        for ii in range(b, na, NBLOCKS):
            fp = vals[ii]
            pxi = ax[ii]
            pyi = ay[ii]
            pflat = pxi * n + pyi
            for kk in range(ii + 1, na):
                c = fp * vals[kk]
                if abs(c) <= prod_cut:
                    continue
                dx = pxi - ax[kk]
                dy = pyi - ay[kk]
                k2 = dx * dx + dy * dy
                s = inv[k2]
                r = rq[k2]
                rux = r * dx * s
                ruy = r * dy * s
                mx = 0.5 * (pxi + ax[kk])
                my = 0.5 * (pyi + ay[kk])

                ch = hd * c
                kept = 0.0
                wrow = ww[k2]
                for j in range(nh):
                    # rotate the reference direction into the pair frame
                    sx = qc1[j] * rux - qc2[j] * ruy
                    sy = qc1[j] * ruy + qc2[j] * rux

                    rxa = mx + sx
                    rya = my + sy
                    rxb = mx - sx
                    ryb = my - sy
                    if rxa < 0.0 or rxa >= top or rya < 0.0 or rya >= top \
                            or rxb < 0.0 or rxb >= top or ryb < 0.0 or ryb >= top:
                        continue
                    amt = ch * wrow[j]
                    kept += 2.0 * amt

                    ixa = int(rxa)
                    iya = int(rya)
                    fx = rxa - ixa
                    fy = rya - iya
                    base = ixa * n + iya
                    buf[base] += amt * (1.0 - fx) * (1.0 - fy)
                    buf[base + 1] += amt * (1.0 - fx) * fy
                    buf[base + n] += amt * fx * (1.0 - fy)
                    buf[base + n + 1] += amt * fx * fy

                    ixa = int(rxb)
                    iya = int(ryb)
                    fx = rxb - ixa
                    fy = ryb - iya
                    base = ixa * n + iya
                    buf[base] += amt * (1.0 - fx) * (1.0 - fy)
                    buf[base + 1] += amt * (1.0 - fx) * fy
                    buf[base + n] += amt * fx * (1.0 - fy)
                    buf[base + n + 1] += amt * fx * fy

                if mode == MODE_STEP and kept != 0.0:
                    half = 0.5 * kept
                    buf[pflat] -= half
                    buf[ax[kk] * n + ay[kk]] -= half

    out = np.zeros(npts)
    for b in range(NBLOCKS):
        for i in range(npts):
            out[i] += out2[b, i]
    return out
