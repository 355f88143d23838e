"""Numba kernels for the monotone finite-difference residual and sweeps.

Residual convention at a node:

    res = -Tr(a D^2 u) + b * q^m + (c + lam) * u - f

with q the Godunov upwind gradient magnitude: per axis max(backward
difference, -forward difference, 0) (shifted by a constant slope for cell
problems), combined across axes by the Euclidean norm, clamped at `pclamp`.
Boundary handling: state constraint evaluates the same operator with only
the inward one-sided differences and no normal-axis diffusion; generalized
Dirichlet wraps that one-sided value as max(equation, u - g), whose zero set
is the discrete disjunction "data active (u = g) or equation active".

A sweep step is the synchronized Jacobi update u <- u - dtau * res.  With
`use_local` the per-node dtau is sigma over a local Lipschitz bound of the
residual (diffusion + gradient + zeroth-order rows); otherwise the global
dt passed in is used.  `anchor_gain` (= 1/lam when enabled) subtracts the
mean residual divided by lam after each step, which removes the slow
constant mode of discounted problems without moving the fixed point.

Passing sigma = 0 and nsteps = 1 fills `res` without touching u, which is
how plain residual evaluation is implemented.
"""

import numpy as np
from numba import njit

BIG = 1e300


@njit(cache=True)
def sweep_1d(u, res, qcl, a, b, c, f, gl, gr, m, lam, dx, pclamp, shift,
             bcl, bcr, scl, scr, dxa, sigma, nsteps, use_local, dt_global,
             anchor_gain):
    n = u.shape[0]
    supres = 0.0
    qmax = 0.0
    dx2 = dx * dx
    for _ in range(nsteps):
        supres = 0.0
        qmax = 0.0
        ssum = 0.0
        for i in range(1, n - 1):
            dm = (u[i] - u[i - 1]) / dx + shift
            dp = (u[i + 1] - u[i]) / dx + shift
            q = dm if dm > 0.0 else 0.0
            if -dp > q:
                q = -dp
            if q > qmax:
                qmax = q
            qc = q if q < pclamp else pclamp
            qcl[i] = qc
            res[i] = (-a[i] * (u[i + 1] - 2.0 * u[i] + u[i - 1]) / dx2
                      + b[i] * qc**m + (c[i] + lam) * u[i] - f[i])
        # left boundary: inward one-sided gradient, no diffusion row
        dp = (u[1] - u[0]) / dx + shift
        q = -dp if -dp > 0.0 else 0.0
        if q > qmax:
            qmax = q
        qc = q if q < pclamp else pclamp
        qcl[0] = qc
        if bcl == 1:
            eq = b[0] * qc**m + (c[0] + lam) * u[0] - f[0]
            d = u[0] - gl
            res[0] = eq if eq > d else d
        elif scl >= 0.0:
            # state constraint with diffusion: pin the wall cell to the
            # universal boundary-layer rise K * dx^alpha
            res[0] = (u[0] - u[1]) / dxa - scl
        else:
            res[0] = b[0] * qc**m + (c[0] + lam) * u[0] - f[0]
        # right boundary
        dm = (u[n - 1] - u[n - 2]) / dx + shift
        q = dm if dm > 0.0 else 0.0
        if q > qmax:
            qmax = q
        qc = q if q < pclamp else pclamp
        qcl[n - 1] = qc
        if bcr == 1:
            eq = b[n - 1] * qc**m + (c[n - 1] + lam) * u[n - 1] - f[n - 1]
            d = u[n - 1] - gr
            res[n - 1] = eq if eq > d else d
        elif scr >= 0.0:
            res[n - 1] = (u[n - 1] - u[n - 2]) / dxa - scr
        else:
            res[n - 1] = b[n - 1] * qc**m + (c[n - 1] + lam) * u[n - 1] - f[n - 1]
        # synchronized update
        for i in range(n):
            r = res[i]
            ar = r if r > 0.0 else -r
            if ar > supres:
                supres = ar
            ssum += r
            if use_local:
                qc = qcl[i]
                gradL = m * b[i] * qc ** (m - 1.0) / dx if qc > 1.0 else m * b[i] / dx
                L = gradL + c[i] + lam
                if 0 < i < n - 1:
                    L += 2.0 * a[i] / dx2
                elif (i == 0 and bcl == 0 and scl >= 0.0) or \
                        (i == n - 1 and bcr == 0 and scr >= 0.0):
                    L = 2.0 / dxa
                if (i == 0 and bcl == 1) or (i == n - 1 and bcr == 1):
                    L += 1.0
                u[i] -= (sigma / L) * r
            else:
                u[i] -= dt_global * r
        if anchor_gain > 0.0:
            sh = (ssum / n) * anchor_gain
            for i in range(n):
                u[i] -= sh
    return supres, qmax


@njit(cache=True)
def sweep_1d_periodic(u, res, qcl, a, b, c, f, m, lam, dx, pclamp, shift,
                      sigma, nsteps, use_local, dt_global, anchor_gain):
    n = u.shape[0]
    supres = 0.0
    qmax = 0.0
    dx2 = dx * dx
    for _ in range(nsteps):
        supres = 0.0
        qmax = 0.0
        ssum = 0.0
        for i in range(n):
            im = i - 1 if i > 0 else n - 1
            ip = i + 1 if i < n - 1 else 0
            dm = (u[i] - u[im]) / dx + shift
            dp = (u[ip] - u[i]) / dx + shift
            q = dm if dm > 0.0 else 0.0
            if -dp > q:
                q = -dp
            if q > qmax:
                qmax = q
            qc = q if q < pclamp else pclamp
            qcl[i] = qc
            res[i] = (-a[i] * (u[ip] - 2.0 * u[i] + u[im]) / dx2
                      + b[i] * qc**m + (c[i] + lam) * u[i] - f[i])
        for i in range(n):
            r = res[i]
            ar = r if r > 0.0 else -r
            if ar > supres:
                supres = ar
            ssum += r
            if use_local:
                qc = qcl[i]
                gradL = m * b[i] * qc ** (m - 1.0) / dx if qc > 1.0 else m * b[i] / dx
                L = 2.0 * a[i] / dx2 + gradL + c[i] + lam
                u[i] -= (sigma / L) * r
            else:
                u[i] -= dt_global * r
        if anchor_gain > 0.0:
            sh = (ssum / n) * anchor_gain
            for i in range(n):
                u[i] -= sh
    return supres, qmax


@njit(cache=True)
def sweep_2d(u, res, qcl, a11, a22, a12, b, c, f, g, m, lam, dx, dy, pclamp,
             sx, sy, bc, capx, capy, dxax, dxay, sigma, nsteps, use_local,
             dt_global, anchor_gain):
    nx, ny = u.shape
    supres = 0.0
    qmax = 0.0
    dx2 = dx * dx
    dy2 = dy * dy
    dxy = dx * dy
    for _ in range(nsteps):
        supres = 0.0
        qmax = 0.0
        ssum = 0.0
        for i in range(nx):
            for j in range(ny):
                left = i > 0
                right = i < nx - 1
                down = j > 0
                up = j < ny - 1
                dmx = (u[i, j] - u[i - 1, j]) / dx + sx if left else -BIG
                dpx = (u[i + 1, j] - u[i, j]) / dx + sx if right else BIG
                dmy = (u[i, j] - u[i, j - 1]) / dy + sy if down else -BIG
                dpy = (u[i, j + 1] - u[i, j]) / dy + sy if up else BIG
                qx = dmx if dmx > 0.0 else 0.0
                if -dpx > qx:
                    qx = -dpx
                qy = dmy if dmy > 0.0 else 0.0
                if -dpy > qy:
                    qy = -dpy
                q = np.sqrt(qx * qx + qy * qy)
                if q > qmax:
                    qmax = q
                qc = q if q < pclamp else pclamp
                qcl[i, j] = qc
                val = b[i, j] * qc**m + (c[i, j] + lam) * u[i, j] - f[i, j]
                if left and right:
                    val -= a11[i, j] * (u[i + 1, j] - 2.0 * u[i, j] + u[i - 1, j]) / dx2
                if down and up:
                    val -= a22[i, j] * (u[i, j + 1] - 2.0 * u[i, j] + u[i, j - 1]) / dy2
                if left and right and down and up and a12[i, j] != 0.0:
                    aa = a12[i, j]
                    axis = (u[i + 1, j] + u[i - 1, j] + u[i, j + 1] + u[i, j - 1])
                    if aa > 0.0:
                        uxy = (2.0 * u[i, j] + u[i + 1, j + 1] + u[i - 1, j - 1]
                               - axis) / (2.0 * dxy)
                    else:
                        uxy = -(2.0 * u[i, j] + u[i + 1, j - 1] + u[i - 1, j + 1]
                                - axis) / (2.0 * dxy)
                    val -= 2.0 * aa * uxy
                if not (left and right and down and up):
                    if bc == 1:
                        d = u[i, j] - g[i, j]
                        res[i, j] = val if val > d else d
                    else:
                        # state constraint: layer-cap rows where the normal
                        # diffusion is active, one-sided equation otherwise
                        capr = -BIG
                        if not left and capx[i, j] >= 0.0:
                            r1 = (u[0, j] - u[1, j]) / dxax - capx[i, j]
                            if r1 > capr:
                                capr = r1
                        if not right and capx[i, j] >= 0.0:
                            r1 = (u[nx - 1, j] - u[nx - 2, j]) / dxax - capx[i, j]
                            if r1 > capr:
                                capr = r1
                        if not down and capy[i, j] >= 0.0:
                            r1 = (u[i, 0] - u[i, 1]) / dxay - capy[i, j]
                            if r1 > capr:
                                capr = r1
                        if not up and capy[i, j] >= 0.0:
                            r1 = (u[i, ny - 1] - u[i, ny - 2]) / dxay - capy[i, j]
                            if r1 > capr:
                                capr = r1
                        res[i, j] = capr if capr > -0.5 * BIG else val
                else:
                    res[i, j] = val
        for i in range(nx):
            for j in range(ny):
                r = res[i, j]
                ar = r if r > 0.0 else -r
                if ar > supres:
                    supres = ar
                ssum += r
                if use_local:
                    qc2 = qcl[i, j]
                    gq = qc2 ** (m - 1.0) if qc2 > 1.0 else 1.0
                    L = (m * b[i, j] * gq * (1.0 / dx + 1.0 / dy)
                         + c[i, j] + lam)
                    interior = 0 < i < nx - 1 and 0 < j < ny - 1
                    if 0 < i < nx - 1:
                        L += 2.0 * a11[i, j] / dx2
                    if 0 < j < ny - 1:
                        L += 2.0 * a22[i, j] / dy2
                    if interior and a12[i, j] != 0.0:
                        aa = a12[i, j] if a12[i, j] > 0.0 else -a12[i, j]
                        L += 2.0 * aa / dxy
                    if not interior:
                        if bc == 1:
                            L += 1.0
                        elif capx[i, j] >= 0.0 or capy[i, j] >= 0.0:
                            La = 2.0 / dxax if dxax < dxay else 2.0 / dxay
                            if La > L:
                                L = La
                    u[i, j] -= (sigma / L) * r
                else:
                    u[i, j] -= dt_global * r
        if anchor_gain > 0.0:
            sh = (ssum / (nx * ny)) * anchor_gain
            for i in range(nx):
                for j in range(ny):
                    u[i, j] -= sh
    return supres, qmax


@njit(cache=True)
def sweep_2d_periodic(u, res, qcl, a11, a22, a12, b, c, f, m, lam, dx, dy,
                      pclamp, sx, sy, sigma, nsteps, use_local, dt_global,
                      anchor_gain):
    nx, ny = u.shape
    supres = 0.0
    qmax = 0.0
    dx2 = dx * dx
    dy2 = dy * dy
    dxy = dx * dy
    for _ in range(nsteps):
        supres = 0.0
        qmax = 0.0
        ssum = 0.0
        for i in range(nx):
            for j in range(ny):
                im = i - 1 if i > 0 else nx - 1
                ip = i + 1 if i < nx - 1 else 0
                jm = j - 1 if j > 0 else ny - 1
                jp = j + 1 if j < ny - 1 else 0
                dmx = (u[i, j] - u[im, j]) / dx + sx
                dpx = (u[ip, j] - u[i, j]) / dx + sx
                dmy = (u[i, j] - u[i, jm]) / dy + sy
                dpy = (u[i, jp] - u[i, j]) / dy + sy
                qx = dmx if dmx > 0.0 else 0.0
                if -dpx > qx:
                    qx = -dpx
                qy = dmy if dmy > 0.0 else 0.0
                if -dpy > qy:
                    qy = -dpy
                q = np.sqrt(qx * qx + qy * qy)
                if q > qmax:
                    qmax = q
                qc = q if q < pclamp else pclamp
                qcl[i, j] = qc
                val = (b[i, j] * qc**m + (c[i, j] + lam) * u[i, j] - f[i, j]
                       - a11[i, j] * (u[ip, j] - 2.0 * u[i, j] + u[im, j]) / dx2
                       - a22[i, j] * (u[i, jp] - 2.0 * u[i, j] + u[i, jm]) / dy2)
                if a12[i, j] != 0.0:
                    aa = a12[i, j]
                    axis = u[ip, j] + u[im, j] + u[i, jp] + u[i, jm]
                    if aa > 0.0:
                        uxy = (2.0 * u[i, j] + u[ip, jp] + u[im, jm] - axis) / (2.0 * dxy)
                    else:
                        uxy = -(2.0 * u[i, j] + u[ip, jm] + u[im, jp] - axis) / (2.0 * dxy)
                    val -= 2.0 * aa * uxy
                res[i, j] = val
        for i in range(nx):
            for j in range(ny):
                r = res[i, j]
                ar = r if r > 0.0 else -r
                if ar > supres:
                    supres = ar
                ssum += r
                if use_local:
                    qc2 = qcl[i, j]
                    gq = qc2 ** (m - 1.0) if qc2 > 1.0 else 1.0
                    L = (2.0 * a11[i, j] / dx2 + 2.0 * a22[i, j] / dy2
                         + m * b[i, j] * gq * (1.0 / dx + 1.0 / dy)
                         + c[i, j] + lam)
                    if a12[i, j] != 0.0:
                        aa = a12[i, j] if a12[i, j] > 0.0 else -a12[i, j]
                        L += 2.0 * aa / dxy
                    u[i, j] -= (sigma / L) * r
                else:
                    u[i, j] -= dt_global * r
        if anchor_gain > 0.0:
            sh = (ssum / (nx * ny)) * anchor_gain
            for i in range(nx):
                for j in range(ny):
                    u[i, j] -= sh
    return supres, qmax


@njit(cache=True)
def sweep_1d_table(u, res, qcl, hp, hv, c, f, gl, gr, lam, dx, lip_h,
                   bcl, bcr, sigma, nsteps, use_local, dt_global):
    """First-order sweep with a tabulated even Hamiltonian H(|p|).

    (hp, hv) tabulate H on |p| >= 0 with monotone piecewise-linear
    interpolation; lip_h is the table's maximum slope, used in the local
    Lipschitz bound.
    """
    n = u.shape[0]
    supres = 0.0
    qmax = 0.0
    for _ in range(nsteps):
        supres = 0.0
        qmax = 0.0
        for i in range(n):
            if 0 < i < n - 1:
                dm = (u[i] - u[i - 1]) / dx
                dp = (u[i + 1] - u[i]) / dx
                q = dm if dm > 0.0 else 0.0
                if -dp > q:
                    q = -dp
            elif i == 0:
                dp = (u[1] - u[0]) / dx
                q = -dp if -dp > 0.0 else 0.0
            else:
                dm = (u[n - 1] - u[n - 2]) / dx
                q = dm if dm > 0.0 else 0.0
            if q > qmax:
                qmax = q
            qcl[i] = q
            hval = np.interp(q, hp, hv)
            eq = hval + (c[i] + lam) * u[i] - f[i]
            if i == 0 and bcl == 1:
                d = u[0] - gl
                res[0] = eq if eq > d else d
            elif i == n - 1 and bcr == 1:
                d = u[n - 1] - gr
                res[n - 1] = eq if eq > d else d
            else:
                res[i] = eq
        for i in range(n):
            r = res[i]
            ar = r if r > 0.0 else -r
            if ar > supres:
                supres = ar
            if use_local:
                L = lip_h / dx + c[i] + lam
                if (i == 0 and bcl == 1) or (i == n - 1 and bcr == 1):
                    L += 1.0
                u[i] -= (sigma / L) * r
            else:
                u[i] -= dt_global * r
    return supres, qmax


@njit(cache=True)
def sweep_1d_imex(u, res, qcl, low, dia, upp, rhs, a, b, c, f, gl, gr, m, lam,
                  dx, pclamp, shift, bcl, bcr, scl, scr, dxa, sigma, nsteps,
                  anchor_gain):
    """IMEX step: implicit tridiagonal diffusion, explicit Godunov transport.

    Per step: v = u - D N(u) with per-node advective-CFL D, then
    (I + D A) u_new = v by the Thomas algorithm, where A holds the centered
    diffusion rows (zero at the boundary, whose one-sided operator lives in
    N).  Both halves are monotone maps and the fixed point is the same
    discrete residual A(u) + N(u) = 0; what the implicit half buys is a
    step size free of the dx^-2 diffusion constraint.
    """
    n = u.shape[0]
    dx2 = dx * dx
    supres = 0.0
    qmax = 0.0
    for _ in range(nsteps):
        supres = 0.0
        qmax = 0.0
        ssum = 0.0
        for i in range(n):
            if 0 < i < n - 1:
                dm = (u[i] - u[i - 1]) / dx + shift
                dp = (u[i + 1] - u[i]) / dx + shift
                q = dm if dm > 0.0 else 0.0
                if -dp > q:
                    q = -dp
            elif i == 0:
                dp = (u[1] - u[0]) / dx + shift
                q = -dp if -dp > 0.0 else 0.0
            else:
                dm = (u[n - 1] - u[n - 2]) / dx + shift
                q = dm if dm > 0.0 else 0.0
            if q > qmax:
                qmax = q
            qc = q if q < pclamp else pclamp
            qcl[i] = qc
            nval = b[i] * qc**m + (c[i] + lam) * u[i] - f[i]
            aval = 0.0
            if i == 0:
                if bcl == 1:
                    d = u[0] - gl
                    nval = nval if nval > d else d
                elif scl >= 0.0:
                    nval = (u[0] - u[1]) / dxa - scl
            elif i == n - 1:
                if bcr == 1:
                    d = u[n - 1] - gr
                    nval = nval if nval > d else d
                elif scr >= 0.0:
                    nval = (u[n - 1] - u[n - 2]) / dxa - scr
            else:
                aval = -a[i] * (u[i + 1] - 2.0 * u[i] + u[i - 1]) / dx2
            r = nval + aval
            res[i] = r
            ar = r if r > 0.0 else -r
            if ar > supres:
                supres = ar
            ssum += r
            gradL = m * b[i] * qc ** (m - 1.0) / dx if qc > 1.0 else m * b[i] / dx
            L = gradL + c[i] + lam
            if (i == 0 and bcl == 1) or (i == n - 1 and bcr == 1):
                L += 1.0
            elif (i == 0 and bcl == 0 and scl >= 0.0) or \
                    (i == n - 1 and bcr == 0 and scr >= 0.0):
                L = 2.0 / dxa
            dtau = sigma / L
            rhs[i] = u[i] - dtau * nval
            if 0 < i < n - 1:
                w = dtau * a[i] / dx2
                low[i] = -w
                upp[i] = -w
                dia[i] = 1.0 + 2.0 * w
            else:
                low[i] = 0.0
                upp[i] = 0.0
                dia[i] = 1.0
        for i in range(1, n):
            wfac = low[i] / dia[i - 1]
            dia[i] -= wfac * upp[i - 1]
            rhs[i] -= wfac * rhs[i - 1]
        u[n - 1] = rhs[n - 1] / dia[n - 1]
        for i in range(n - 2, -1, -1):
            u[i] = (rhs[i] - upp[i] * u[i + 1]) / dia[i]
        if anchor_gain > 0.0:
            sh = (ssum / n) * anchor_gain
            for i in range(n):
                u[i] -= sh
    return supres, qmax
