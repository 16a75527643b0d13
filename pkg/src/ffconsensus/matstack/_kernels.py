"""numba-compiled dense kernels.

Every function here takes and returns plain float64 arrays and reports
failures through integer status codes; the dispatching layer in ``core``
turns those into exceptions.
"""

import numpy as np
from numba import njit

_EPS = np.finfo(np.float64).eps


@njit(cache=True)
def balance(a):
    """Diagonal similarity scaling by powers of two (in place)."""
    n = a.shape[0]
    radix = 2.0
    sqrdx = radix * radix
    done = False
    while not done:
        done = True
        for i in range(n):
            r = 0.0
            c = 0.0
            for j in range(n):
                if j != i:
                    c += abs(a[j, i])
                    r += abs(a[i, j])
            if c != 0.0 and r != 0.0:
                g = r / radix
                f = 1.0
                s = c + r
                while c < g:
                    f *= radix
                    c *= sqrdx
                g = r * radix
                while c > g:
                    f /= radix
                    c /= sqrdx
                if (c + r) / f < 0.95 * s:
                    done = False
                    g = 1.0 / f
                    for j in range(n):
                        a[i, j] *= g
                    for j in range(n):
                        a[j, i] *= f
    return a


@njit(cache=True)
def hessenberg(a):
    """Householder reduction to upper Hessenberg form (in place)."""
    n = a.shape[0]
    v = np.empty(n)
    for k in range(n - 2):
        # scale the column first so tiny entries do not underflow when squared
        cmax = 0.0
        for i in range(k + 1, n):
            if abs(a[i, k]) > cmax:
                cmax = abs(a[i, k])
        if cmax == 0.0:
            continue
        alpha = 0.0
        for i in range(k + 1, n):
            v[i] = a[i, k] / cmax
            alpha += v[i] * v[i]
        alpha = np.sqrt(alpha)
        if v[k + 1] > 0.0:
            alpha = -alpha
        vnorm2 = 0.0
        v[k + 1] -= alpha
        for i in range(k + 1, n):
            vnorm2 += v[i] * v[i]
        if vnorm2 == 0.0:
            continue
        # left application: rows k+1.., columns k..
        for j in range(k, n):
            s = 0.0
            for i in range(k + 1, n):
                s += v[i] * a[i, j]
            s *= 2.0 / vnorm2
            for i in range(k + 1, n):
                a[i, j] -= s * v[i]
        # right application: all rows, columns k+1..
        for i in range(n):
            s = 0.0
            for j in range(k + 1, n):
                s += a[i, j] * v[j]
            s *= 2.0 / vnorm2
            for j in range(k + 1, n):
                a[i, j] -= s * v[j]
        for i in range(k + 2, n):
            a[i, k] = 0.0
    return a


@njit(cache=True)
def _sign(a, b):
    return abs(a) if b >= 0.0 else -abs(a)


@njit(cache=True)
def hqr(h, max_its):
    """Eigenvalues of an upper Hessenberg matrix by Francis double-shift QR.

    Returns ``(wr, wi, status)``; ``status`` is 0 on success and 1 when some
    eigenvalue needed more than ``max_its`` iterations.
    """
    n = h.shape[0]
    # 1-based working copy keeps the index arithmetic of the classic routine
    a = np.zeros((n + 1, n + 1))
    for i in range(n):
        for j in range(n):
            a[i + 1, j + 1] = h[i, j]
    wr = np.zeros(n + 1)
    wi = np.zeros(n + 1)

    anorm = 0.0
    for i in range(1, n + 1):
        for j in range(max(i - 1, 1), n + 1):
            anorm += abs(a[i, j])

    # subdiagonals this small are deflated outright (underflow guard)
    smlnum = np.finfo(np.float64).tiny * (n / _EPS)
    nn = n
    t = 0.0
    p = q = r = s = w = x = y = z = 0.0
    while nn >= 1:
        its = 0
        while True:
            l = nn
            while l >= 2:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) + s == s or abs(a[l, l - 1]) <= smlnum:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
            else:
                y = a[nn - 1, nn - 1]
                w = a[nn, nn - 1] * a[nn - 1, nn]
                if l == nn - 1:
                    p = 0.5 * (y - x)
                    q = p * p + w
                    z = np.sqrt(abs(q))
                    x += t
                    if q >= 0.0:
                        z = p + _sign(z, p)
                        wr[nn - 1] = x + z
                        wr[nn] = x + z
                        if z != 0.0:
                            wr[nn] = x - w / z
                        wi[nn - 1] = 0.0
                        wi[nn] = 0.0
                    else:
                        wr[nn - 1] = x + p
                        wr[nn] = x + p
                        wi[nn - 1] = -z
                        wi[nn] = z
                    nn -= 2
                else:
                    if its == max_its:
                        return wr[1:], wi[1:], 1
                    if its > 0 and its % 10 == 0:
                        # exceptional shift
                        t += x
                        for i in range(1, nn + 1):
                            a[i, i] -= x
                        s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                        x = 0.75 * s
                        y = x
                        w = -0.4375 * s * s
                    its += 1
                    m = nn - 2
                    while m >= l:
                        z = a[m, m]
                        r = x - z
                        s = y - z
                        p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                        q = a[m + 1, m + 1] - z - r - s
                        r = a[m + 2, m + 1]
                        s = abs(p) + abs(q) + abs(r)
                        p /= s
                        q /= s
                        r /= s
                        if m == l:
                            break
                        u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                        v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                        if u + v == v:
                            break
                        m -= 1
                    for i in range(m + 2, nn + 1):
                        a[i, i - 2] = 0.0
                        if i != m + 2:
                            a[i, i - 3] = 0.0
                    for k in range(m, nn):
                        if k != m:
                            p = a[k, k - 1]
                            q = a[k + 1, k - 1]
                            r = 0.0
                            if k != nn - 1:
                                r = a[k + 2, k - 1]
                            x = abs(p) + abs(q) + abs(r)
                            if x != 0.0:
                                p /= x
                                q /= x
                                r /= x
                        s = _sign(np.sqrt(p * p + q * q + r * r), p)
                        if s != 0.0:
                            if k == m:
                                if l != m:
                                    a[k, k - 1] = -a[k, k - 1]
                            else:
                                a[k, k - 1] = -s * x
                            p += s
                            x = p / s
                            y = q / s
                            z = r / s
                            q /= p
                            r /= p
                            for j in range(k, nn + 1):
                                p = a[k, j] + q * a[k + 1, j]
                                if k != nn - 1:
                                    p += r * a[k + 2, j]
                                    a[k + 2, j] -= p * z
                                a[k + 1, j] -= p * y
                                a[k, j] -= p * x
                            mmin = nn if nn < k + 3 else k + 3
                            for i in range(l, mmin + 1):
                                p = x * a[i, k] + y * a[i, k + 1]
                                if k != nn - 1:
                                    p += z * a[i, k + 2]
                                    a[i, k + 2] -= p * r
                                a[i, k + 1] -= p * q
                                a[i, k] -= p
            if l >= nn - 1:
                break
    return wr[1:], wi[1:], 0


@njit(cache=True)
def eigvals(m, max_its):
    a = m.copy()
    # entries this far below the largest one only cause underflow in QR;
    # dropping them perturbs the matrix by far less than one ulp of its norm
    amax = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            if abs(a[i, j]) > amax:
                amax = abs(a[i, j])
    cut = amax * 1e-150
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            if abs(a[i, j]) < cut:
                a[i, j] = 0.0
    balance(a)
    hessenberg(a)
    return hqr(a, max_its)


@njit(cache=True)
def spectral_radius(m, max_its):
    wr, wi, status = eigvals(m, max_its)
    rho = 0.0
    for i in range(wr.shape[0]):
        mod = np.hypot(wr[i], wi[i])
        if mod > rho:
            rho = mod
    return rho, status


@njit(cache=True)
def jacobi_svd(m):
    """One-sided (Hestenes) Jacobi SVD of a tall-or-square matrix.

    Returns ``(u, s, v, status)`` with ``m = u @ diag(s) @ v.T``; singular
    values are not sorted.  Columns of ``u`` belonging to zero singular values
    are left as zeros.
    """
    rows, cols = m.shape
    u = m.copy()
    v = np.eye(cols)
    status = 1
    frob2 = 0.0
    for i in range(rows):
        for j in range(cols):
            frob2 += m[i, j] * m[i, j]
    # columns below this squared norm are roundoff and never rotated
    noise2 = _EPS * _EPS * frob2
    for _ in range(80):
        rotated = False
        for p in range(cols - 1):
            for q in range(p + 1, cols):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for i in range(rows):
                    alpha += u[i, p] * u[i, p]
                    beta += u[i, q] * u[i, q]
                    gamma += u[i, p] * u[i, q]
                if gamma == 0.0 or alpha <= noise2 or beta <= noise2:
                    continue
                if abs(gamma) <= _EPS * np.sqrt(alpha) * np.sqrt(beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                sgn = 1.0 if zeta >= 0.0 else -1.0
                if abs(zeta) > 1e150:
                    t = 0.5 / zeta
                else:
                    t = sgn / (abs(zeta) + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = c * t
                for i in range(rows):
                    up = u[i, p]
                    uq = u[i, q]
                    u[i, p] = c * up - s * uq
                    u[i, q] = s * up + c * uq
                for i in range(cols):
                    vp = v[i, p]
                    vq = v[i, q]
                    v[i, p] = c * vp - s * vq
                    v[i, q] = s * vp + c * vq
        if not rotated:
            status = 0
            break
    sv = np.zeros(cols)
    for j in range(cols):
        nrm = 0.0
        for i in range(rows):
            nrm += u[i, j] * u[i, j]
        nrm = np.sqrt(nrm)
        sv[j] = nrm
        if nrm > 0.0:
            for i in range(rows):
                u[i, j] /= nrm
    return u, sv, v, status


@njit(cache=True)
def singular_values(m):
    if m.shape[0] >= m.shape[1]:
        _, s, _, status = jacobi_svd(m)
    else:
        _, s, _, status = jacobi_svd(m.T.copy())
    return s, status


@njit(cache=True)
def pinv(m, rcond):
    rows, cols = m.shape
    transposed = rows < cols
    work = m.T.copy() if transposed else m.copy()
    u, s, v, status = jacobi_svd(work)
    smax = 0.0
    for x in s:
        if x > smax:
            smax = x
    cutoff = rcond * smax
    k = work.shape[1]
    out = np.zeros((work.shape[1], work.shape[0]))
    for j in range(k):
        if s[j] > cutoff and s[j] > 0.0:
            inv = 1.0 / s[j]
            for a in range(out.shape[0]):
                va = v[a, j] * inv
                for b in range(out.shape[1]):
                    out[a, b] += va * u[b, j]
    if transposed:
        return out.T.copy(), status
    return out, status


@njit(cache=True)
def sym_eigvals(m):
    """Cyclic Jacobi eigenvalues of a symmetric matrix."""
    n = m.shape[0]
    a = m.copy()
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += a[i, j] * a[i, j]
    status = 1
    for _ in range(100):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += a[i, j] * a[i, j]
        if off <= 1e-32 * total or off == 0.0:
            status = 0
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if a[p, q] == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * a[p, q])
                sgn = 1.0 if theta >= 0.0 else -1.0
                t = sgn / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i]
    return np.sort(w), status


@njit(cache=True)
def lu_solve(a, b, pivot_tol):
    """Row-equilibrated LU with partial pivoting.

    Returns ``(x, status)``; status 1 flags a pivot below ``pivot_tol``
    (relative to the equilibrated matrix).
    """
    n = a.shape[0]
    r = b.shape[1]
    lu = a.copy()
    x = b.copy()
    for i in range(n):
        scale = 0.0
        for j in range(n):
            if abs(lu[i, j]) > scale:
                scale = abs(lu[i, j])
        if scale == 0.0:
            return x, 1
        for j in range(n):
            lu[i, j] /= scale
        for j in range(r):
            x[i, j] /= scale
    for k in range(n):
        piv = k
        best = abs(lu[k, k])
        for i in range(k + 1, n):
            if abs(lu[i, k]) > best:
                best = abs(lu[i, k])
                piv = i
        if best <= pivot_tol:
            return x, 1
        if piv != k:
            for j in range(n):
                tmp = lu[k, j]
                lu[k, j] = lu[piv, j]
                lu[piv, j] = tmp
            for j in range(r):
                tmp = x[k, j]
                x[k, j] = x[piv, j]
                x[piv, j] = tmp
        for i in range(k + 1, n):
            f = lu[i, k] / lu[k, k]
            if f == 0.0:
                continue
            for j in range(k, n):
                lu[i, j] -= f * lu[k, j]
            for j in range(r):
                x[i, j] -= f * x[k, j]
    for k in range(n - 1, -1, -1):
        for j in range(r):
            s = x[k, j]
            for c in range(k + 1, n):
                s -= lu[k, c] * x[c, j]
            x[k, j] = s / lu[k, k]
    return x, 0


@njit(cache=True)
def sym_max_eig(g):
    """Largest eigenvalue of a symmetric matrix.

    Householder reduction to tridiagonal form followed by Sturm-sequence
    bisection; the result is accurate to a few ulps of ||g||.
    """
    n = g.shape[0]
    t = g.copy()
    hessenberg(t)
    d = np.empty(n)
    e2 = np.zeros(n)
    for i in range(n):
        d[i] = t[i, i]
    for i in range(n - 1):
        off = 0.5 * (t[i + 1, i] + t[i, i + 1])
        e2[i] = off * off
    hi = -np.inf
    lo = np.inf
    for i in range(n):
        rad = 0.0
        if i > 0:
            rad += np.sqrt(e2[i - 1])
        if i < n - 1:
            rad += np.sqrt(e2[i])
        if d[i] + rad > hi:
            hi = d[i] + rad
        if d[i] - rad < lo:
            lo = d[i] - rad
    scale = max(abs(lo), abs(hi))
    if scale == 0.0:
        return 0.0
    tiny = _EPS * scale * 1e-3
    for _ in range(200):
        if hi - lo <= 2.0 * _EPS * max(abs(lo), abs(hi)) + tiny:
            break
        mid = 0.5 * (lo + hi)
        # number of eigenvalues strictly greater than mid
        below = 0
        q = d[0] - mid
        if q == 0.0:
            q = -tiny
        if q < 0.0:
            below += 1
        for i in range(1, n):
            q = d[i] - mid - e2[i - 1] / q
            if q == 0.0:
                q = -tiny
            if q < 0.0:
                below += 1
        if below == n:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


@njit(cache=True)
def max_singular_value(m):
    """Largest singular value as sqrt of the top eigenvalue of the smaller Gram matrix.

    The top eigenvalue of the Gram matrix is computed to eps relative accuracy,
    so squaring costs no precision for sigma_max (only for the small ones).
    """
    rows, cols = m.shape
    if rows >= cols:
        g = m.T @ m
    else:
        g = m @ m.T
    top = sym_max_eig(g)
    if top < 0.0:
        top = 0.0
    return np.sqrt(top), 0
