"""Hot numeric kernels with numba-jitted and pure-numpy execution paths.

Two kernels dominate runtime: the dense simplex pivot loop (called once per
subset evaluation, thousands of times during greedy search and training) and
the brute-force grid scan used to verify LP optima.  Each is written once in
vectorized form; the numba build is the same source compiled with ``njit``.
``backend.set_backend`` / ``ACTUPLACE_NUMBA`` choose which build runs.

Simplex status codes: 0 optimal, 1 infeasible, 2 unbounded, 3 iteration cap.
"""

import numpy as np

from . import backend


def _solve_standard_py(E, f, c, tol, max_iter):
    """Primal simplex for  min c@x  s.t.  E x <= f,  x >= 0  (dense).

    Slack-augmented two-phase tableau method.  Rows with negative right-hand
    side are negated and given phase-1 artificials.  Entering rule: most
    negative reduced cost, lowest index on ties; after 2*(rows+cols)
    iterations the rule switches to Bland's (lowest eligible index).  The
    leaving row always breaks ratio ties by the lowest basic-variable index.

    Returns (status, x, iterations).
    """
    rows, ns = E.shape
    x = np.zeros(ns)
    if rows == 0:
        if np.all(c >= -tol):
            return 0, x, 0
        return 2, x, 0

    sign = np.where(f < 0.0, -1.0, 1.0)
    fn = f * sign
    art_rows = np.where(sign < 0.0)[0]
    n_art = art_rows.shape[0]
    n_real = ns + rows
    ncols = n_real + n_art
    rhs_col = ncols

    T = np.zeros((rows + 1, ncols + 1))
    T[:rows, :ns] = E * sign.reshape(rows, 1)
    basis = np.empty(rows, dtype=np.int64)
    for i in range(rows):
        T[i, ns + i] = sign[i]
        basis[i] = ns + i
    for a in range(n_art):
        i = art_rows[a]
        T[i, n_real + a] = 1.0
        basis[i] = n_real + a
    T[:rows, rhs_col] = fn

    feas_tol = tol * (1.0 + np.abs(fn).max())
    bland_after = 2 * (rows + ncols)
    niter = 0

    for phase in range(2):
        if phase == 0 and n_art == 0:
            continue
        cost = np.zeros(ncols)
        if phase == 0:
            cost[n_real:] = 1.0
            n_enter = ncols
        else:
            cost[:ns] = c
            n_enter = n_real

        # price out the current basis into the cost row
        T[rows, :] = 0.0
        T[rows, :ncols] = cost
        for i in range(rows):
            cb = cost[basis[i]]
            if cb != 0.0:
                T[rows] = T[rows] - cb * T[i]

        while True:
            r = T[rows, :n_enter]
            if niter < bland_after:
                j = int(np.argmin(r))
                if r[j] >= -tol:
                    break
            else:
                negs = np.where(r < -tol)[0]
                if negs.shape[0] == 0:
                    break
                j = int(negs[0])
            if niter >= max_iter:
                return 3, x, niter

            col = T[:rows, j]
            pos = col > tol
            safe = np.where(pos, col, 1.0)
            ratios = np.where(pos, T[:rows, rhs_col] / safe, np.inf)
            rmin = ratios.min()
            if rmin == np.inf:
                if phase == 0:
                    return 3, x, niter
                return 2, x, niter
            ties = np.where(ratios <= rmin + 1e-12 * (1.0 + rmin))[0]
            p = int(ties[np.argmin(basis[ties])])

            piv = T[p, j]
            T[p] = T[p] / piv
            colfull = T[:, j].copy()
            colfull[p] = 0.0
            T -= np.outer(colfull, T[p])
            T[:, j] = 0.0
            T[p, j] = 1.0
            basis[p] = j
            niter += 1

        if phase == 0:
            if -T[rows, rhs_col] > feas_tol:
                return 1, x, niter
            # pivot leftover artificials out of the basis where possible;
            # rows without a usable entry are redundant and stay put at zero
            for i in range(rows):
                if basis[i] >= n_real:
                    for j2 in range(n_real):
                        if abs(T[i, j2]) > tol:
                            piv = T[i, j2]
                            T[i] = T[i] / piv
                            colfull = T[:, j2].copy()
                            colfull[i] = 0.0
                            T -= np.outer(colfull, T[i])
                            T[:, j2] = 0.0
                            T[i, j2] = 1.0
                            basis[i] = j2
                            break

    for i in range(rows):
        if basis[i] < ns:
            x[basis[i]] = T[i, rhs_col]
    return 0, x, niter


def _grid_min_gap_loops_py(psi, Us, lo, hi, step):
    """Exhaustive grid scan of  min_F max_i |psi_i + (Us F)_i|  over a box.

    Loop form for the jitted build; supports 0..3 columns.  A candidate is
    abandoned as soon as its partial max reaches the running best, which
    never changes the returned minimum (the winner is always fully scanned).
    """
    n = psi.shape[0]
    k = Us.shape[1]
    if k == 0:
        best = 0.0
        for i in range(n):
            v = abs(psi[i])
            if v > best:
                best = v
        return best

    n0 = int((hi[0] - lo[0]) / step + 0.5) + 1
    best = np.inf
    if k == 1:
        u0 = Us[:, 0]
        for i0 in range(n0):
            f0 = lo[0] + step * i0
            cur = 0.0
            for i in range(n):
                v = abs(psi[i] + u0[i] * f0)
                if v > cur:
                    cur = v
                    if cur >= best:
                        break
            if cur < best:
                best = cur
        return best

    n1 = int((hi[1] - lo[1]) / step + 0.5) + 1
    if k == 2:
        u0 = Us[:, 0]
        u1 = Us[:, 1]
        base0 = np.empty(n)
        for i0 in range(n0):
            f0 = lo[0] + step * i0
            for i in range(n):
                base0[i] = psi[i] + u0[i] * f0
            for i1 in range(n1):
                f1 = lo[1] + step * i1
                cur = 0.0
                for i in range(n):
                    v = abs(base0[i] + u1[i] * f1)
                    if v > cur:
                        cur = v
                        if cur >= best:
                            break
                if cur < best:
                    best = cur
        return best

    n2 = int((hi[2] - lo[2]) / step + 0.5) + 1
    u0 = Us[:, 0]
    u1 = Us[:, 1]
    u2 = Us[:, 2]
    base0 = np.empty(n)
    base01 = np.empty(n)
    for i0 in range(n0):
        f0 = lo[0] + step * i0
        for i in range(n):
            base0[i] = psi[i] + u0[i] * f0
        for i1 in range(n1):
            f1 = lo[1] + step * i1
            for i in range(n):
                base01[i] = base0[i] + u1[i] * f1
            for i2 in range(n2):
                f2 = lo[2] + step * i2
                cur = 0.0
                for i in range(n):
                    v = abs(base01[i] + u2[i] * f2)
                    if v > cur:
                        cur = v
                        if cur >= best:
                            break
                if cur < best:
                    best = cur
    return best


def _grid_min_gap_numpy(psi, Us, lo, hi, step):
    """Vectorized twin of the grid scan (chunked over the leading force)."""
    n = psi.shape[0]
    k = Us.shape[1]
    if k == 0:
        return float(np.max(np.abs(psi)))

    grids = [lo[j] + step * np.arange(int((hi[j] - lo[j]) / step + 0.5) + 1)
             for j in range(k)]
    if k == 1:
        delta = psi[None, :] + grids[0][:, None] * Us[:, 0][None, :]
        return float(np.abs(delta).max(axis=1).min())
    if k == 2:
        plane1 = grids[1][:, None] * Us[:, 1][None, :]
        best = np.inf
        for f0 in grids[0]:
            delta = (psi + Us[:, 0] * f0)[None, :] + plane1
            best = min(best, float(np.abs(delta).max(axis=1).min()))
        return best
    if k == 3:
        plane1 = grids[1][:, None] * Us[:, 1][None, :]
        plane2 = grids[2][:, None] * Us[:, 2][None, :]
        best = np.inf
        for f0 in grids[0]:
            base = (psi + Us[:, 0] * f0)[None, :] + plane1
            delta = base[:, None, :] + plane2[None, :, :]
            best = min(best, float(np.abs(delta).max(axis=2).min()))
        return best
    raise ValueError("grid search supports at most 3 columns, got %d" % k)


if backend.HAS_NUMBA:
    import numba

    _solve_standard_nb = numba.njit(cache=True)(_solve_standard_py)
    _grid_min_gap_nb = numba.njit(cache=True)(_grid_min_gap_loops_py)
else:  # pragma: no cover
    _solve_standard_nb = None
    _grid_min_gap_nb = None


def _carray(a):
    # uniform dtype/layout/writability so the jitted builds see a single
    # signature; readonly views (frozen Instance fields) would otherwise
    # trigger a second compilation
    a = np.ascontiguousarray(a, dtype=np.float64)
    if not a.flags.writeable:
        a = a.copy()
    return a


def solve_standard_form(E, f, c, tol=1e-9, max_iter=10_000):
    """Dispatch the simplex kernel to the active backend."""
    E = _carray(E)
    f = _carray(f)
    c = _carray(c)
    if backend.current_backend() == "numba":
        status, x, niter = _solve_standard_nb(E, f, c, tol, max_iter)
    else:
        status, x, niter = _solve_standard_py(E, f, c, tol, max_iter)
    return int(status), x, int(niter)


def grid_min_gap(psi, Us, lo, hi, step):
    """Exhaustive grid minimum of the worst absolute gap over a force box.

    Verification oracle: independent of the simplex path.  At most three
    force columns (the scan is exponential in the column count).
    """
    psi = _carray(psi)
    Us = _carray(Us)
    lo = _carray(lo)
    hi = _carray(hi)
    if Us.shape[1] > 3:
        raise ValueError("grid search supports at most 3 columns")
    if backend.current_backend() == "numba":
        return float(_grid_min_gap_nb(psi, Us, lo, hi, step))
    return float(_grid_min_gap_numpy(psi, Us, lo, hi, step))
