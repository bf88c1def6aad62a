"""Compiled inner loop for the space flow.

Advances the explicit Euler + redistribution iteration for a block of
steps without touching Python objects; falls back to the numpy stepper in
flow.py when numba is unavailable.
"""

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*a, **k):
        def wrap(f):
            return f

        return wrap


STATUS_OK = 0
STATUS_SINGULAR = 1
STATUS_TMAX = 2


@njit(cache=True)
def flow_block(pts, safety, n_steps, t0, t_max):
    """Advance up to n_steps explicit Euler steps with per-step arclength
    redistribution.

    Returns (points, t, steps_done, status, max_curvature_last_step).
    """
    n, dim = pts.shape
    P = pts.copy()
    Q = np.empty_like(P)
    h = np.empty(n)
    s = np.empty(n + 1)
    t = t0
    kmax = 0.0
    done = 0
    status = STATUS_OK
    for _ in range(n_steps):
        # segment lengths
        hmin = 1e300
        for j in range(n):
            jn = j + 1 if j + 1 < n else 0
            acc = 0.0
            for d in range(dim):
                diff = P[jn, d] - P[j, d]
                acc += diff * diff
            h[j] = np.sqrt(acc)
            if h[j] < hmin:
                hmin = h[j]
        if hmin == 0.0:
            status = STATUS_SINGULAR
            break
        dt = safety * hmin * hmin / 2.0
        if t_max > 0.0 and t + dt > t_max:
            status = STATUS_TMAX
            break
        # Euler update with the nonuniform three-point stencil
        kmax = 0.0
        for j in range(n):
            jn = j + 1 if j + 1 < n else 0
            jp = j - 1 if j > 0 else n - 1
            w = 2.0 / (h[jp] + h[j])
            knorm = 0.0
            for d in range(dim):
                kd = w * ((P[jn, d] - P[j, d]) / h[j] - (P[j, d] - P[jp, d]) / h[jp])
                knorm += kd * kd
                Q[j, d] = P[j, d] + dt * kd
            if knorm > kmax:
                kmax = knorm
        # redistribution by arclength along the updated polyline
        s[0] = 0.0
        singular = False
        for j in range(n):
            jn = j + 1 if j + 1 < n else 0
            acc = 0.0
            for d in range(dim):
                diff = Q[jn, d] - Q[j, d]
                acc += diff * diff
            seg = np.sqrt(acc)
            if seg == 0.0:
                singular = True
            s[j + 1] = s[j] + seg
        if singular:
            status = STATUS_SINGULAR
            break
        total = s[n]
        seg_idx = 0
        for k in range(n):
            target = total * k / n
            while s[seg_idx + 1] < target and seg_idx < n - 1:
                seg_idx += 1
            denom = s[seg_idx + 1] - s[seg_idx]
            frac = (target - s[seg_idx]) / denom
            jn = seg_idx + 1 if seg_idx + 1 < n else 0
            for d in range(dim):
                P[k, d] = Q[seg_idx, d] + frac * (Q[jn, d] - Q[seg_idx, d])
        t += dt
        done += 1
    return P, t, done, status, np.sqrt(kmax)
