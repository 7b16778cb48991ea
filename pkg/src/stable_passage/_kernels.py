"""Compiled inner loops.

All kernels take a ``numpy.random.Generator`` (Philox) and advance it in
place, so a block's output depends only on the generator handed in.
"""
import math

import numba as nb
import numpy as np

LATTICE, PARETO, STABLE = 0, 1, 2

_jit = nb.njit(cache=True, nogil=True)


@_jit
def draw(rng, code, par, offs, cum):
    if code == LATTICE:
        u = rng.random()
        k = 0
        while u >= cum[k]:
            k += 1
        return offs[k]
    if code == PARETO:
        # par = (tail index, p_right, mean shift)
        y = (1.0 - rng.random()) ** (-1.0 / par[0])
        if rng.random() < par[1]:
            return y - par[2]
        return -y - par[2]
    # Chambers-Mallows-Stuck; par = (alpha, beta, sigma, B, S)
    alpha = par[0]
    v = math.pi * (rng.random() - 0.5)
    w = rng.standard_exponential()
    if alpha == 1.0:
        x = math.tan(v)
    else:
        ab = alpha * (v + par[3])
        x = (
            par[4]
            * math.sin(ab)
            / math.cos(v) ** (1.0 / alpha)
            * (math.cos(v - ab) / w) ** ((1.0 - alpha) / alpha)
        )
    return par[2] * x


@_jit
def fill_draws(rng, code, par, offs, cum, out):
    for i in range(out.shape[0]):
        out[i] = draw(rng, code, par, offs, cum)


@_jit
def endpoint_block(rng, code, par, offs, cum, n, out):
    """S_n for ``out.shape[0]`` independent walks."""
    for i in range(out.shape[0]):
        s = 0.0
        for _ in range(n):
            s += draw(rng, code, par, offs, cum)
        out[i] = s


@_jit
def _popcount(x):
    x = x - ((x >> 1) & 0x5555555555555555)
    x = (x & 0x3333333333333333) + ((x >> 2) & 0x3333333333333333)
    x = (x + (x >> 4)) & 0x0F0F0F0F0F0F0F0F
    return (x * 0x0101010101010101) >> 56


@_jit
def _binomial(rng, n, q):
    # a double from Generator.random carries 53 fair bits, so for a fair
    # split the count of set bits over ceil(n / 53) draws is exactly Bin(n, 1/2)
    if q == 0.5 and n <= 424:
        k = 0
        while n > 0:
            bits = np.uint64(rng.random() * 9007199254740992.0)
            if n < 53:
                bits &= (np.uint64(1) << np.uint64(n)) - np.uint64(1)
            k += _popcount(bits)
            n -= 53
        return np.int64(k)
    return rng.binomial(n, q)


@_jit
def _lattice_jump(rng, offs, probs, steps):
    # sum of `steps` i.i.d. lattice increments, via sequential binomials
    k = offs.shape[0]
    rem = steps
    left = 1.0
    s = 0.0
    for j in range(k - 1):
        if rem == 0:
            break
        q = probs[j] / left
        m = _binomial(rng, rem, q) if q < 1.0 else rem
        s += offs[j] * m
        rem -= m
        left -= probs[j]
    return s + offs[k - 1] * rem


@_jit
def lattice_endpoint_block(rng, offs, probs, n, out):
    """Exact S_n for a lattice law via a multinomial split of the n steps."""
    for i in range(out.shape[0]):
        out[i] = _lattice_jump(rng, offs, probs, n)


@_jit
def passage_block(rng, code, par, offs, cum, g, strict, start, rec, t_out, x_out, rec_out,
                  sup_out, avg_out):
    """Simulate walks until the first crossing of ``g`` or the horizon.

    ``g[k]`` is the boundary at step k (``g[0]`` unused), the horizon is
    ``len(g) - 1``.  ``t_out`` gets the crossing time or ``horizon + 1`` when
    censored; ``x_out`` the position at that time.  ``rec_out[i, j]`` is the
    position at step ``rec[j]`` if the walk is still alive there, else NaN.
    ``sup_out`` / ``avg_out`` are max_{k<=N} S_k and mean_{k<N} S_k over the
    full horizon (NaN for walks that crossed).
    """
    horizon = g.shape[0] - 1
    nrec = rec.shape[0]
    for i in range(t_out.shape[0]):
        s = start
        smax = start
        ssum = 0.0
        j = 0
        t = horizon + 1
        for k in range(1, horizon + 1):
            ssum += s
            s += draw(rng, code, par, offs, cum)
            if s > smax:
                smax = s
            if (strict and s < g[k]) or ((not strict) and s <= g[k]):
                t = k
                break
            while j < nrec and rec[j] == k:
                rec_out[i, j] = s
                j += 1
        while j < nrec:
            rec_out[i, j] = np.nan
            j += 1
        t_out[i] = t
        x_out[i] = s
        if t > horizon:
            sup_out[i] = smax
            avg_out[i] = ssum / horizon
        else:
            sup_out[i] = np.nan
            avg_out[i] = np.nan


@_jit
def ladder_search(rng, code, par, offs, cum, probs, sign, weak, skip, max_drop, step_cap):
    """One ladder search started at a fresh extremum.

    Tracks ``y = sign * S`` and stops at the first step with ``y <= 0``
    (``weak``) or ``y < 0``; returns ``(height, censored)`` with
    ``height = -y`` at the stop.  ``sign=+1, weak`` is the weak descending
    ladder, ``sign=-1, strict`` the strict ascending one.

    For lattice laws with bounded steps (``skip``) stretches that provably
    cannot reach the level are jumped over in one multinomial draw; this is
    exact in law and makes huge ``step_cap`` values affordable.
    """
    y = 0.0
    steps = 0
    while True:
        if skip and y > 0:
            room = y - 1.0 if weak else y
            jump = int(room // max_drop)
            if jump >= 1:
                if steps + jump >= step_cap:
                    return 0.0, True
                y += sign * _lattice_jump(rng, offs, probs, jump)
                steps += jump
                continue
        y += sign * draw(rng, code, par, offs, cum)
        steps += 1
        if (weak and y <= 0.0) or ((not weak) and y < 0.0):
            return 0.0 - y, False
        if steps >= step_cap:
            return 0.0, True


@_jit
def renewal_block(rng, code, par, offs, cum, probs, sign, weak, skip, max_drop, step_cap,
                  grid, n_chains, sums, sumsq):
    """Accumulate per-grid-point renewal counts over ``n_chains`` chains.

    For each chain the count at ``grid[j]`` is ``#{k >= 0 : H_k <= grid[j]}``
    with ``H_k`` the cumulative ladder heights.  Censored chains contribute
    nothing; their number is returned.
    """
    m = grid.shape[0]
    x_max = grid[m - 1]
    local = np.zeros(m)
    censored = 0
    for _ in range(n_chains):
        local[:] = 0.0
        total = 0.0
        bad = False
        while total <= x_max:
            # first grid index with grid >= total
            local[np.searchsorted(grid, total)] += 1.0
            h, cens = ladder_search(rng, code, par, offs, cum, probs, sign, weak, skip,
                                    max_drop, step_cap)
            if cens:
                bad = True
                break
            total += h
        if bad:
            censored += 1
            continue
        c = 0.0
        for j in range(m):
            c += local[j]
            sums[j] += c
            sumsq[j] += c * c
    return censored


@_jit
def side_counts_block(rng, code, par, offs, cum, g, strict, n_paths, above_g, above_0, differ):
    """Per-step counts of free walks on the surviving side of ``g`` and of 0.

    ``differ[k]`` counts walks where the two indicators disagree at step k.
    """
    horizon = g.shape[0] - 1
    for _ in range(n_paths):
        s = 0.0
        for k in range(1, horizon + 1):
            s += draw(rng, code, par, offs, cum)
            if strict:
                a = s >= g[k]
                b = s >= 0.0
            else:
                a = s > g[k]
                b = s > 0.0
            if a:
                above_g[k] += 1
            if b:
                above_0[k] += 1
            if a != b:
                differ[k] += 1
