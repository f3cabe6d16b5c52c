"""Annealed single-point-move search kernel.

The state lives in flat arrays so the whole Metropolis loop can run under
numba.  Components are indexed 0/1 (solo sets use only 0):

  kind 0  fractal: point = composed maps of a depth-m word applied to the
          anchor; moves resample one symbol, or redraw the whole word with
          the escape probability.
  kind 1  segment (continuous): moves are gradient steps on the parameter
          with projection to [0, 1] and a backtracking line search.
  kind 2  segment restricted to an n-node grid: moves step to a neighbor
          node, or jump to a uniform node with the escape probability.

On a union, a cross move relocates one point to the other component with a
uniformly drawn word/parameter.  Acceptance is Metropolis on the ordered-pair
energy; per-point energies are maintained incrementally and recomputed at
every temperature level to control drift.  The kernel is deterministic for a
fixed seed.
"""

import numpy as np
from numba import njit

ESCAPE_PROB = 0.1
CROSS_PROB = 0.15
BACKTRACK_MAX = 24


@njit(cache=True)
def _realize_word(c, word, mlen, lin, off, anchors, out, tmp):
    p = out.shape[0]
    for q in range(p):
        out[q] = anchors[c, q]
    for k in range(mlen - 1, -1, -1):
        sym = word[k]
        for r in range(p):
            acc = off[c, sym, r]
            for q in range(p):
                acc += lin[c, sym, r, q] * out[q]
            tmp[r] = acc
        for r in range(p):
            out[r] = tmp[r]


@njit(cache=True, inline="always")
def _inv_pow(d2, s, si):
    """d2 ** (-s/2); si = int(s) for small integral s selects a pow-free path."""
    if si == 1:
        return 1.0 / np.sqrt(d2)
    if si == 2:
        return 1.0 / d2
    if si == 3:
        return 1.0 / (d2 * np.sqrt(d2))
    if si == 4:
        inv = 1.0 / d2
        return inv * inv
    if si == 5:
        inv = 1.0 / d2
        return inv * inv / np.sqrt(d2)
    if si == 6:
        inv = 1.0 / d2
        return inv * inv * inv
    return d2 ** (-0.5 * s)


@njit(cache=True, inline="always")
def _int_exponent(s):
    si = int(s)
    if si == s and 1 <= si <= 6:
        return si
    return 0


@njit(cache=True)
def _point_energy_at(coords, j, x, s, si, coll2):
    """U_j if point j sat at x; ok=False when x collides with another point."""
    n, p = coords.shape
    u = 0.0
    for i in range(n):
        if i == j:
            continue
        d2 = 0.0
        for q in range(p):
            dq = coords[i, q] - x[q]
            d2 += dq * dq
        if d2 < coll2:
            return 0.0, False
        u += _inv_pow(d2, s, si)
    return u, True


@njit(cache=True)
def _recompute(coords, s, si, U):
    n, p = coords.shape
    total = 0.0
    for j in range(n):
        u = 0.0
        for i in range(n):
            if i == j:
                continue
            d2 = 0.0
            for q in range(p):
                dq = coords[i, q] - coords[j, q]
                d2 += dq * dq
            u += _inv_pow(d2, s, si)
        U[j] = u
        total += u
    return total


@njit(cache=True)
def anneal(
    coords, host, addr, tpar,
    comp_kind, KK, mm, lin, off, anchors, seg_a, seg_d, grid_n,
    s, t0, cooling, steps_per_level, levels,
    cross_allowed, coll_tol, seed,
):
    np.random.seed(seed)
    n, p = coords.shape
    m_max = addr.shape[1]
    coll2 = coll_tol * coll_tol

    si = _int_exponent(s)
    si_grad = _int_exponent(s + 2.0)

    U = np.zeros(n)
    E = _recompute(coords, s, si, U)
    evals = n

    best_E = E
    best_coords = coords.copy()
    best_host = host.copy()
    best_addr = addr.copy()
    best_tpar = tpar.copy()

    xnew = np.zeros(p)
    tmp = np.zeros(p)
    wnew = np.zeros(m_max, dtype=np.int64)
    # Last successful gradient step per point; the next attempt starts at
    # twice this (capped at a quarter of the mean spacing), so backtracking
    # depth stays ~1 once the search settles.
    step0 = 0.25 / n
    step_mem = np.full(n, step0)

    T = t0 if t0 > 0.0 else 0.1 * E / n
    for _level in range(levels):
        for _step in range(steps_per_level):
            j = np.random.randint(0, n)
            c = host[j]
            cross = cross_allowed and np.random.random() < CROSS_PROB
            tc = 1 - c if cross else c
            kind = comp_kind[tc]
            tnew = 0.0
            is_gradient = False

            if kind == 0:
                if cross or np.random.random() < ESCAPE_PROB:
                    for k in range(mm[tc]):
                        wnew[k] = np.random.randint(0, KK[tc])
                else:
                    for k in range(mm[tc]):
                        wnew[k] = addr[j, k]
                    pos = np.random.randint(0, mm[tc])
                    wnew[pos] = np.random.randint(0, KK[tc])
                _realize_word(tc, wnew, mm[tc], lin, off, anchors, xnew, tmp)
            elif kind == 1:
                if cross:
                    tnew = np.random.random()
                    for q in range(p):
                        xnew[q] = seg_a[tc, q] + tnew * seg_d[tc, q]
                else:
                    is_gradient = True
            else:  # kind == 2, grid segment
                ng = grid_n[tc]
                if cross or np.random.random() < ESCAPE_PROB:
                    node = np.random.randint(0, ng)
                else:
                    node = int(tpar[j] * (ng - 1) + 0.5)
                    node = node - 1 if np.random.random() < 0.5 else node + 1
                    if node < 0 or node >= ng:
                        continue
                tnew = node / (ng - 1.0)
                for q in range(p):
                    xnew[q] = seg_a[tc, q] + tnew * seg_d[tc, q]

            if is_gradient:
                # dE/dt at the current parameter, ordered-pair convention.
                g = 0.0
                for i in range(n):
                    if i == j:
                        continue
                    d2 = 0.0
                    dotv = 0.0
                    for q in range(p):
                        dq = coords[j, q] - coords[i, q]
                        d2 += dq * dq
                        dotv += dq * seg_d[tc, q]
                    g += dotv * _inv_pow(d2, s + 2.0, si_grad)
                g *= -2.0 * s
                evals += 1
                if g == 0.0:
                    continue
                downhill = -1.0 if g > 0.0 else 1.0
                delta = 2.0 * step_mem[j]
                if delta > step0:
                    delta = step0
                ok_move = False
                unew = 0.0
                for _bt in range(BACKTRACK_MAX):
                    tnew = tpar[j] + downhill * delta
                    if tnew < 0.0:
                        tnew = 0.0
                    elif tnew > 1.0:
                        tnew = 1.0
                    delta *= 0.5
                    if delta < 1e-18:
                        break
                    if tnew == tpar[j]:
                        continue
                    for q in range(p):
                        xnew[q] = seg_a[tc, q] + tnew * seg_d[tc, q]
                    u, ok = _point_energy_at(coords, j, xnew, s, si, coll2)
                    evals += 1
                    if ok and u < U[j]:
                        unew = u
                        step_mem[j] = abs(tnew - tpar[j])
                        ok_move = True
                        break
                if not ok_move:
                    continue
            else:
                unew, ok = _point_energy_at(coords, j, xnew, s, si, coll2)
                evals += 1
                if not ok:
                    continue
                dE = 2.0 * (unew - U[j])
                if dE > 0.0 and np.random.random() >= np.exp(-dE / T):
                    continue

            # Accept: update the incremental per-point energies.
            for i in range(n):
                if i == j:
                    continue
                d2o = 0.0
                d2n = 0.0
                for q in range(p):
                    dqo = coords[i, q] - coords[j, q]
                    dqn = coords[i, q] - xnew[q]
                    d2o += dqo * dqo
                    d2n += dqn * dqn
                U[i] += _inv_pow(d2n, s, si) - _inv_pow(d2o, s, si)
            E += 2.0 * (unew - U[j])
            U[j] = unew
            for q in range(p):
                coords[j, q] = xnew[q]
            host[j] = tc
            if kind == 0:
                for k in range(m_max):
                    addr[j, k] = wnew[k] if k < mm[tc] else 0
            else:
                tpar[j] = tnew
                if cross:
                    step_mem[j] = step0

            if E < best_E:
                best_E = E
                best_coords[:, :] = coords
                best_host[:] = host
                best_addr[:, :] = addr
                best_tpar[:] = tpar

        E = _recompute(coords, s, si, U)
        evals += n
        if E < best_E:
            best_E = E
            best_coords[:, :] = coords
            best_host[:] = host
            best_addr[:, :] = addr
            best_tpar[:] = tpar
        T *= cooling

    return best_coords, best_host, best_addr, best_tpar, best_E, evals
