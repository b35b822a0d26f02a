"""Compiled event loops for the F-ASEP / ASEP engines.

The kernels never touch a random generator themselves: they consume a caller
supplied buffer of uniforms and hand control back when it runs low, so the
draw sequence (and hence every trajectory) is fixed by the seed of the
caller's PCG64 stream alone.

Enabled moves are kept in two index-addressable lists (right and left) that
are patched locally after each exchange; a jump of bond ``i`` only changes the
enabled status of bonds ``i-2 .. i+2``.
"""

import numpy as np
from numba import njit

FASEP = 0
ASEP = 1

SITE = 0
PARTICLE = 1

# kernel exit codes
REACHED_T = 0
ABSORBED = 1
MAX_EVENTS = 2
NEED_RNG = 3

# integer state slots
I_NR, I_NL, I_EVENTS, I_J, I_VIOL, I_UPOS, I_ATTEMPTS = range(7)


@njit(cache=True)
def _site(eta, L, ring, j):
    if ring:
        return eta[j % L]
    if j < 0 or j >= L:
        return 0
    return eta[j]


@njit(cache=True)
def _bond_ok(L, ring, i):
    if ring:
        return True
    return 0 <= i and i + 1 <= L - 1


@njit(cache=True)
def right_enabled(eta, L, ring, model, i):
    """Particle at ``i`` may hop to ``i+1`` (rate p)."""
    if not _bond_ok(L, ring, i):
        return False
    if _site(eta, L, ring, i) != 1 or _site(eta, L, ring, i + 1) != 0:
        return False
    if model == ASEP:
        return True
    return _site(eta, L, ring, i - 1) == 1


@njit(cache=True)
def left_enabled(eta, L, ring, model, i):
    """Particle at ``i+1`` may hop to ``i`` (rate 1-p)."""
    if not _bond_ok(L, ring, i):
        return False
    if _site(eta, L, ring, i) != 0 or _site(eta, L, ring, i + 1) != 1:
        return False
    if model == ASEP:
        return True
    return _site(eta, L, ring, i + 2) == 1


@njit(cache=True)
def _set(lst, pos, ist, slot, i, on):
    k = pos[i]
    if on and k < 0:
        n = ist[slot]
        lst[n] = i
        pos[i] = n
        ist[slot] = n + 1
    elif not on and k >= 0:
        n = ist[slot] - 1
        last = lst[n]
        lst[k] = last
        pos[last] = k
        pos[i] = -1
        ist[slot] = n


@njit(cache=True)
def _refresh(eta, L, ring, model, rlist, rpos, llist, lpos, ist, i):
    for d in range(-2, 3):
        j = i + d
        if ring:
            j %= L
        elif j < 0 or j >= L:
            continue
        _set(rlist, rpos, ist, I_NR, j, right_enabled(eta, L, ring, model, j))
        _set(llist, lpos, ist, I_NL, j, left_enabled(eta, L, ring, model, j))


@njit(cache=True)
def init_moves(eta, ring, model, rlist, rpos, llist, lpos, ist):
    L = eta.shape[0]
    ist[I_NR] = 0
    ist[I_NL] = 0
    for j in range(L):
        rpos[j] = -1
        lpos[j] = -1
    for j in range(L):
        _set(rlist, rpos, ist, I_NR, j, right_enabled(eta, L, ring, model, j))
        _set(llist, lpos, ist, I_NL, j, left_enabled(eta, L, ring, model, j))


@njit(cache=True)
def _dz(eta, L, ring, j):
    if not _bond_ok(L, ring, j):
        return False
    return _site(eta, L, ring, j) == 0 and _site(eta, L, ring, j + 1) == 0


@njit(cache=True)
def _exchange(eta, L, ring, model, rlist, rpos, llist, lpos, parts, part_of, ist, i, check):
    """Swap sites ``i`` and ``i+1`` (a 1 and a 0) and do the bookkeeping."""
    a = i % L if ring else i
    b = (i + 1) % L if ring else i + 1
    before0 = False
    before1 = False
    before2 = False
    if check:
        before0 = _dz(eta, L, ring, i - 1)
        before1 = _dz(eta, L, ring, i)
        before2 = _dz(eta, L, ring, i + 1)
        if eta[a] + eta[b] != 1:
            ist[I_VIOL] += 1
    moved_right = eta[a] == 1
    eta[a], eta[b] = eta[b], eta[a]
    if moved_right:
        k = part_of[a]
        parts[k] = b
        part_of[b] = k
        part_of[a] = -1
    else:
        k = part_of[b]
        parts[k] = a
        part_of[a] = k
        part_of[b] = -1
    if check:
        if _dz(eta, L, ring, i - 1) and not before0:
            ist[I_VIOL] += 1
        if _dz(eta, L, ring, i) and not before1:
            ist[I_VIOL] += 1
        if _dz(eta, L, ring, i + 1) and not before2:
            ist[I_VIOL] += 1
    if a == 0:
        ist[I_J] += 1 if moved_right else -1
    _refresh(eta, L, ring, model, rlist, rpos, llist, lpos, ist, a)
    ist[I_EVENTS] += 1


@njit(cache=True)
def run(eta, ring, model, scheme, p, rlist, rpos, llist, lpos, parts, part_of,
        ist, fst, u, t_stop, max_events, check):
    """Advance until ``t_stop``, absorption, ``max_events`` or buffer exhaustion.

    ``fst[0]`` holds the process time.  On ``REACHED_T`` the pending event
    (whose time overshot ``t_stop``) is discarded, which is harmless because
    waiting times are memoryless.
    """
    L = eta.shape[0]
    n_part = parts.shape[0]
    nu = u.shape[0]
    q = 1.0 - p
    while True:
        nR = ist[I_NR]
        nL = ist[I_NL]
        if nR + nL == 0:
            return ABSORBED
        if ist[I_EVENTS] >= max_events:
            return MAX_EVENTS
        k = ist[I_UPOS]
        if k + 3 > nu:
            return NEED_RNG
        if scheme == SITE:
            rate = p * nR + q * nL
            if rate <= 0.0:
                return ABSORBED
            dt = -np.log(1.0 - u[k]) / rate
            ist[I_UPOS] = k + 2
            if fst[0] + dt > t_stop:
                fst[0] = t_stop
                return REACHED_T
            fst[0] += dt
            x = u[k + 1] * rate
            if x < p * nR:
                idx = int(x / p)
                if idx >= nR:
                    idx = nR - 1
                i = rlist[idx]
            else:
                idx = int((x - p * nR) / q)
                if idx >= nL:
                    idx = nL - 1
                i = llist[idx]
            _exchange(eta, L, ring, model, rlist, rpos, llist, lpos, parts, part_of, ist, i, check)
        else:
            # one right clock (rate p) and one left clock (rate 1-p) per particle
            dt = -np.log(1.0 - u[k]) / n_part
            ist[I_UPOS] = k + 3
            if fst[0] + dt > t_stop:
                fst[0] = t_stop
                return REACHED_T
            fst[0] += dt
            ist[I_ATTEMPTS] += 1
            j = int(u[k + 1] * n_part)
            if j >= n_part:
                j = n_part - 1
            s = parts[j]
            right = u[k + 2] < p
            if model == FASEP:
                # the clock belongs to the left particle of a 11 pair, which
                # exchanges with the 10 pair on its right or the hole on its left
                if right:
                    j2 = (s + 1) % L if ring else s + 1
                    if right_enabled(eta, L, ring, model, j2):
                        _exchange(eta, L, ring, model, rlist, rpos, llist, lpos,
                                  parts, part_of, ist, j2, check)
                else:
                    j2 = (s - 1) % L if ring else s - 1
                    if left_enabled(eta, L, ring, model, j2):
                        _exchange(eta, L, ring, model, rlist, rpos, llist, lpos,
                                  parts, part_of, ist, j2, check)
            else:
                if right:
                    if right_enabled(eta, L, ring, model, s):
                        _exchange(eta, L, ring, model, rlist, rpos, llist, lpos,
                                  parts, part_of, ist, s, check)
                else:
                    j2 = (s - 1) % L if ring else s - 1
                    if left_enabled(eta, L, ring, model, j2):
                        _exchange(eta, L, ring, model, rlist, rpos, llist, lpos,
                                  parts, part_of, ist, j2, check)
