"""Array kernels behind the census.

Each kernel is plain Python over numpy arrays.  When numba is importable and
``SMLAB_NO_JIT`` is unset (or "0"), they are compiled with ``numba.njit``;
otherwise they run as-is, which is slow but dependency-light and handy for
debugging.  Profiles arrive as int64 arrays of shape (2, n, n) (men's rows,
then women's rows, 0-based) or batches of shape (B, 2, n, n).

These kernels are a second implementation of the object-level API in
``da``, ``stability`` and ``conditions``; the test-suite holds the two in
agreement.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_JIT = numba is not None and os.environ.get("SMLAB_NO_JIT", "0") in ("", "0")


def _jit(fn):
    if USE_JIT:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn


# column layout of classify_batch's integer output
COL_M_PROPS, COL_M_ROUNDS, COL_W_PROPS, COL_W_ROUNDS, COL_STABLE = range(5)
N_INT_COLS = 5

# column layout of classify_batch's boolean output
FLAG_NAMES = (
    "usm",
    "spc",
    "ncc",
    "m_maxprop",
    "w_maxprop",
    "m_maxrou",
    "w_maxrou",
    "single_proposal",
    "rounds_nonincreasing",
    "da_stable",
    "opposition",
    "trace_m",
    "trace_w",
    "struct_m",
    "struct_w",
    "men_share_top",
    "women_share_top",
)
FLAG = {name: i for i, name in enumerate(FLAG_NAMES)}
N_FLAGS = len(FLAG_NAMES)


@_jit
def rank_table(pref):
    n = pref.shape[0]
    rank = np.empty((n, n), dtype=np.int64)
    for a in range(n):
        for k in range(n):
            rank[a, pref[a, k]] = k
    return rank


@_jit
def deferred_acceptance(prop, recv_rank, round_sizes):
    """Proposer-optimal matching by batched-round DA.

    Returns (partner, proposals, rounds, received); ``partner[p]`` is the
    receiver matched to proposer p and ``round_sizes[:rounds]`` is filled
    with the number of proposals made in each round.
    """
    n = prop.shape[0]
    next_choice = np.zeros(n, dtype=np.int64)
    holder = np.full(n, -1, dtype=np.int64)
    partner = np.full(n, -1, dtype=np.int64)
    received = np.zeros(n, dtype=np.int64)
    free = np.arange(n)
    rejected = np.empty(n, dtype=np.int64)
    nfree = n
    rounds = 0
    proposals = 0
    while nfree > 0:
        nrej = 0
        for t in range(nfree):
            p = free[t]
            r = prop[p, next_choice[p]]
            next_choice[p] += 1
            received[r] += 1
            proposals += 1
            cur = holder[r]
            if cur < 0:
                holder[r] = p
                partner[p] = r
            elif recv_rank[r, p] < recv_rank[r, cur]:
                holder[r] = p
                partner[p] = r
                partner[cur] = -1
                rejected[nrej] = cur
                nrej += 1
            else:
                rejected[nrej] = p
                nrej += 1
        round_sizes[rounds] = nfree
        rounds += 1
        free[:nrej] = np.sort(rejected[:nrej])
        nfree = nrej
    return partner, proposals, rounds, received


@_jit
def has_blocking_pair(m2w, mrank, wrank):
    n = m2w.shape[0]
    w2m = np.empty(n, dtype=np.int64)
    for m in range(n):
        w2m[m2w[m]] = m
    for m in range(n):
        cur = m2w[m]
        for w in range(n):
            if mrank[m, w] < mrank[m, cur] and wrank[w, m] < wrank[w, w2m[w]]:
                return True
    return False


@_jit
def count_stable(mrank, wrank, perms, cap):
    """Number of stable matchings among ``perms`` (rows are man->woman maps), stopping at ``cap``."""
    found = 0
    for i in range(perms.shape[0]):
        if not has_blocking_pair(perms[i], mrank, wrank):
            found += 1
            if found >= cap:
                break
    return found


@_jit
def max_prop_code(prop, recv):
    """0 when the proposing side attains the proposal maximum, else the failed condition (1, 2 or 3)."""
    n = prop.shape[0]
    if n == 1:
        return 0
    sink = prop[0, n - 1]
    for p in range(1, n):
        if prop[p, n - 1] != sink:
            return 1
    paired = np.full(n, -1, dtype=np.int64)  # proposer -> receiver
    for r in range(n):
        if r == sink:
            continue
        p = recv[r, 0]
        if prop[p, n - 2] != r:
            return 2
        paired[p] = r
    # receiver r points at receiver paired[s(r)]; walk each chain looking for a cycle
    state = np.zeros(n, dtype=np.int64)
    for start in range(n):
        if start == sink or state[start] != 0:
            continue
        v = start
        while True:
            state[v] = 1
            nxt = paired[recv[v, 1]]
            if nxt < 0:
                break
            if state[nxt] == 1:
                return 3
            if state[nxt] == 2:
                break
            v = nxt
        v = start
        while v >= 0 and state[v] == 1:
            state[v] = 2
            v = paired[recv[v, 1]]
    return 0


@_jit
def max_rou_code(prop, recv):
    code = max_prop_code(prop, recv)
    n = prop.shape[0]
    if code != 0 or n == 1:
        return code
    sink = prop[0, n - 1]
    covered = np.zeros(n, dtype=np.bool_)
    for p in range(n):
        covered[prop[p, 0]] = True
    for r in range(n):
        if r != sink and not covered[r]:
            return 4
    return 0


@_jit
def spc_holds(men, women, mrank, wrank):
    n = men.shape[0]
    man_in = np.ones(n, dtype=np.bool_)
    woman_in = np.ones(n, dtype=np.bool_)
    for _ in range(n):
        found = False
        for m in range(n):
            if not man_in[m]:
                continue
            w = -1
            for k in range(n):
                if woman_in[men[m, k]]:
                    w = men[m, k]
                    break
            top = -1
            for k in range(n):
                if man_in[women[w, k]]:
                    top = women[w, k]
                    break
            if top == m:
                man_in[m] = False
                woman_in[w] = False
                found = True
                break
        if not found:
            return False
    return True


@_jit
def ncc_holds(mrank, wrank, perms):
    n = mrank.shape[0]
    allowed = np.empty((n, n), dtype=np.bool_)
    remaining = np.empty(n, dtype=np.bool_)
    for s in range(perms.shape[0]):
        order = perms[s]
        for k in range(n):
            for l in range(n):
                ok = True
                if k != l:
                    for i in range(n):
                        a = order[i]
                        for j in range(i + 1, n):
                            b = order[j]
                            if mrank[a, l] < mrank[a, k] and mrank[b, l] > mrank[b, k]:
                                ok = False
                            elif wrank[k, b] < wrank[k, a] and wrank[l, b] > wrank[l, a]:
                                ok = False
                            if not ok:
                                break
                        if not ok:
                            break
                allowed[k, l] = ok
        remaining[:] = True
        success = True
        for _ in range(n):
            pick = -1
            for x in range(n):
                if not remaining[x]:
                    continue
                good = True
                for z in range(n):
                    if remaining[z] and not allowed[x, z]:
                        good = False
                        break
                if good:
                    pick = x
                    break
            if pick < 0:
                success = False
                break
            remaining[pick] = False
        if success:
            return True
    return False


@_jit
def _trace_flags(n, props, rounds, received, partner, recv, round_sizes):
    # (some receiver got one proposal, round sizes non-increasing, maximal-run structure)
    one = False
    for r in range(n):
        if received[r] == 1:
            one = True
    nonincreasing = True
    for t in range(1, rounds):
        if round_sizes[t] > round_sizes[t - 1]:
            nonincreasing = False
    # every receiver but one got n proposals and holds her favourite
    shaped = True
    singles = 0
    for r in range(n):
        if received[r] == 1:
            singles += 1
        elif received[r] != n:
            shaped = False
    if singles != 1 and n > 1:
        shaped = False
    holder = np.empty(n, dtype=np.int64)
    for p in range(n):
        holder[partner[p]] = p
    for r in range(n):
        if received[r] != 1 and holder[r] != recv[r, 0]:
            shaped = False
    return one, nonincreasing, shaped


@_jit
def _structure_flag(prop, recv):
    # common last receiver, and each other receiver's favourite ranks her penultimate
    n = prop.shape[0]
    if n == 1:
        return True
    sink = prop[0, n - 1]
    for p in range(n):
        if prop[p, n - 1] != sink:
            return False
    for r in range(n):
        if r != sink and prop[recv[r, 0], n - 2] != r:
            return False
    return True


@_jit
def classify_batch(profiles, perms, do_ncc, do_stable):
    """Classify a batch of profiles; returns (ints, flags) per the column layouts above."""
    B = profiles.shape[0]
    n = profiles.shape[2]
    ints = np.zeros((B, N_INT_COLS), dtype=np.int64)
    flags = np.zeros((B, N_FLAGS), dtype=np.bool_)
    sizes_m = np.zeros(n * n + 1, dtype=np.int64)
    sizes_w = np.zeros(n * n + 1, dtype=np.int64)
    for b in range(B):
        men = profiles[b, 0]
        women = profiles[b, 1]
        mrank = rank_table(men)
        wrank = rank_table(women)
        pm, props_m, rounds_m, recv_m = deferred_acceptance(men, wrank, sizes_m)
        pw, props_w, rounds_w, recv_w = deferred_acceptance(women, mrank, sizes_w)
        ints[b, 0] = props_m
        ints[b, 1] = rounds_m
        ints[b, 2] = props_w
        ints[b, 3] = rounds_w
        # women-optimal matching as man -> woman
        m2w_w = np.empty(n, dtype=np.int64)
        for w in range(n):
            m2w_w[pw[w]] = w
        usm = True
        for m in range(n):
            if pm[m] != m2w_w[m]:
                usm = False
        flags[b, 0] = usm
        flags[b, 1] = spc_holds(men, women, mrank, wrank)
        if do_ncc:
            flags[b, 2] = ncc_holds(mrank, wrank, perms)
        flags[b, 3] = max_prop_code(men, women) == 0
        flags[b, 4] = max_prop_code(women, men) == 0
        flags[b, 5] = max_rou_code(men, women) == 0
        flags[b, 6] = max_rou_code(women, men) == 0

        one_m, inc_m, lem_m = _trace_flags(n, props_m, rounds_m, recv_m, pm, women, sizes_m)
        one_w, inc_w, lem_w = _trace_flags(n, props_w, rounds_w, recv_w, pw, men, sizes_w)
        flags[b, 7] = one_m and one_w
        flags[b, 8] = inc_m and inc_w
        flags[b, 9] = not has_blocking_pair(pm, mrank, wrank) and not has_blocking_pair(m2w_w, mrank, wrank)
        # men weakly prefer the men-optimal matching, women the women-optimal one
        opp = True
        for m in range(n):
            if mrank[m, pm[m]] > mrank[m, m2w_w[m]]:
                opp = False
        w2m_m = np.empty(n, dtype=np.int64)
        for m in range(n):
            w2m_m[pm[m]] = m
        for w in range(n):
            if wrank[w, pw[w]] > wrank[w, w2m_m[w]]:
                opp = False
        flags[b, 10] = opp
        flags[b, 11] = lem_m
        flags[b, 12] = lem_w
        flags[b, 13] = _structure_flag(men, women)
        flags[b, 14] = _structure_flag(women, men)
        share_m = True
        share_w = True
        for i in range(1, n):
            if men[i, 0] != men[0, 0]:
                share_m = False
            if women[i, 0] != women[0, 0]:
                share_w = False
        flags[b, 15] = share_m
        flags[b, 16] = share_w
        ints[b, 4] = count_stable(mrank, wrank, perms, 2) if do_stable else -1
    return ints, flags
