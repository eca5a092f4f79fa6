"""Compiled inner loops (numba, GIL released).

Fixed parameters: 32-bit states, L = 2**16, 16-bit words. All symbol
indices and group ids are 1-based, matching the metadata format.
"""

import numba as nb
import numpy as np

L_BITS = 16
WORD_BITS = 16
L = 1 << L_BITS
WORD_MASK = (1 << WORD_BITS) - 1

OK = 0
ERR_UNDERFLOW = 1
ERR_SYNC = 2

NO_EVENT = np.iinfo(np.int64).min


@nb.njit(nogil=True, cache=True)
def encode_interleaved(symbols, lanes, freqs, cdf, n, words, ev_lane, ev_index, ev_state, with_log):
    """W-way interleaved encode into preallocated ``words``.

    Returns ``(n_words, final_states, bad)`` where ``bad`` is the 1-based
    index of the first zero-frequency symbol (0 if none).
    """
    count = symbols.shape[0]
    states = np.full(lanes, L, dtype=np.uint64)
    shift = np.uint64(L_BITS + WORD_BITS - n)
    nn = np.uint64(n)
    wb = np.uint64(WORD_BITS)
    wmask = np.uint64(WORD_MASK)
    p = 0
    base = 0
    while base < count:
        top = min(base + lanes, count)
        for i in range(base, top):
            j = i - base
            s = symbols[i]
            f = np.uint64(freqs[s])
            if f == 0:
                return p, states, i + 1
            x = states[j]
            if x >= (f << shift):
                words[p] = x & wmask
                x >>= wb
                if with_log:
                    ev_lane[p] = j + 1
                    ev_index[p] = i + 1 - lanes
                    ev_state[p] = x
                p += 1
            states[j] = ((x // f) << nn) + np.uint64(cdf[s]) + (x % f)
        base = top
    return p, states, 0


@nb.njit(nogil=True, cache=True)
def decode_range(words, cursor, init_states, init_groups, top_group, lo, hi, count,
                 lanes, freqs, cdf, lookup, n, out, trailing_refill):
    """Decode groups ``top_group`` down to the group holding ``lo``.

    Lane ``j`` joins with ``init_states[j]`` in the refill pass of group
    ``init_groups[j]``; it reads only once it has joined. Symbols with index
    in ``[lo, hi]`` are written to ``out[index - 1]``, everything else is
    dropped. Returns ``(status, cursor, states)``.
    """
    states = np.zeros(lanes, dtype=np.uint64)
    active = np.zeros(lanes, dtype=np.bool_)
    mask = np.uint64((1 << n) - 1)
    nn = np.uint64(n)
    wb = np.uint64(WORD_BITS)
    bottom = (lo - 1) // lanes + 1 if lo >= 1 else 1
    # joined lanes kept in ascending order, so the join phase touches only live lanes
    live = np.empty(lanes, dtype=np.int64)
    joined = 0
    order = np.argsort(-init_groups, kind="mergesort")
    nxt = 0
    while nxt < lanes and init_groups[order[nxt]] > top_group:
        nxt += 1
    g = top_group
    while g >= bottom and joined < lanes:
        while nxt < lanes and init_groups[order[nxt]] == g:
            j = order[nxt]
            nxt += 1
            active[j] = True
            states[j] = init_states[j]
            k = joined
            while k > 0 and live[k - 1] > j:
                live[k] = live[k - 1]
                k -= 1
            live[k] = j
            joined += 1
        for k in range(joined - 1, -1, -1):
            j = live[k]
            x = states[j]
            if x < L:
                if cursor == 0:
                    return ERR_UNDERFLOW, cursor, states
                cursor -= 1
                states[j] = (x << wb) | np.uint64(words[cursor])
        base = (g - 1) * lanes
        if (base + 1 > hi or base + lanes < lo) and base + lanes <= count:
            # synchronization only: nothing in this group is kept
            for k in range(joined):
                j = live[k]
                x = states[j]
                slot = x & mask
                s = lookup[slot]
                states[j] = np.uint64(freqs[s]) * (x >> nn) + slot - np.uint64(cdf[s])
        else:
            for j in range(lanes):
                idx = base + j + 1
                if idx > count:
                    break
                keep = lo <= idx <= hi
                if not active[j]:
                    if keep:
                        return ERR_SYNC, cursor, states
                    continue
                x = states[j]
                slot = x & mask
                s = lookup[slot]
                states[j] = np.uint64(freqs[s]) * (x >> nn) + slot - np.uint64(cdf[s])
                if keep:
                    out[idx - 1] = s
        g -= 1
    # all lanes live
    while g >= bottom:
        for j in range(lanes - 1, -1, -1):
            x = states[j]
            if x < L:
                if cursor == 0:
                    return ERR_UNDERFLOW, cursor, states
                cursor -= 1
                states[j] = (x << wb) | np.uint64(words[cursor])
        base = (g - 1) * lanes
        if base + 1 >= lo and base + lanes <= hi and base + lanes <= count:
            for j in range(lanes):
                x = states[j]
                slot = x & mask
                s = lookup[slot]
                states[j] = np.uint64(freqs[s]) * (x >> nn) + slot - np.uint64(cdf[s])
                out[base + j] = s
        else:
            for j in range(lanes):
                idx = base + j + 1
                if idx > count:
                    break
                x = states[j]
                slot = x & mask
                s = lookup[slot]
                states[j] = np.uint64(freqs[s]) * (x >> nn) + slot - np.uint64(cdf[s])
                if lo <= idx <= hi:
                    out[idx - 1] = s
        g -= 1
    if trailing_refill:
        for j in range(lanes - 1, -1, -1):
            x = states[j]
            if active[j] and x < L:
                if cursor == 0:
                    return ERR_UNDERFLOW, cursor, states
                cursor -= 1
                states[j] = (x << wb) | np.uint64(words[cursor])
    return OK, cursor, states


@nb.njit(nogil=True, cache=True)
def sync_starts(ev_lane, ev_index, lanes):
    """For every event, the smallest per-lane last-event index at or before it.

    ``NO_EVENT`` marks events where some lane has not emitted yet.
    """
    n_events = ev_lane.shape[0]
    out = np.empty(n_events, dtype=np.int64)
    last = np.full(lanes, NO_EVENT, dtype=np.int64)
    seen = 0
    for e in range(n_events):
        j = ev_lane[e] - 1
        if last[j] == NO_EVENT:
            seen += 1
        last[j] = ev_index[e]
        if seen < lanes:
            out[e] = NO_EVENT
        else:
            m = last[0]
            for k in range(1, lanes):
                if last[k] < m:
                    m = last[k]
            out[e] = m
    return out


@nb.njit(nogil=True, cache=True)
def decode_batch(words, word_bounds, cursors, init_states, init_groups, top_groups, los, his,
                 out_bounds, counts, lanes, freqs, cdf, lookup, n, out, first, last):
    """Run ``decode_range`` for tasks ``first .. last - 1`` in one call.

    Task ``t`` sees ``words[word_bounds[t, 0]:word_bounds[t, 1]]`` and writes
    into ``out[out_bounds[t, 0]:out_bounds[t, 1]]``. Returns the first failing
    ``(status, task)``, or ``(OK, -1)``.
    """
    for t in range(first, last):
        if his[t] < los[t]:
            continue
        status, _, _ = decode_range(
            words[word_bounds[t, 0]:word_bounds[t, 1]], cursors[t], init_states[t], init_groups[t],
            top_groups[t], los[t], his[t], counts[t], lanes, freqs, cdf, lookup, n,
            out[out_bounds[t, 0]:out_bounds[t, 1]], False)
        if status != OK:
            return status, t
    return OK, -1
