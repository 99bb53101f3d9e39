"""Compiled state machine that runs a whole dissection tree.

Every node owns a row of ``cfg`` (static layout) and ``st`` (run state); all
other buffers (item residues, join tables, quarter lists, heaps, tie buffers,
counters) live in one flat ``mem`` array at offsets recorded in ``cfg``.
Keeping the argument list short matters: each recursive call pays per array.

A call to ``node_next`` advances one node until it produces a solution mask
(EMIT), finishes (DONE) or, for the pausable root, uses up its budget of s'
iterations (PAUSE).  The emission order matches the generator-based reference
engine whenever every node works with exact residues.
"""

from __future__ import annotations

import numpy as np
from numba import njit

EMIT, DONE, PAUSE = 1, 0, 2

KIND_INTERNAL, KIND_SS, KIND_BF = 0, 1, 2

# cfg columns
C_LO, C_HI, C_N, C_LEFT, C_RIGHT, C_KIND, C_MOD, C_SUB, C_THR, C_DEPTH = range(10)
C_AOFF, C_TKEY, C_TMASK, C_SPLO, C_SPHI, C_WIN, C_SUBEND, C_PAUSE = range(10, 18)
C_Q1O, C_Q1L, C_Q2O, C_Q2L, C_Q3O, C_Q3L, C_Q4O, C_Q4L = range(18, 26)
C_QMASK, C_HK, C_HI, C_HP, C_HRSHIFT, C_GO, C_TOTAL, C_BO, C_BL, C_BMASK, C_STATIC = range(26, 37)
C_MINL, C_MAXL, C_MINR, C_MAXR = range(37, 41)
NCFG = 41

# st columns
S_TGT, S_TSUB, S_PH, S_SP, S_CNT, S_TCNT, S_JC, S_JE, S_J2C, S_J2E = range(10)
S_ZM, S_OUT, S_J, S_GOAL, S_LN, S_RN, S_GN, S_GP, S_RSUM, S_RM = range(10, 20)
S_MEMT, S_MEML, S_BUDGET = range(20, 23)
NST = 23

# counters at the start of mem
X_EMIT, X_BAIL, X_CURT, X_PEAKT, X_CURL, X_PEAKL, X_DEPTH = range(7)
# work counters: node activations, heap steps, emissions at any node
X_ACT, X_STEPS, X_EMITALL = range(7, 10)
NSTATS = 10

PH_IDLE, PH_LSTART, PH_LEFT, PH_RIGHT, PH_JOIN, PH_DONE = range(6)
PH_NEWJ, PH_SWEEP, PH_TIE, PH_BF = range(6, 10)


@njit(cache=True)
def _sift_down(mem, kb, ib, pb, size, pos):
    """Restore min-heap order on (key, idx) below ``pos``; key/idx/ptr rows start at kb/ib/pb."""
    key = mem[kb + pos]
    idx = mem[ib + pos]
    ptr = mem[pb + pos]
    while True:
        child = 2 * pos + 1
        if child >= size:
            break
        if child + 1 < size:
            k1 = mem[kb + child]
            k2 = mem[kb + child + 1]
            if k2 < k1 or (k2 == k1 and mem[ib + child + 1] < mem[ib + child]):
                child += 1
        ck = mem[kb + child]
        if ck < key or (ck == key and mem[ib + child] < idx):
            mem[kb + pos] = ck
            mem[ib + pos] = mem[ib + child]
            mem[pb + pos] = mem[pb + child]
            pos = child
        else:
            break
    mem[kb + pos] = key
    mem[ib + pos] = idx
    mem[pb + pos] = ptr


@njit(cache=True)
def _heapify(mem, kb, ib, pb, size):
    for pos in range(size // 2 - 1, -1, -1):
        _sift_down(mem, kb, ib, pb, size, pos)


@njit(cache=True)
def _drop_top(mem, kb, ib, pb, size):
    last = size - 1
    mem[kb] = mem[kb + last]
    mem[ib] = mem[ib + last]
    mem[pb] = mem[pb + last]
    _sift_down(mem, kb, ib, pb, size - 1, 0)
    return size - 1


@njit(cache=True)
def _grow(mem, cur_slot, peak_slot, delta):
    mem[cur_slot] += delta
    if mem[cur_slot] > mem[peak_slot]:
        mem[peak_slot] = mem[cur_slot]


@njit(cache=True)
def release_subtree(v, cfg, st, mem):
    for u in range(v, cfg[v, C_SUBEND]):
        mem[X_CURT] -= st[u, S_MEMT]
        st[u, S_MEMT] = 0
        st[u, S_TCNT] = 0
        mem[X_CURL] -= st[u, S_MEML]
        st[u, S_MEML] = 0
        if u != v:
            st[u, S_PH] = PH_IDLE


@njit(cache=True)
def activate(v, target, cfg, st, mem):
    release_subtree(v, cfg, st, mem)
    mem[X_ACT] += 1
    st[v, S_TGT] = target
    st[v, S_CNT] = 0
    if cfg[v, C_DEPTH] > mem[X_DEPTH]:
        mem[X_DEPTH] = cfg[v, C_DEPTH]
    kind = cfg[v, C_KIND]
    if kind == KIND_INTERNAL:
        st[v, S_TSUB] = target % cfg[v, C_SUB]
        st[v, S_SP] = cfg[v, C_SPLO]
        st[v, S_PH] = PH_LSTART
        if st[v, S_SP] >= cfg[v, C_SPHI]:
            st[v, S_PH] = PH_DONE
    elif kind == KIND_SS:
        st[v, S_J] = 0
        st[v, S_GN] = 0
        st[v, S_GP] = 0
        st[v, S_PH] = PH_NEWJ
        st[v, S_MEML] = cfg[v, C_STATIC]
        _grow(mem, X_CURL, X_PEAKL, cfg[v, C_STATIC])
    else:
        off = cfg[v, C_BO]
        length = cfg[v, C_BL]
        pos = np.searchsorted(mem[off:off + length], target)
        st[v, S_JC] = pos
        st[v, S_JE] = length
        st[v, S_PH] = PH_BF
        st[v, S_MEML] = length
        _grow(mem, X_CURL, X_PEAKL, length)


@njit(cache=True)
def _finish(v, cfg, st, mem):
    st[v, S_PH] = PH_DONE
    release_subtree(v, cfg, st, mem)


@njit(cache=True)
def _count_emission(v, cfg, st, mem):
    cnt = st[v, S_CNT] + 1
    st[v, S_CNT] = cnt
    mem[X_EMITALL] += 1
    if v == 0:
        mem[X_EMIT] += 1
    if cnt >= cfg[v, C_THR]:
        mem[X_BAIL] += 1
        _finish(v, cfg, st, mem)


@njit(cache=True)
def ss_next(v, cfg, st, mem):
    """Schroeppel-Shamir over the integer targets t + j*M; state is kept in locals between exits."""
    ph = st[v, S_PH]
    if ph == PH_DONE or ph == PH_IDLE:
        return DONE
    q1o = cfg[v, C_Q1O]
    q2o = cfg[v, C_Q2O]
    q3o = cfg[v, C_Q3O]
    q4o = cfg[v, C_Q4O]
    qm = cfg[v, C_QMASK]  # mask list = sum list + qm
    n2 = cfg[v, C_Q2L]
    lk = cfg[v, C_HK]
    li = cfg[v, C_HI]
    lp = cfg[v, C_HP]
    shift = cfg[v, C_HRSHIFT]
    rk = lk + shift
    ri = li + shift
    rp = lp + shift
    go = cfg[v, C_GO]
    ln = st[v, S_LN]
    rn = st[v, S_RN]
    goal = st[v, S_GOAL]
    gn = st[v, S_GN]
    gp = st[v, S_GP]
    rsum = st[v, S_RSUM]
    rm = st[v, S_RM]
    status = DONE
    while True:
        if ph == PH_TIE:
            if gp < gn:
                st[v, S_OUT] = mem[go + gp] | rm
                gp += 1
                status = EMIT
                break
            if rn > 0 and -mem[rk] == rsum:
                i = mem[ri]
                p = mem[rp]
                rm = mem[qm + q3o + i] | mem[qm + q4o + p]
                if p > 0:
                    mem[rk] = -(mem[q3o + i] + mem[q4o + p - 1])
                    mem[rp] = p - 1
                    _sift_down(mem, rk, ri, rp, rn, 0)
                else:
                    rn = _drop_top(mem, rk, ri, rp, rn)
                gp = 0
                continue
            st[v, S_MEML] -= gn
            mem[X_CURL] -= gn
            gn = 0
            gp = 0
            ph = PH_SWEEP
        elif ph == PH_SWEEP:
            min_right = cfg[v, C_MINR]
            max_left = cfg[v, C_MAXL]
            while ln > 0 and rn > 0:
                mem[X_STEPS] += 1
                if mem[lk] + min_right > goal or max_left - mem[rk] < goal:
                    ln = 0
                    break
                total = mem[lk] - mem[rk]
                if total < goal:
                    i = mem[li]
                    p = mem[lp] + 1
                    if p < n2:
                        mem[lk] = mem[q1o + i] + mem[q2o + p]
                        mem[lp] = p
                        _sift_down(mem, lk, li, lp, ln, 0)
                    else:
                        ln = _drop_top(mem, lk, li, lp, ln)
                elif total > goal:
                    i = mem[ri]
                    p = mem[rp] - 1
                    if p >= 0:
                        mem[rk] = -(mem[q3o + i] + mem[q4o + p])
                        mem[rp] = p
                        _sift_down(mem, rk, ri, rp, rn, 0)
                    else:
                        rn = _drop_top(mem, rk, ri, rp, rn)
                else:
                    break
            if ln == 0 or rn == 0:
                ph = PH_NEWJ
                continue
            lsum = mem[lk]
            rsum = -mem[rk]
            gn = 0
            while ln > 0 and mem[lk] == lsum:
                i = mem[li]
                p = mem[lp]
                mem[go + gn] = mem[qm + q1o + i] | mem[qm + q2o + p]
                gn += 1
                if p + 1 < n2:
                    mem[lk] = mem[q1o + i] + mem[q2o + p + 1]
                    mem[lp] = p + 1
                    _sift_down(mem, lk, li, lp, ln, 0)
                else:
                    ln = _drop_top(mem, lk, li, lp, ln)
            gp = gn
            st[v, S_MEML] += gn
            _grow(mem, X_CURL, X_PEAKL, gn)
            ph = PH_TIE
        elif ph == PH_NEWJ:
            j = st[v, S_J]
            goal = st[v, S_TGT] + j * cfg[v, C_MOD]
            if j >= cfg[v, C_N] or goal > cfg[v, C_TOTAL]:
                ph = PH_DONE
                break
            st[v, S_J] = j + 1
            n1 = cfg[v, C_Q1L]
            n2 = cfg[v, C_Q2L]
            s2 = mem[q2o:q2o + n2]
            floor = goal - cfg[v, C_MAXR]
            ln = 0
            for i in range(n1):
                s1 = mem[q1o + i]
                p = np.searchsorted(s2, floor - s1)
                if p < n2:
                    mem[lk + ln] = s1 + s2[p]
                    mem[li + ln] = i
                    mem[lp + ln] = p
                    ln += 1
            _heapify(mem, lk, li, lp, ln)
            n3 = cfg[v, C_Q3L]
            n4 = cfg[v, C_Q4L]
            s4 = mem[q4o:q4o + n4]
            ceiling = goal - cfg[v, C_MINL]
            rn = 0
            for i in range(n3):
                s3 = mem[q3o + i]
                p = np.searchsorted(s4, ceiling - s3, side="right") - 1
                if p >= 0:
                    mem[rk + rn] = -(s3 + s4[p])
                    mem[ri + rn] = i
                    mem[rp + rn] = p
                    rn += 1
            _heapify(mem, rk, ri, rp, rn)
            ph = PH_SWEEP
        else:
            break
    st[v, S_PH] = ph
    st[v, S_LN] = ln
    st[v, S_RN] = rn
    st[v, S_GOAL] = goal
    st[v, S_GN] = gn
    st[v, S_GP] = gp
    st[v, S_RSUM] = rsum
    st[v, S_RM] = rm
    if status == EMIT:
        _count_emission(v, cfg, st, mem)
    elif ph == PH_DONE:
        _finish(v, cfg, st, mem)
    return status


@njit(cache=True)
def bf_next(v, cfg, st, mem):
    if st[v, S_PH] != PH_BF:
        return DONE
    c = st[v, S_JC]
    off = cfg[v, C_BO]
    if c < st[v, S_JE] and mem[off + c] == st[v, S_TGT]:
        st[v, S_JC] = c + 1
        st[v, S_OUT] = mem[cfg[v, C_BMASK] + c]
        _count_emission(v, cfg, st, mem)
        return EMIT
    _finish(v, cfg, st, mem)
    return DONE


@njit(cache=True)
def _mask_key(mask, mem, aoff, q):
    key = 0
    i = 0
    while mask != 0:
        if mask & 1:
            key += mem[aoff + i]
            if key >= q:
                key -= q
        mask >>= 1
        i += 1
    return key


@njit(cache=True)
def _sort_table(kb, mb, cnt, mem):
    """Stable sort of the table rows by key."""
    if cnt <= 32:
        for r in range(1, cnt):
            key = mem[kb + r]
            mask = mem[mb + r]
            pos = r
            while pos > 0 and mem[kb + pos - 1] > key:
                mem[kb + pos] = mem[kb + pos - 1]
                mem[mb + pos] = mem[mb + pos - 1]
                pos -= 1
            mem[kb + pos] = key
            mem[mb + pos] = mask
        return
    keys = mem[kb:kb + cnt].copy()
    masks = mem[mb:mb + cnt].copy()
    order = np.argsort(keys, kind="mergesort")
    for r in range(cnt):
        mem[kb + r] = keys[order[r]]
        mem[mb + r] = masks[order[r]]


@njit(cache=True)
def internal_step(v, cfg, st, mem, r):
    """React to the child result ``r`` (or -1 to just make progress) without recursing.

    Returns EMIT/DONE/PAUSE when the node has something to report, or a child
    index offset by 16 to ask the caller to advance that child.
    """
    q = cfg[v, C_MOD]
    tk = cfg[v, C_TKEY]
    tm = cfg[v, C_TMASK]
    while True:
        ph = st[v, S_PH]
        if ph == PH_JOIN:
            c = st[v, S_JC]
            if c < st[v, S_JE]:
                st[v, S_JC] = c + 1
                st[v, S_OUT] = mem[tm + c] | st[v, S_ZM]
                _count_emission(v, cfg, st, mem)
                return EMIT
            if st[v, S_J2E] > st[v, S_J2C]:
                st[v, S_JC] = st[v, S_J2C]
                st[v, S_JE] = st[v, S_J2E]
                st[v, S_J2C] = 0
                st[v, S_J2E] = 0
                continue
            st[v, S_PH] = PH_RIGHT
        elif ph == PH_RIGHT:
            right = cfg[v, C_RIGHT]
            if r < 0:
                return 16 + right
            res = r
            r = -1
            if res == EMIT:
                z = st[right, S_OUT]
                h = _mask_key(z, mem, cfg[v, C_AOFF], q)
                hz = st[v, S_TGT] - h
                if hz < 0:
                    hz += q
                cnt = st[v, S_TCNT]
                keys = mem[tk:tk + cnt]
                width = cfg[v, C_WIN]
                st[v, S_JC] = np.searchsorted(keys, hz)
                st[v, S_J2C] = 0
                st[v, S_J2E] = 0
                if hz + width <= q:
                    st[v, S_JE] = np.searchsorted(keys, hz + width)
                else:
                    st[v, S_JE] = cnt
                    st[v, S_J2E] = np.searchsorted(keys, hz + width - q)
                st[v, S_ZM] = z
                st[v, S_PH] = PH_JOIN
            else:
                mem[X_CURT] -= st[v, S_MEMT]
                st[v, S_MEMT] = 0
                st[v, S_TCNT] = 0
                sp = st[v, S_SP] + 1
                st[v, S_SP] = sp
                if sp >= cfg[v, C_SPHI]:
                    _finish(v, cfg, st, mem)
                    return DONE
                st[v, S_PH] = PH_LSTART
                if cfg[v, C_PAUSE] == 1:
                    st[v, S_BUDGET] -= 1
                    if st[v, S_BUDGET] <= 0:
                        return PAUSE
        elif ph == PH_LSTART:
            activate(cfg[v, C_LEFT], st[v, S_SP], cfg, st, mem)
            st[v, S_TCNT] = 0
            st[v, S_PH] = PH_LEFT
        elif ph == PH_LEFT:
            left = cfg[v, C_LEFT]
            if r < 0:
                return 16 + left
            res = r
            r = -1
            if res == EMIT:
                y = st[left, S_OUT]
                cnt = st[v, S_TCNT]
                mem[tk + cnt] = _mask_key(y, mem, cfg[v, C_AOFF], q)
                mem[tm + cnt] = y
                st[v, S_TCNT] = cnt + 1
                st[v, S_MEMT] += 1
                _grow(mem, X_CURT, X_PEAKT, 1)
            else:
                _sort_table(tk, tm, st[v, S_TCNT], mem)
                rt = (st[v, S_TSUB] - st[v, S_SP]) % cfg[v, C_SUB]
                activate(cfg[v, C_RIGHT], rt, cfg, st, mem)
                st[v, S_PH] = PH_RIGHT
        else:
            return DONE


@njit(cache=True)
def run_root(budget, cfg, st, mem, stack):
    """Drive the tree with an explicit call stack until the root reports."""
    st[0, S_BUDGET] = budget
    depth = 0
    stack[0] = 0
    r = -1
    while True:
        v = stack[depth]
        kind = cfg[v, C_KIND]
        if kind == KIND_SS:
            res = ss_next(v, cfg, st, mem)
        elif kind == KIND_BF:
            res = bf_next(v, cfg, st, mem)
        else:
            res = internal_step(v, cfg, st, mem, r)
        if res >= 16:
            depth += 1
            stack[depth] = res - 16
            r = -1
            continue
        if depth == 0:
            return res
        depth -= 1
        r = res


@njit(cache=True)
def start_root(target, tsub, cfg, st, mem):
    activate(0, target, cfg, st, mem)
    if cfg[0, C_KIND] == KIND_INTERNAL:
        st[0, S_TSUB] = tsub
