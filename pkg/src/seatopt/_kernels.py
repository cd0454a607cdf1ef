"""Compiled inner loops for the annealers.

Everything here works on plain arrays; the public modules do the packing.
"""
import math

import numpy as np
from numba import njit


class PackedCfn:
    """Array form of a :class:`~seatopt.cfn.CfnProblem` for the kernels."""

    def __init__(self, problem):
        n = problem.node_count
        counts = problem.choice_counts
        dmax = max(counts, default=1)
        n_seats = 1 + max((int(c.max()) for c in problem.choices), default=0)
        self.n = n
        self.n_choices = np.array(counts, dtype=np.int64)
        self.seat = np.full((n, dmax), -1, dtype=np.int64)
        self.alpha = np.zeros((n, dmax))
        self.seat_choice = np.full((n, n_seats), -1, dtype=np.int64)
        for i in range(n):
            d = counts[i]
            self.seat[i, :d] = problem.choices[i]
            self.alpha[i, :d] = problem.one_node[i]
            self.seat_choice[i, problem.choices[i]] = np.arange(d)
        nbrs = [[] for _ in range(n)]
        for (i, j), block in problem.two_node.items():
            nbrs[i].append((j, block))
            nbrs[j].append((i, block.T))
        self.nbr_ptr = np.zeros(n + 1, dtype=np.int64)
        k_total = sum(len(x) for x in nbrs)
        self.nbr_node = np.zeros(k_total, dtype=np.int64)
        self.blocks = np.zeros((k_total, dmax, dmax))
        k = 0
        for i in range(n):
            for j, block in nbrs[i]:
                self.nbr_node[k] = j
                self.blocks[k, : block.shape[0], : block.shape[1]] = block
                k += 1
            self.nbr_ptr[i + 1] = k
        self.p_overlap = float(problem.overlap_penalty or 0.0)
        self.n_seats = n_seats

    def args(self):
        return (self.n_choices, self.seat, self.alpha, self.seat_choice,
                self.nbr_ptr, self.nbr_node, self.blocks, self.p_overlap)


@njit(cache=True)
def _node_delta(i, c_new, choice, occ, n_choices, seat, alpha, seat_choice,
                nbr_ptr, nbr_node, blocks, p_overlap):
    c_old = choice[i]
    d = alpha[i, c_new] - alpha[i, c_old]
    for k in range(nbr_ptr[i], nbr_ptr[i + 1]):
        cj = choice[nbr_node[k]]
        d += blocks[k, c_new, cj] - blocks[k, c_old, cj]
    if p_overlap != 0.0:
        s_new = seat[i, c_new]
        s_old = seat[i, c_old]
        d += p_overlap * (occ[s_new] - (occ[s_old] - 1))
    return d


@njit(cache=True)
def _set(i, c_new, choice, occ, seat):
    occ[seat[i, choice[i]]] -= 1
    choice[i] = c_new
    occ[seat[i, c_new]] += 1


@njit(cache=True)
def _full_score(choice, n_choices, seat, alpha, nbr_ptr, nbr_node, blocks, p_overlap, occ):
    n = choice.shape[0]
    s = 0.0
    for i in range(n):
        s += alpha[i, choice[i]]
        for k in range(nbr_ptr[i], nbr_ptr[i + 1]):
            j = nbr_node[k]
            if j > i:
                s += blocks[k, choice[i], choice[j]]
    if p_overlap != 0.0:
        for c in occ:
            s += p_overlap * c * (c - 1) / 2
    return s


@njit(cache=True)
def _hf_effective_delta(cur, delta, best, ceiling_h, kappa):
    if kappa == 1.0:
        return delta
    top = best + ceiling_h
    new = cur + delta
    e_new = new if new <= top else top + kappa * (new - top)
    e_cur = cur if cur <= top else top + kappa * (cur - top)
    return e_new - e_cur


@njit(cache=True)
def anneal_cfn(seed, init, steps, t_high, t_low, swap_frac, hf, ceiling_h, kappa,
               pool_k, record_trace,
               n_choices, seat, alpha, seat_choice, nbr_ptr, nbr_node, blocks, p_overlap):
    """Metropolis annealing over node choices.

    Returns (pool_states, pool_scores, pool_size, trace, state_trace); the
    traces hold the current score and choice vector after every step when
    ``record_trace`` is set and are empty otherwise.  The pool keeps the
    ``pool_k`` lowest-scoring distinct states seen, sorted by score with
    earlier discoveries first among ties.
    """
    np.random.seed(seed)
    n = n_choices.shape[0]
    n_seats = seat_choice.shape[1]
    choice = np.empty(n, dtype=np.int64)
    for i in range(n):
        if init[i] >= 0:
            choice[i] = init[i]
        else:
            choice[i] = np.random.randint(0, n_choices[i])
    occ = np.zeros(n_seats, dtype=np.int64)
    for i in range(n):
        occ[seat[i, choice[i]]] += 1
    cur = _full_score(choice, n_choices, seat, alpha, nbr_ptr, nbr_node, blocks, p_overlap, occ)
    best_raw = cur

    pool_states = np.zeros((pool_k, n), dtype=np.int64)
    pool_scores = np.full(pool_k, np.inf)
    pool_size = 0
    pool_states[0, :] = choice
    pool_scores[0] = cur
    pool_size = 1

    trace = np.zeros(steps if record_trace else 0)
    state_trace = np.zeros((steps if record_trace else 0, n), dtype=np.int64)
    ratio = t_low / t_high
    for step in range(steps):
        if steps > 1:
            temp = t_high * ratio ** (step / (steps - 1))
        else:
            temp = t_high
        if n == 0:
            if record_trace:
                trace[step] = cur
            continue

        i = np.random.randint(0, n)
        j = -1
        ci_new = -1
        cj_new = -1
        if n > 1 and np.random.random() < swap_frac:
            j = np.random.randint(0, n - 1)
            if j >= i:
                j += 1
            si = seat[i, choice[i]]
            sj = seat[j, choice[j]]
            if si != sj:
                ci_new = seat_choice[i, sj]
                cj_new = seat_choice[j, si]
            if ci_new < 0 or cj_new < 0:
                j = -1
        if j < 0:
            d_i = n_choices[i]
            if d_i > 1:
                r = np.random.randint(0, d_i - 1)
                if r >= choice[i]:
                    r += 1
                ci_new = r

        if ci_new >= 0:
            ci_old = choice[i]
            delta = _node_delta(i, ci_new, choice, occ, n_choices, seat, alpha, seat_choice,
                                nbr_ptr, nbr_node, blocks, p_overlap)
            if j >= 0:
                _set(i, ci_new, choice, occ, seat)
                delta += _node_delta(j, cj_new, choice, occ, n_choices, seat, alpha, seat_choice,
                                     nbr_ptr, nbr_node, blocks, p_overlap)
                _set(i, ci_old, choice, occ, seat)
            eff = _hf_effective_delta(cur, delta, best_raw, ceiling_h, kappa) if hf else delta
            if eff <= 0.0 or np.random.random() < math.exp(-eff / temp):
                _set(i, ci_new, choice, occ, seat)
                if j >= 0:
                    _set(j, cj_new, choice, occ, seat)
                cur += delta
                if cur < best_raw:
                    best_raw = cur
                if pool_size < pool_k or cur < pool_scores[pool_size - 1]:
                    dup = False
                    for q in range(pool_size):
                        same = True
                        for x in range(n):
                            if pool_states[q, x] != choice[x]:
                                same = False
                                break
                        if same:
                            dup = True
                            break
                    if not dup:
                        pos = pool_size if pool_size < pool_k else pool_k - 1
                        while pos > 0 and pool_scores[pos - 1] > cur:
                            if pos < pool_k:
                                pool_scores[pos] = pool_scores[pos - 1]
                                pool_states[pos, :] = pool_states[pos - 1, :]
                            pos -= 1
                        pool_scores[pos] = cur
                        pool_states[pos, :] = choice
                        if pool_size < pool_k:
                            pool_size += 1
        if record_trace:
            trace[step] = cur
            state_trace[step, :] = choice
    return pool_states, pool_scores, pool_size, trace, state_trace


@njit(cache=True)
def anneal_qubo(seed, shots, sweeps, beta_hot, beta_cold, linear, q_ptr, q_idx, q_val):
    """Single-bit-flip Metropolis annealing, one independent run per shot.

    The quadratic part is a symmetric CSR adjacency (each pair stored twice).
    Returns a (shots, n_bits) uint8 array.
    """
    np.random.seed(seed)
    nb = linear.shape[0]
    out = np.zeros((shots, nb), dtype=np.uint8)
    bits = np.zeros(nb, dtype=np.uint8)
    field = np.zeros(nb)
    for shot in range(shots):
        for k in range(nb):
            bits[k] = 1 if np.random.random() < 0.5 else 0
        for k in range(nb):
            f = linear[k]
            for e in range(q_ptr[k], q_ptr[k + 1]):
                if bits[q_idx[e]]:
                    f += q_val[e]
            field[k] = f
        for sw in range(sweeps):
            if sweeps > 1:
                beta = beta_hot * (beta_cold / beta_hot) ** (sw / (sweeps - 1))
            else:
                beta = beta_cold
            for k in range(nb):
                d = field[k] if bits[k] == 0 else -field[k]
                if d <= 0.0 or np.random.random() < math.exp(-beta * d):
                    sign = 1.0 if bits[k] == 0 else -1.0
                    bits[k] = 1 - bits[k]
                    for e in range(q_ptr[k], q_ptr[k + 1]):
                        field[q_idx[e]] += sign * q_val[e]
        out[shot, :] = bits
    return out
