"""Pure-Python Gillespie direct method, the fallback for ``_ssa_kernel``.

Draw order and arithmetic mirror the compiled kernel exactly, so both backends
produce identical trajectories from identical bit generators.
"""
import math

import numpy as np


def run_direct(reactants, jumps, kt, k0, times, bit_generator, record=False):
    """Simulate one trajectory.

    Returns ``(samples, n_events, jump_times, jump_states)`` where ``samples[q]`` is
    the state at ``times[q]`` (right-continuous) and the jump arrays (initial state
    first) are ``None`` unless ``record`` is set.
    """
    R = [list(map(int, row)) for row in np.asarray(reactants)]
    J = [list(map(int, row)) for row in np.asarray(jumps)]
    K = [float(x) for x in kt]
    T = [float(x) for x in times]
    k = [int(x) for x in k0]
    n = len(k)
    reactant_idx = [[(i, a) for i, a in enumerate(row) if a] for row in R]
    uniform = np.random.Generator(bit_generator).random
    nt = len(T)

    samples = np.zeros((nt, n), dtype=np.int64)
    rec_t = [0.0] if record else None
    rec_k = [list(k)] if record else None
    prop = [0.0] * len(R)
    t = 0.0
    q = 0
    nev = 0
    while True:
        a0 = 0.0
        for j, idx in enumerate(reactant_idx):
            v = K[j]
            for i, a in idx:
                if k[i] < a:
                    v = 0.0
                    break
                x = float(k[i])
                for c in range(a):
                    v *= x - c
            prop[j] = v
            a0 += v
        if a0 <= 0.0:
            t_next = math.inf
        else:
            u = uniform()
            t_next = t - math.log(1.0 - u) / a0
        while q < nt and T[q] < t_next:
            samples[q] = k
            q += 1
        if q == nt:
            break
        target = uniform() * a0
        cum = 0.0
        sel = -1
        for j, p in enumerate(prop):
            if p > 0.0:
                cum += p
                sel = j
                if cum > target:
                    break
        for i, g in enumerate(J[sel]):
            k[i] += g
        t = t_next
        nev += 1
        if record:
            rec_t.append(t)
            rec_k.append(list(k))
    if record:
        return samples, nev, np.array(rec_t), np.array(rec_k, dtype=np.int64).reshape(-1, n)
    return samples, nev, None, None
