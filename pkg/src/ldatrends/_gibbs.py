"""Compiled collapsed-Gibbs kernels.

Random draws are passed in as uniform arrays generated by the caller, one
per token per sweep, so the kernels themselves hold no RNG state and a
sweep is a pure function of (counts, assignments, uniforms).
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _pick(cum, r):
    k = cum.shape[0]
    for t in range(k):
        if r < cum[t]:
            return t
    return k - 1


@njit(cache=True, nogil=True)
def gibbs_sweep(doc_of, word_of, z, n_dk, n_wk, n_k, alpha, eta, v_eta, u):
    """One full sweep over all tokens, updating ``z`` and counts in place.

    ``n_wk`` is stored term-major (V x k) for contiguous access per token.
    """
    k = n_k.shape[0]
    cum = np.empty(k)
    for i in range(doc_of.shape[0]):
        d = doc_of[i]
        w = word_of[i]
        t = z[i]
        n_dk[d, t] -= 1
        n_wk[w, t] -= 1
        n_k[t] -= 1
        total = 0.0
        for s in range(k):
            total += (n_dk[d, s] + alpha) * (n_wk[w, s] + eta) / (n_k[s] + v_eta)
            cum[s] = total
        t = _pick(cum, u[i] * total)
        z[i] = t
        n_dk[d, t] += 1
        n_wk[w, t] += 1
        n_k[t] += 1


@njit(cache=True, nogil=True)
def foldin_sweep(doc_of, word_of, z, n_dk, phi_wk, alpha, u):
    """Fold-in sweep: topic-word distribution held fixed at ``phi_wk``."""
    k = n_dk.shape[1]
    cum = np.empty(k)
    for i in range(doc_of.shape[0]):
        d = doc_of[i]
        w = word_of[i]
        t = z[i]
        n_dk[d, t] -= 1
        total = 0.0
        for s in range(k):
            total += (n_dk[d, s] + alpha) * phi_wk[w, s]
            cum[s] = total
        t = _pick(cum, u[i] * total)
        z[i] = t
        n_dk[d, t] += 1


def gibbs_sweep_py(doc_of, word_of, z, n_dk, n_wk, n_k, alpha, eta, v_eta, u):
    """Pure-Python twin of :func:`gibbs_sweep` (test oracle)."""
    k = n_k.shape[0]
    for i in range(len(doc_of)):
        d, w, t = int(doc_of[i]), int(word_of[i]), int(z[i])
        n_dk[d, t] -= 1
        n_wk[w, t] -= 1
        n_k[t] -= 1
        weights = [
            (n_dk[d, s] + alpha) * (n_wk[w, s] + eta) / (n_k[s] + v_eta) for s in range(k)
        ]
        r = u[i] * sum(weights)
        acc, t = 0.0, k - 1
        for s in range(k):
            acc += weights[s]
            if r < acc:
                t = s
                break
        z[i] = t
        n_dk[d, t] += 1
        n_wk[w, t] += 1
        n_k[t] += 1
