"""Brute-force closed and interaction indices on small input groups.

These are the variance-decomposition definitions evaluated directly by
pick-freeze Monte Carlo on i.i.d. samples; they serve as reference oracles
for tests and documentation, not as production estimators.  Group sizes are
capped at desk scale.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError, UnsupportedModelError
from .rng import substream

MAX_GROUP = 3


def _validate_group(u, d: int, max_size: int) -> tuple[int, ...]:
    u = tuple(sorted(set(int(k) for k in u)))
    if not u:
        raise DomainError("index set must be non-empty")
    if u[0] < 1 or u[-1] > d:
        raise DomainError(f"index set {u} not within 1..{d}")
    if len(u) > max_size:
        raise UnsupportedModelError(
            f"group size {len(u)} exceeds the desk-scale cap of {max_size}")
    return u


def closed_index_bruteforce(model, u, n_mc: int, seed: int) -> float:
    """V[E(Y|X_u)] / V[Y] by pick-freeze MC: correlate outputs of two i.i.d.
    designs that agree exactly on the columns in u."""
    d = model.dimension
    u = _validate_group(u, d, MAX_GROUP)
    stream = substream(seed, "closed", u)
    a = stream.random((n_mc, d))
    b = stream.random((n_mc, d))
    cols = [k - 1 for k in u]
    b[:, cols] = a[:, cols]
    f_a = model(a)
    f_c = model(b)
    mean = 0.5 * (f_a.mean() + f_c.mean())
    var = 0.5 * float((f_a * f_a).mean() + (f_c * f_c).mean()) - mean * mean
    return (float(np.dot(f_a - mean, f_c - mean)) / n_mc) / var


def interaction_index_bruteforce(model, u, n_mc: int, seed: int) -> float:
    """Pairwise interaction index: closed index of {i, j} minus the two
    first-order indices, each by the same MC oracle."""
    u = _validate_group(u, model.dimension, MAX_GROUP)
    if len(u) != 2:
        raise UnsupportedModelError("interaction oracle is pairwise only")
    i, j = u
    s_ij = closed_index_bruteforce(model, (i, j), n_mc, seed)
    s_i = closed_index_bruteforce(model, (i,), n_mc, seed)
    s_j = closed_index_bruteforce(model, (j,), n_mc, seed)
    return s_ij - s_i - s_j
