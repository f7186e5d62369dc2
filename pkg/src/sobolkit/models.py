"""Built-in benchmark models with analytic Sobol' indices.

The built-ins are members of the g-function family: a product of independent
one-dimensional factors of the form (|4x - 2| + c_i) / (1 + a_i) over
U(0, 1) inputs, optionally plus a small additive linear tail eps * sum(x_j).
Two factor variants are used:

* ``modified``  c_i = 2 + 3 a_i, so every factor has mean 3;
* ``standard``  c_i = a_i, so every factor has mean 1.

For any factor-product model with factor means m_i and variances v_i (plus
tail inputs of variance eps^2 / 12 each) the index algebra is closed form::

    D      = prod(m_i^2 + v_i) - prod(m_i^2) + n_tail * eps^2 / 12
    S_i    = v_i * prod_{j != i} m_j^2 / D          (product inputs)
    S^T_i  = v_i * prod_{j != i} (m_j^2 + v_j) / D
    S_tail = S^T_tail = (eps^2 / 12) / D            (additive, no interactions)

with m_i = (1 + c_i) / (1 + a_i) and v_i = (1/3) / (1 + a_i)^2 since
|4X - 2| is uniform on [0, 2] (mean 1, variance 1/3).

``brute_force_indices`` is an independent pick-freeze Monte Carlo oracle
(Saltelli's first-order form, Jansen's total-order form, plain i.i.d.
sampling) used to cross-check both the closed forms and the design-based
estimators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError, UnsupportedModelError
from .rng import substream


@dataclass(frozen=True)
class AnalyticIndices:
    first_order: np.ndarray
    total_order: np.ndarray
    total_variance: float

    def __post_init__(self):
        object.__setattr__(self, "first_order", np.asarray(self.first_order, float))
        object.__setattr__(self, "total_order", np.asarray(self.total_order, float))


def modified_g(x: np.ndarray, a) -> np.ndarray:
    """prod_i (|4 x_i - 2| + 2 + 3 a_i) / (1 + a_i) over the first 3 columns."""
    a = np.asarray(a, float)
    if np.any(a == -1.0):
        raise DomainError("a_i = -1 makes a factor divide by zero")
    x = np.atleast_2d(np.asarray(x, float))
    if x.shape[1] != a.size:
        raise ConfigurationError(f"expected {a.size} columns, got {x.shape[1]}")
    return np.prod((np.abs(4.0 * x - 2.0) + 2.0 + 3.0 * a) / (1.0 + a), axis=1)


def g_sobol(x: np.ndarray, a) -> np.ndarray:
    """prod_i (|4 x_i - 2| + a_i) / (1 + a_i)."""
    a = np.asarray(a, float)
    if np.any(a == -1.0):
        raise DomainError("a_i = -1 makes a factor divide by zero")
    x = np.atleast_2d(np.asarray(x, float))
    if x.shape[1] != a.size:
        raise ConfigurationError(f"expected {a.size} columns, got {x.shape[1]}")
    return np.prod((np.abs(4.0 * x - 2.0) + a) / (1.0 + a), axis=1)


def modified_g_linear(x: np.ndarray, a, eps: float) -> np.ndarray:
    """modified_g on the first 3 coordinates plus eps * sum of the rest."""
    x = np.atleast_2d(np.asarray(x, float))
    a = np.asarray(a, float)
    head = modified_g(x[:, : a.size], a)
    return head + eps * x[:, a.size:].sum(axis=1)


@dataclass(frozen=True)
class GProductModel:
    """A g-family benchmark: product factors plus an optional linear tail."""

    id: str
    a: tuple[float, ...]
    variant: str = "modified"          # "modified" or "standard"
    eps: float = 0.0
    n_linear: int = 0

    def __post_init__(self):
        if self.variant not in ("modified", "standard"):
            raise ConfigurationError(f"unknown variant {self.variant!r}")
        if any(ai == -1.0 for ai in self.a):
            raise DomainError("a_i = -1 makes a factor divide by zero")

    @property
    def dimension(self) -> int:
        return len(self.a) + self.n_linear

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, float))
        if x.shape[1] != self.dimension:
            raise ConfigurationError(
                f"{self.id} expects {self.dimension} inputs, got {x.shape[1]}")
        k = len(self.a)
        if self.variant == "modified":
            head = modified_g(x[:, :k], self.a)
        else:
            head = g_sobol(x[:, :k], self.a)
        if self.n_linear:
            head = head + self.eps * x[:, k:].sum(axis=1)
        return head

    def factor_moments(self) -> tuple[np.ndarray, np.ndarray]:
        a = np.asarray(self.a, float)
        c = 2.0 + 3.0 * a if self.variant == "modified" else a
        m = (1.0 + c) / (1.0 + a)
        v = (1.0 / 3.0) / (1.0 + a) ** 2
        return m, v


def analytic_indices(model) -> AnalyticIndices:
    """Closed-form first/total indices for a g-family model."""
    if not isinstance(model, GProductModel):
        raise UnsupportedModelError(
            "closed-form indices are only available for the g-function family")
    m, v = model.factor_moments()
    tail_var = model.eps ** 2 / 12.0
    prod_m2 = float(np.prod(m * m))
    prod_mix = float(np.prod(m * m + v))
    total_variance = prod_mix - prod_m2 + model.n_linear * tail_var
    s_head = v * (prod_m2 / (m * m)) / total_variance
    st_head = v * (prod_mix / (m * m + v)) / total_variance
    s_tail = np.full(model.n_linear, tail_var / total_variance)
    return AnalyticIndices(
        first_order=np.concatenate([s_head, s_tail]),
        total_order=np.concatenate([st_head, s_tail]),
        total_variance=total_variance,
    )


def brute_force_indices(model, n_mc: int, seed: int) -> AnalyticIndices:
    """Pick-freeze Monte Carlo oracle with i.i.d. (non-LHD) sampling.

    First-order by Saltelli's cross form mean(f_B * (f_ABi - f_A)) / V and
    total-order by Jansen's mean((f_A - f_ABi)^2) / (2 V); both are
    structurally different routes from the design-based estimators they
    cross-check.
    """
    if n_mc < 10_000:
        raise DomainError("brute-force oracle needs n_mc >= 10000")
    d = model.dimension
    stream = substream(seed, "bruteforce")
    a_mat = stream.random((n_mc, d))
    b_mat = stream.random((n_mc, d))
    f_a = model(a_mat)
    f_b = model(b_mat)
    mean = 0.5 * float(f_a.mean() + f_b.mean())
    f_a = f_a - mean  # centering keeps the cross estimator's variance sane
    f_b = f_b - mean
    var = 0.5 * float(np.dot(f_a, f_a) + np.dot(f_b, f_b)) / n_mc
    first = np.empty(d)
    total = np.empty(d)
    for j in range(d):
        ab = a_mat.copy()
        ab[:, j] = b_mat[:, j]
        f_ab = model(ab) - mean
        first[j] = float(np.mean(f_b * (f_ab - f_a))) / var
        total[j] = float(np.mean((f_a - f_ab) ** 2)) / (2.0 * var)
    return AnalyticIndices(first_order=first, total_order=total, total_variance=var)


REGISTRY: dict[str, GProductModel] = {
    m.id: m for m in (
        GProductModel(id="mod-g-19-9-4", a=(19.0, 9.0, 4.0)),
        GProductModel(id="mod-g-lin-eps0.10", a=(19.0, 9.0, 4.0), eps=0.10, n_linear=7),
        GProductModel(id="mod-g-10-10-4", a=(10.0, 10.0, 4.0), eps=0.10, n_linear=7),
        GProductModel(id="g-sobol-d10-a0", a=(0.0,) * 10, variant="standard"),
    )
}


def get_model(model_id: str) -> GProductModel:
    try:
        return REGISTRY[model_id]
    except KeyError:
        raise ConfigurationError(
            f"unknown builtin model {model_id!r}; known: {sorted(REGISTRY)}") from None
