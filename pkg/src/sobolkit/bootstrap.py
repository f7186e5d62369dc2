"""Percentile bootstrap confidence intervals for pick-freeze estimators.

Resampling happens over the N row indices, and one resampled index vector is
applied jointly to every batch: the pick-freeze pairing between batches is
what carries the information, so resampling batches independently would be
statistically wrong.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .designs import SimulationBatch
from .errors import ConfigurationError, DegenerateModelError, DomainError
from .rng import substream

MAX_RETRIES = 10


@dataclass(frozen=True)
class BootstrapConfig:
    replicates: int = 1000
    level: float = 0.95
    method: str = "percentile"
    seed: int = 0
    labels: tuple = ()

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigurationError("need at least one bootstrap replicate")
        if not 0.0 < self.level < 1.0:
            raise ConfigurationError(f"level must lie in (0, 1), got {self.level}")
        if self.method != "percentile":
            raise ConfigurationError(f"unknown interval method {self.method!r}")


def bootstrap_ci(estimator, batches, cfg: BootstrapConfig,
                 index_source=None) -> tuple[float, float]:
    """Percentile interval of ``estimator`` over jointly resampled batches.

    ``estimator`` maps a list of aligned 1-D arrays to a float.  ``batches``
    may be SimulationBatch objects or plain arrays; all must share one length
    and one row correspondence.  If the estimator fails on a resample (e.g.
    a constant resampled batch) that replicate is retried with a fresh index
    vector, at most ``MAX_RETRIES`` times.

    ``index_source`` (testing hook): callable returning the index vector for
    replicate b instead of drawing it from the stream.
    """
    arrays = [b.outputs if isinstance(b, SimulationBatch) else np.asarray(b, float)
              for b in batches]
    n = arrays[0].size
    if any(a.size != n for a in arrays):
        raise DomainError("batches must be aligned (equal lengths)")
    stream = substream(cfg.seed, "bootstrap", *cfg.labels)
    values = np.empty(cfg.replicates)
    for b in range(cfg.replicates):
        for attempt in range(MAX_RETRIES + 1):
            if index_source is not None:
                idx = np.asarray(index_source(b))
            else:
                idx = stream.integers(0, n, size=n)
            try:
                values[b] = estimator([a[idx] for a in arrays])
                break
            except DegenerateModelError:
                if attempt == MAX_RETRIES or index_source is not None:
                    raise
    alpha = 1.0 - cfg.level
    lo, hi = np.quantile(values, [alpha / 2.0, 1.0 - alpha / 2.0])
    return float(lo), float(hi)
