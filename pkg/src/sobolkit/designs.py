"""Randomized replicated Latin hypercube designs and the reordering trick.

A randomized LHD on N points places, per column, exactly one point in each
stratum ``[(l-1)/N, l/N)``.  Column ``i`` is built from a level permutation
``pi_i`` and a jitter array ``U`` shared by the whole design family::

    x[k, i] = (pi_i(k) - 0.5 + U[i, pi_i(k)]) / N

The jitter is indexed by the *level*, not the row.  Two designs built from
independent permutations but the same jitter therefore attach the identical
point value to each level: their columns are exact row permutations of each
other ("replicated").  Reordering the rows of one design so that column ``i``
matches another design's column ``i`` manufactures the pick-freeze partner
for input ``i`` out of existing simulations, which is what makes the whole
strategy cheap.

Derived designs (the pick-freeze partners and the matched variants used by
the averaged estimators) are represented as views: a parent design plus a
row permutation.  Their points are never re-materialized independently, so
the zero-new-simulation guarantee is structural.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import (ConfigurationError, DomainError, EvaluationError,
                     InvariantViolation, PreconditionError)
from .rng import substream


# ---------------------------------------------------------------------------
# permutations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Permutation:
    """A bijection on {1, ..., n}, stored in one-line notation, 1-based.

    ``map[k-1]`` is the image of k.  Files serialize the 0-based form with an
    explicit ``base`` field; in memory the values match the 1-based level
    labels used throughout.
    """

    map: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.map, dtype=np.int64)
        object.__setattr__(self, "map", m)
        if m.ndim != 1 or m.size == 0:
            raise DomainError("permutation must be a non-empty 1-D array")
        if not np.array_equal(np.sort(m), np.arange(1, m.size + 1)):
            raise DomainError("not a bijection on {1..n}: " + repr(m.tolist()))

    @property
    def n(self) -> int:
        return int(self.map.size)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(1, n + 1))

    def __call__(self, k: int) -> int:
        return int(self.map[k - 1])

    def inverse(self) -> "Permutation":
        inv = np.empty(self.n, dtype=np.int64)
        inv[self.map - 1] = np.arange(1, self.n + 1)
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """(self o other)(k) = self(other(k))."""
        if other.n != self.n:
            raise DomainError(f"length mismatch: {self.n} vs {other.n}")
        return Permutation(self.map[other.map - 1])

    def gather(self, rows: np.ndarray) -> np.ndarray:
        """Row-reorder an array: result[k] = rows[self(k)]."""
        if len(rows) != self.n:
            raise DomainError(f"length mismatch: {len(rows)} rows vs n={self.n}")
        return np.asarray(rows)[self.map - 1]


def sample_permutation(n: int, stream: np.random.Generator) -> Permutation:
    """Uniformly random permutation of {1..n} (Fisher-Yates via the stream)."""
    if n < 1:
        raise DomainError(f"permutation size must be >= 1, got {n}")
    return Permutation(stream.permutation(n) + 1)


def match_permutation(target: Permutation, source: Permutation) -> Permutation:
    """The level relabeling p with p o source = target (p = target o source^-1).

    Applied to the values of ``source``'s column it reproduces ``target``'s.
    """
    if target.n != source.n:
        raise DomainError(f"length mismatch: {target.n} vs {source.n}")
    return target.compose(source.inverse())


def _row_gather(target: Permutation, source: Permutation) -> Permutation:
    """Row permutation sigma = source^-1 o target.

    Gathering rows of the source design by sigma makes its matched column
    read exactly like the target column: source(sigma(k)) = target(k).
    """
    return source.inverse().compose(target)


# ---------------------------------------------------------------------------
# jitter and designs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JitterArray:
    """Per-(column, level) uniform jitter on (-1/2, 1/2), shared family-wide.

    ``values[l-1, i-1]`` is the jitter attached to level l of column i+1.
    Immutable once created; sharing it across designs is what makes their
    replication exact rather than statistical.
    """

    values: np.ndarray
    seed: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if v.ndim != 2:
            raise ConfigurationError("jitter must be an N x d array")
        if not ((v > -0.5) & (v < 0.5)).all():
            raise ConfigurationError("jitter entries must lie strictly in (-1/2, 1/2)")

    @classmethod
    def sample(cls, n: int, d: int, seed: int) -> "JitterArray":
        stream = substream(seed, "jitter")
        return cls(values=stream.uniform(-0.5, 0.5, size=(n, d)), seed=seed)


class DesignMatrix:
    """An N x d design, either a base design or a row-reordered view.

    Base unit designs carry their level matrix, column permutations and the
    shared jitter.  Views carry only ``parent`` and ``row_perm``; their
    points/levels are gathered from the parent on access.
    """

    def __init__(self, id: str, space: str, points: np.ndarray | None = None,
                 levels: np.ndarray | None = None, column_perms=None,
                 jitter: JitterArray | None = None,
                 parent: "DesignMatrix | None" = None,
                 row_perm: Permutation | None = None):
        if (parent is None) == (points is None):
            raise ConfigurationError("a design is either materialized or a view of a parent")
        if parent is not None and row_perm is None:
            raise ConfigurationError("a view needs its row permutation")
        self.id = id
        self.space = space
        self._points = None if points is None else np.asarray(points, dtype=float)
        self._levels = None if levels is None else np.asarray(levels, dtype=np.int64)
        self.column_perms = None if column_perms is None else tuple(column_perms)
        self.jitter = jitter
        self.parent = parent
        self.row_perm = row_perm

    @property
    def points(self) -> np.ndarray:
        if self.parent is not None:
            return self.row_perm.gather(self.parent.points)
        return self._points

    @property
    def levels(self) -> np.ndarray | None:
        if self.parent is not None:
            base = self.parent.levels
            return None if base is None else self.row_perm.gather(base)
        return self._levels

    @property
    def n(self) -> int:
        return self.root.n if self.parent is not None else len(self._points)

    @property
    def d(self) -> int:
        return self.root.d if self.parent is not None else self._points.shape[1]

    @property
    def root(self) -> "DesignMatrix":
        node = self
        while node.parent is not None:
            node = node.parent
        return node

    @property
    def id_chain(self) -> tuple[str, ...]:
        """Identity chain from root to this design (views expose provenance)."""
        chain = []
        node = self
        while node is not None:
            chain.append(node.id)
            node = node.parent
        return tuple(reversed(chain))

    def column_levels(self, i: int) -> Permutation:
        """Levels of 1-based column i as a permutation."""
        lv = self.levels
        if lv is None:
            raise ConfigurationError(f"design {self.id} carries no level provenance")
        return Permutation(lv[:, i - 1])

    def __repr__(self):
        kind = "view" if self.parent is not None else "base"
        return f"DesignMatrix({self.id!r}, {self.space}, {kind})"


def build_randomized_lhd(perms, jitter: JitterArray, id: str = "lhd") -> DesignMatrix:
    """Assemble a unit-space randomized LHD from column permutations and jitter."""
    perms = tuple(perms)
    n, d = jitter.values.shape
    if len(perms) != d or any(p.n != n for p in perms):
        raise ConfigurationError(
            f"need {d} permutations of length {n} to match the jitter array")
    levels = np.column_stack([p.map for p in perms])
    cols = np.arange(d)
    points = (levels - 0.5 + jitter.values[levels - 1, cols]) / n
    return DesignMatrix(id=id, space="unit", points=points, levels=levels,
                        column_perms=perms, jitter=jitter)


def is_replicated(a: DesignMatrix, b: DesignMatrix) -> np.ndarray:
    """Per-column: does some row permutation map b's column exactly onto a's?

    Equivalent to exact multiset equality of the column values.
    """
    pa, pb = a.points, b.points
    if pa.shape != pb.shape:
        raise DomainError(f"shape mismatch: {pa.shape} vs {pb.shape}")
    return np.array([np.array_equal(np.sort(pa[:, j]), np.sort(pb[:, j]))
                     for j in range(pa.shape[1])])


def reorder_to_match(w: DesignMatrix, x: DesignMatrix, i: int) -> DesignMatrix:
    """Row-reorder ``w`` so its column ``i`` reads exactly like ``x``'s.

    This is the pick-freeze partner of input i manufactured from ``w``:
    column i agrees with ``x`` point by point (same jitter realizations),
    the other columns are a row reordering of ``w``'s.  Returned as a view
    (parent ``w`` plus the row permutation used).
    """
    shared = (w.jitter is not None and x.jitter is not None
              and (w.jitter is x.jitter
                   or np.array_equal(w.jitter.values, x.jitter.values)))
    if not shared:
        raise InvariantViolation(
            f"{w.id} and {x.id} do not share a jitter array; "
            "the reordering trick needs designs from one family")
    if not 1 <= i <= w.d:
        raise DomainError(f"column index {i} out of range 1..{w.d}")
    sigma = _row_gather(target=x.column_levels(i), source=w.column_levels(i))
    return DesignMatrix(id=f"{w.id}~match{i}({x.id})", space=w.space,
                        jitter=w.jitter, parent=w, row_perm=sigma)


# ---------------------------------------------------------------------------
# simulation batches
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimulationBatch:
    """The N model outputs attached to one design identity."""

    design_id: str
    outputs: np.ndarray
    model_id: str = ""

    def __post_init__(self):
        out = np.asarray(self.outputs, dtype=float)
        out.setflags(write=False)
        object.__setattr__(self, "outputs", out)
        if out.ndim != 1:
            raise ConfigurationError("outputs must be a 1-D array")
        if not np.isfinite(out).all():
            bad = int(np.flatnonzero(~np.isfinite(out))[0])
            raise EvaluationError(f"non-finite output at row {bad} of {self.design_id}")

    @property
    def n(self) -> int:
        return int(self.outputs.size)


def reorder_outputs(batch: SimulationBatch, p: Permutation,
                    design_id: str | None = None) -> SimulationBatch:
    """Apply a row reordering to existing outputs; consumes no evaluations."""
    if batch.n != p.n:
        raise DomainError(f"length mismatch: batch n={batch.n}, permutation n={p.n}")
    return SimulationBatch(design_id=design_id or f"{batch.design_id}~reordered",
                           outputs=p.gather(batch.outputs), model_id=batch.model_id)


# ---------------------------------------------------------------------------
# design families
# ---------------------------------------------------------------------------

def _family_uid(n: int, d: int, seed: int) -> str:
    return hashlib.sha256(f"rlhd:{n}:{d}:{seed}".encode()).hexdigest()[:12]


class RlhdFamily:
    """A set of mutually replicated randomized LHDs sharing one jitter array.

    Members are named ``X``, ``W`` and ``Z<i>``; the member permutation sets
    are independent draws from labeled substreams of the family seed, so
    adding ``Z<i>`` later never perturbs the reproduction of X and W.
    """

    def __init__(self, n: int, d: int, seed: int, jitter: JitterArray,
                 members: dict[str, DesignMatrix], uid: str | None = None):
        self.n = n
        self.d = d
        self.seed = seed
        self.jitter = jitter
        self.members = members
        self.uid = uid or _family_uid(n, d, seed)
        self._views: dict[str, DesignMatrix] = {}

    # -- construction ------------------------------------------------------

    @classmethod
    def make_pair(cls, n: int, d: int, seed: int) -> "RlhdFamily":
        """Two independent permutation sets, one shared jitter (members X, W)."""
        if n < 2:
            raise DomainError(f"need N >= 2 for estimation designs, got {n}")
        if d < 1:
            raise DomainError(f"need d >= 1, got {d}")
        jitter = JitterArray.sample(n, d, seed)
        fam = cls(n, d, seed, jitter, members={})
        for name in ("X", "W"):
            stream = substream(seed, "design", name)
            perms = [sample_permutation(n, stream) for _ in range(d)]
            fam.members[name] = build_randomized_lhd(perms, jitter, id=f"{fam.uid}:{name}")
        return fam

    @classmethod
    def from_permutations(cls, jitter: JitterArray, member_perms: dict,
                          seed: int = 0) -> "RlhdFamily":
        """Build a family from explicit permutation sets (replay, golden data)."""
        n, d = jitter.values.shape
        key = hashlib.sha256(repr(sorted(
            (name, tuple(tuple(p.map) for p in perms))
            for name, perms in member_perms.items())).encode()).hexdigest()[:12]
        fam = cls(n, d, seed, jitter, members={}, uid=key)
        for name, perms in member_perms.items():
            perms = tuple(perms)
            if len(perms) != d or any(p.n != n for p in perms):
                raise ConfigurationError(f"member {name}: permutation set does not match N x d")
            fam.members[name] = build_randomized_lhd(perms, jitter, id=f"{fam.uid}:{name}")
        return fam

    # -- member access -----------------------------------------------------

    @property
    def x(self) -> DesignMatrix:
        return self.members["X"]

    @property
    def w(self) -> DesignMatrix:
        return self.members["W"]

    def z(self, i: int) -> DesignMatrix:
        return self._require_z(i)

    def has_z(self, i: int) -> bool:
        return f"Z{i}" in self.members

    def owns(self, design: DesignMatrix) -> bool:
        root = design.root
        return any(m is root for m in self.members.values())

    # -- derived views -------------------------------------------------------

    def _view(self, vid: str, parent: DesignMatrix, sigma: Permutation) -> DesignMatrix:
        if vid not in self._views:
            self._views[vid] = DesignMatrix(id=vid, space=parent.space,
                                            jitter=self.jitter, parent=parent,
                                            row_perm=sigma)
        return self._views[vid]

    def matched_to_x(self, name: str, i: int) -> DesignMatrix:
        """Member ``name`` reordered so its column i matches X's column i."""
        self._check_index(i)
        member = self.members[name]
        sigma = _row_gather(self.x.column_levels(i), member.column_levels(i))
        vid = f"{self.uid}:W-{i}" if name == "W" else f"{self.uid}:{name}~match{i}(X)"
        return self._view(vid, member, sigma)

    def wmi(self, i: int) -> DesignMatrix:
        """W reordered so column i matches X's: the pick-freeze partner of i."""
        return self.matched_to_x("W", i)

    def make_z(self, i: int, stream: np.random.Generator | None = None) -> DesignMatrix:
        """Create member Z<i>: fresh column-i permutation, other columns from
        the partner view, same jitter.  X, W and Z<i> are pairwise replicated.
        Requires N new simulations when evaluated (it is a base design)."""
        self._check_index(i)
        name = f"Z{i}"
        if name in self.members:
            return self.members[name]
        if stream is None:
            stream = substream(self.seed, "design", name)
        fresh = sample_permutation(self.n, stream)
        partner_levels = self.wmi(i).levels.copy()
        partner_levels[:, i - 1] = fresh.map
        perms = tuple(Permutation(partner_levels[:, j]) for j in range(self.d))
        design = build_randomized_lhd(perms, self.jitter, id=f"{self.uid}:{name}")
        self.members[name] = design
        return design

    def x_tilde(self, i: int) -> DesignMatrix:
        """X reordered so column i matches Z<i>'s."""
        zi = self._require_z(i)
        sigma = _row_gather(zi.column_levels(i), self.x.column_levels(i))
        return self._view(f"{self.uid}:X~Z{i}", self.x, sigma)

    def w_tilde(self, i: int) -> DesignMatrix:
        """The partner view of i reordered so column i matches Z<i>'s."""
        zi = self._require_z(i)
        wmi = self.wmi(i)
        sigma = _row_gather(zi.column_levels(i), wmi.column_levels(i))
        return self._view(f"{self.uid}:W-{i}~Z{i}", wmi, sigma)

    def z_matched_to_wmi(self, i: int) -> DesignMatrix:
        """Z<i> reordered so column i matches the partner view's (= X's)."""
        zi = self._require_z(i)
        sigma = _row_gather(self.x.column_levels(i), zi.column_levels(i))
        return self._view(f"{self.uid}:Z{i}~W-{i}", zi, sigma)

    def outputs_for(self, design: DesignMatrix,
                    root_batches: dict[str, SimulationBatch]) -> SimulationBatch:
        """Resolve a view's outputs from its root batch by row reordering only."""
        root = design.root
        name = root.id.split(":", 1)[1]
        if name not in root_batches:
            raise PreconditionError(f"no outputs available for root design {name}")
        batch = root_batches[name]
        node_chain = []
        node = design
        while node.parent is not None:
            node_chain.append(node)
            node = node.parent
        for node in reversed(node_chain):
            batch = reorder_outputs(batch, node.row_perm, design_id=node.id)
        return batch

    # -- helpers -------------------------------------------------------------

    def _check_index(self, i: int):
        if not 1 <= i <= self.d:
            raise DomainError(f"input index {i} out of range 1..{self.d}")

    def _require_z(self, i: int) -> DesignMatrix:
        self._check_index(i)
        if not self.has_z(i):
            raise PreconditionError(f"design Z{i} has not been created in family {self.uid}")
        return self.members[f"Z{i}"]


def make_rlhd_pair(n: int, d: int, seed: int) -> RlhdFamily:
    """Family with members X and W; see :meth:`RlhdFamily.make_pair`."""
    return RlhdFamily.make_pair(n, d, seed)


def make_z_design(family: RlhdFamily, i: int,
                  stream: np.random.Generator | None = None) -> DesignMatrix:
    """Create the Z design for input i within the family."""
    return family.make_z(i, stream)


def latin_property_holds(design: DesignMatrix) -> bool:
    """Each column has exactly one point per stratum [(l-1)/N, l/N)."""
    pts = design.points
    n = len(pts)
    strata = np.floor(pts * n).astype(np.int64) + 1
    expect = np.arange(1, n + 1)
    return all(np.array_equal(np.sort(strata[:, j]), expect) for j in range(pts.shape[1]))
