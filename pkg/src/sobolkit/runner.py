"""Model-evaluation orchestration.

Holds the problem specification (named inputs with marginals, a model
binding, design size and seed), the evaluation-budget ledger, a persistent
result cache keyed by design identity, and the file-based bridge to external
simulators.  Derived design views are resolved through their parent batches
by row reordering and are never charged to the budget.

A campaign directory is the single source of truth for persisted campaigns:

    problem.json   ledger.json   state.json   events.jsonl
    designs/       jitter.csv, <member>.csv + <member>.json sidecars
    batches/       one JSON file per evaluated root design

All floats are written with full round-trip precision so that reloading a
campaign reproduces subsequent transitions bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .designs import (DesignMatrix, JitterArray, Permutation, RlhdFamily,
                      SimulationBatch, build_randomized_lhd, reorder_outputs)
from .distributions import MarginalDistribution, transform_points
from .errors import ConfigurationError, EvaluationError, ProtocolError
from .models import REGISTRY, get_model


# ---------------------------------------------------------------------------
# problem specification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InputSpec:
    name: str
    marginal: MarginalDistribution


@dataclass(frozen=True)
class ModelBinding:
    kind: str            # "builtin" | "external"
    ref: str             # builtin id or command template

    def __post_init__(self):
        if self.kind not in ("builtin", "external"):
            raise ConfigurationError(f"unknown model binding kind {self.kind!r}")
        if self.kind == "builtin":
            get_model(self.ref)

    @property
    def model_id(self) -> str:
        if self.kind == "builtin":
            return self.ref
        return "external:" + hashlib.sha256(self.ref.encode()).hexdigest()[:8]


@dataclass(frozen=True)
class ProblemSpec:
    inputs: tuple[InputSpec, ...]
    model: ModelBinding
    n: int
    seed: int
    name: str = ""

    def __post_init__(self):
        if len(self.inputs) < 1:
            raise ConfigurationError("need at least one input")
        if self.n < 2:
            raise ConfigurationError(f"design size must be >= 2, got {self.n}")
        names = [inp.name for inp in self.inputs]
        if len(set(names)) != len(names):
            raise ConfigurationError(f"input names must be unique, got {names}")
        if self.model.kind == "builtin":
            want = get_model(self.model.ref).dimension
            if len(self.inputs) != want:
                raise ConfigurationError(
                    f"model {self.model.ref} has {want} inputs, spec declares {len(self.inputs)}")

    @property
    def d(self) -> int:
        return len(self.inputs)

    @property
    def input_names(self) -> list[str]:
        return [inp.name for inp in self.inputs]

    @property
    def marginals(self) -> list[MarginalDistribution]:
        return [inp.marginal for inp in self.inputs]

    def to_json(self) -> dict:
        model = ({"builtin": self.model.ref} if self.model.kind == "builtin"
                 else {"command": self.model.ref})
        return {
            "name": self.name,
            "n": self.n,
            "seed": self.seed,
            "model": model,
            "inputs": [{"name": inp.name, **inp.marginal.to_json()} for inp in self.inputs],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ProblemSpec":
        if "builtin" in obj.get("model", {}):
            binding = ModelBinding("builtin", obj["model"]["builtin"])
        elif "command" in obj.get("model", {}):
            binding = ModelBinding("external", obj["model"]["command"])
        else:
            raise ConfigurationError("model binding needs a 'builtin' or 'command' key")
        if obj.get("inputs"):
            inputs = tuple(InputSpec(name=e["name"],
                                     marginal=MarginalDistribution.from_json(e))
                           for e in obj["inputs"])
        elif binding.kind == "builtin":
            d = get_model(binding.ref).dimension
            inputs = tuple(
                InputSpec(name=f"x{j + 1}",
                          marginal=MarginalDistribution("uniform",
                                                        {"lower": 0.0, "upper": 1.0}))
                for j in range(d))
        else:
            raise ConfigurationError("external models must declare their inputs")
        return cls(inputs=inputs, model=binding, n=int(obj["n"]),
                   seed=int(obj.get("seed", 0)), name=obj.get("name", ""))

    @classmethod
    def for_builtin(cls, model_id: str, n: int, seed: int) -> "ProblemSpec":
        """Unit-uniform spec over a builtin model (the benchmark setting)."""
        return cls.from_json({"name": model_id, "n": n, "seed": seed,
                              "model": {"builtin": model_id}})


def load_problem(path) -> ProblemSpec:
    with open(path) as fh:
        return ProblemSpec.from_json(json.load(fh))


# ---------------------------------------------------------------------------
# budget ledger
# ---------------------------------------------------------------------------

@dataclass
class BudgetLedger:
    entries: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return sum(e["n"] for e in self.entries)

    def charge(self, design_id: str, n: int, reason: str):
        self.entries.append({"design_id": design_id, "n": int(n),
                             "timestamp": time.time(), "reason": reason})

    def to_json(self) -> dict:
        return {"entries": self.entries, "total": self.total}

    @classmethod
    def from_json(cls, obj: dict) -> "BudgetLedger":
        ledger = cls(entries=list(obj.get("entries", [])))
        if obj.get("total") not in (None, ledger.total):
            raise ConfigurationError("ledger total does not match its entries")
        return ledger


# ---------------------------------------------------------------------------
# external simulator bridge
# ---------------------------------------------------------------------------

def write_design_csv(path, points: np.ndarray, names) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for row in np.atleast_2d(points):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_design_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [[float(v) for v in line.split(",")] for line in fh if line.strip()]
    return header, np.asarray(rows, float)


def external_bridge(command_template: str, points: np.ndarray, names,
                    workdir) -> np.ndarray:
    """Run one external process over a whole design and collect its outputs.

    The template must contain ``{input}`` and ``{output}`` placeholders; the
    design is written as CSV (header = input names, one row per point) and
    the command must write one output value per row, in order.
    """
    if "{input}" not in command_template or "{output}" not in command_template:
        raise ConfigurationError("command template needs {input} and {output} placeholders")
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    in_path = workdir / "design.csv"
    out_path = workdir / "outputs.csv"
    write_design_csv(in_path, points, names)
    if out_path.exists():
        out_path.unlink()
    argv = [tok.replace("{input}", str(in_path)).replace("{output}", str(out_path))
            for tok in shlex.split(command_template)]
    proc = subprocess.run(argv, capture_output=True, text=True)
    if proc.returncode != 0:
        raise EvaluationError(
            f"external command failed with exit code {proc.returncode}: "
            f"{proc.stderr.strip()[:500]}")
    if not out_path.exists():
        raise ProtocolError(f"external command produced no output file {out_path}")
    values = []
    with open(out_path) as fh:
        for ln, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(float(line.split(",")[-1]))
            except ValueError:
                if ln == 0:
                    continue  # tolerate a single header line
                raise ProtocolError(f"unparseable output line {ln}: {line!r}") from None
    expected = len(np.atleast_2d(points))
    if len(values) != expected:
        raise ProtocolError(
            f"external command wrote {len(values)} values, expected {expected}")
    return np.asarray(values, float)


# ---------------------------------------------------------------------------
# evaluator with cache and ledger
# ---------------------------------------------------------------------------

def _atomic_write(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name + ".")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Evaluator:
    """Evaluate designs under a problem spec, with caching and budgeting.

    Cache keys combine the design identity chain with the model binding, so
    a derived view always resolves to its parent's stored outputs and is
    charged zero evaluations.
    """

    def __init__(self, spec: ProblemSpec, store_dir=None, ledger: BudgetLedger | None = None):
        self.spec = spec
        self.ledger = ledger if ledger is not None else BudgetLedger()
        self.store_dir = Path(store_dir) if store_dir is not None else None
        if self.store_dir is not None:
            (self.store_dir / "batches").mkdir(parents=True, exist_ok=True)
        self._memory: dict[str, SimulationBatch] = {}
        if spec.model.kind == "builtin":
            self._model = get_model(spec.model.ref)
        else:
            self._model = None

    # -- cache plumbing ----------------------------------------------------

    def _cache_key(self, design: DesignMatrix) -> str:
        payload = "|".join(design.id_chain) + "||" + self.spec.model.kind + ":" + self.spec.model.ref
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def _cache_path(self, design: DesignMatrix) -> Path | None:
        if self.store_dir is None:
            return None
        role = design.id.split(":", 1)[-1].replace("~", "_").replace("(", "").replace(
            ")", "").replace("@", "_")
        return self.store_dir / "batches" / f"{role}.{self._cache_key(design)}.json"

    def _cache_load(self, design: DesignMatrix) -> SimulationBatch | None:
        key = self._cache_key(design)
        if key in self._memory:
            return self._memory[key]
        path = self._cache_path(design)
        if path is not None and path.exists():
            with open(path) as fh:
                obj = json.load(fh)
            batch = SimulationBatch(design_id=obj["design_id"],
                                    outputs=np.asarray(obj["outputs"], float),
                                    model_id=obj["model_id"])
            self._memory[key] = batch
            return batch
        return None

    def _cache_store(self, design: DesignMatrix, batch: SimulationBatch):
        self._memory[self._cache_key(design)] = batch
        path = self._cache_path(design)
        if path is not None:
            _atomic_write(path, json.dumps({
                "design_id": batch.design_id,
                "model_id": batch.model_id,
                "outputs": [float(v) for v in batch.outputs],
            }))

    # -- evaluation ----------------------------------------------------------

    def evaluate_design(self, design: DesignMatrix) -> SimulationBatch:
        """Outputs for a design: cache hit charges nothing, a derived view is
        resolved by reordering its parent's outputs, a fresh base design is
        evaluated and charged N."""
        cached = self._cache_load(design)
        if cached is not None:
            return cached
        if design.parent is not None:
            parent_batch = self.evaluate_design(design.parent)
            batch = reorder_outputs(parent_batch, design.row_perm, design_id=design.id)
            self._memory[self._cache_key(design)] = batch
            return batch
        batch = self._run_model(design)
        self.ledger.charge(design.id, design.n, reason="evaluate")
        self._cache_store(design, batch)
        return batch

    def _run_model(self, design: DesignMatrix) -> SimulationBatch:
        if design.space == "unit":
            points = transform_points(design.points, self.spec.marginals)
        else:
            points = design.points
        if self._model is not None:
            outputs = self._model(points)
        else:
            workdir = (self.store_dir / "bridge" if self.store_dir is not None
                       else Path(tempfile.mkdtemp(prefix="sobolkit-bridge-")))
            outputs = external_bridge(self.spec.model.ref, points,
                                      self.spec.input_names, workdir)
        outputs = np.asarray(outputs, float)
        if outputs.shape != (design.n,):
            raise EvaluationError(
                f"model returned shape {outputs.shape}, expected ({design.n},)")
        bad = np.flatnonzero(~np.isfinite(outputs))
        if bad.size:
            raise EvaluationError(
                f"model returned non-finite output at row {int(bad[0])} of {design.id}")
        return SimulationBatch(design_id=design.id, outputs=outputs,
                               model_id=self.spec.model.model_id)


# ---------------------------------------------------------------------------
# campaign directory store
# ---------------------------------------------------------------------------

class CampaignStore:
    """Flat-file persistence for one campaign directory."""

    def __init__(self, root):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "designs").mkdir(exist_ok=True)
        (self.root / "batches").mkdir(exist_ok=True)

    # -- problem / ledger / state ------------------------------------------

    def save_problem(self, spec: ProblemSpec):
        _atomic_write(self.root / "problem.json", json.dumps(spec.to_json(), indent=2))

    def load_problem(self) -> ProblemSpec:
        return load_problem(self.root / "problem.json")

    def save_ledger(self, ledger: BudgetLedger):
        _atomic_write(self.root / "ledger.json", json.dumps(ledger.to_json(), indent=2))

    def load_ledger(self) -> BudgetLedger:
        path = self.root / "ledger.json"
        if not path.exists():
            return BudgetLedger()
        with open(path) as fh:
            return BudgetLedger.from_json(json.load(fh))

    def save_state_blob(self, obj: dict):
        _atomic_write(self.root / "state.json", json.dumps(obj, indent=2))

    def load_state_blob(self) -> dict | None:
        path = self.root / "state.json"
        if not path.exists():
            return None
        with open(path) as fh:
            return json.load(fh)

    # -- designs ---------------------------------------------------------------

    def save_family(self, family: RlhdFamily, names):
        jit = self.root / "designs" / "jitter.csv"
        if not jit.exists():
            write_design_csv(jit, family.jitter.values,
                             [f"u{j + 1}" for j in range(family.d)])
        for name, design in family.members.items():
            self.save_design(design, names, member=name, seed=family.seed)

    def save_design(self, design: DesignMatrix, names, member: str, seed: int = 0):
        write_design_csv(self.root / "designs" / f"{member}.csv", design.points, names)
        sidecar = {
            "id": design.id,
            "space": design.space,
            "seed": seed,
            "base": 0,
            "jitter": "jitter.csv",
        }
        if design.parent is not None:
            sidecar["parent"] = design.parent.id
            sidecar["row_perm"] = (design.row_perm.map - 1).tolist()
        else:
            sidecar["column_perms"] = [(p.map - 1).tolist()
                                       for p in design.column_perms]
        _atomic_write(self.root / "designs" / f"{member}.json",
                      json.dumps(sidecar, indent=2))

    def load_family(self, seed: int) -> RlhdFamily | None:
        jit_path = self.root / "designs" / "jitter.csv"
        if not jit_path.exists():
            return None
        _, jitter_values = read_design_csv(jit_path)
        jitter = JitterArray(values=jitter_values, seed=seed)
        member_perms: dict[str, list[Permutation]] = {}
        uid = None
        for sidecar in sorted((self.root / "designs").glob("*.json")):
            with open(sidecar) as fh:
                meta = json.load(fh)
            if "column_perms" not in meta:
                continue  # derived views are rebuilt on demand
            base = int(meta.get("base", 0))
            member_perms[sidecar.stem] = [
                Permutation(np.asarray(p, dtype=np.int64) + (1 - base))
                for p in meta["column_perms"]]
            if ":" in meta.get("id", ""):
                uid = meta["id"].split(":", 1)[0]
        if not member_perms:
            return None
        n, d = jitter_values.shape
        family = RlhdFamily(n, d, seed, jitter, members={}, uid=uid)
        for name, perms in member_perms.items():
            family.members[name] = build_randomized_lhd(
                perms, jitter, id=f"{family.uid}:{name}")
        return family

    # -- events ------------------------------------------------------------

    def append_event(self, event: dict) -> int:
        path = self.root / "events.jsonl"
        seq = self.event_count()
        event = {"seq": seq, **event}
        with open(path, "a") as fh:
            fh.write(json.dumps(event) + "\n")
        return seq

    def event_count(self) -> int:
        path = self.root / "events.jsonl"
        if not path.exists():
            return 0
        with open(path) as fh:
            return sum(1 for line in fh if line.strip())

    def read_events(self, after: int = -1) -> list[dict]:
        path = self.root / "events.jsonl"
        if not path.exists():
            return []
        out = []
        with open(path) as fh:
            for line in fh:
                if line.strip():
                    ev = json.loads(line)
                    if ev["seq"] > after:
                        out.append(ev)
        return out

    # -- advisory lock -------------------------------------------------------

    def acquire_lock(self):
        path = self.root / ".lock"
        try:
            fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ConfigurationError(
                f"campaign directory {self.root} is locked by another writer "
                f"(remove {path} if that writer is gone)") from None
        with os.fdopen(fd, "w") as fh:
            fh.write(str(os.getpid()))
        return _Lock(path)


class _Lock:
    def __init__(self, path: Path):
        self.path = path

    def release(self):
        if self.path.exists():
            self.path.unlink()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.release()
