import json

import numpy as np
import pytest

from conftest import PI_X, PI_W
from sobolkit.cli import main
from sobolkit.runner import read_design_csv

MOD_G_SPEC = {"name": "bench", "n": 64, "seed": 3,
              "model": {"builtin": "mod-g-19-9-4"}}


def write_spec(tmp_path, blob=MOD_G_SPEC):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(blob))
    return str(path)


class TestDesignCommands:
    def test_new_pair_and_z(self, tmp_path, capsys):
        out = tmp_path / "designs"
        assert main(["design", "new", "--n", "16", "--d", "3",
                     "--seed", "4", "--out", str(out)]) == 0
        names, x = read_design_csv(out / "designs" / "X.csv")
        assert names == ["x1", "x2", "x3"] and x.shape == (16, 3)
        assert main(["design", "z", "--dir", str(out), "--index", "2",
                     "--seed", "4"]) == 0
        _, z = read_design_csv(out / "designs" / "Z2.csv")
        assert z.shape == (16, 3)
        # every column still Latin: one point per stratum
        for col in z.T:
            assert sorted(np.floor(col * 16).astype(int)) == list(range(16))

    def test_injected_permutations_reproduce_levels(self, tmp_path):
        perm_file = tmp_path / "perms.json"
        perm_file.write_text(json.dumps({
            "base": 1, "X": [list(c) for c in PI_X], "W": [list(c) for c in PI_W]}))
        out = tmp_path / "worked"
        assert main(["design", "new", "--n", "8", "--d", "2",
                     "--out", str(out), "--perms", str(perm_file)]) == 0
        _, x = read_design_csv(out / "designs" / "X.csv")
        _, w = read_design_csv(out / "designs" / "W.csv")
        assert (np.floor(x * 8).astype(int) + 1).T.tolist() == [list(c) for c in PI_X]
        assert (np.floor(w * 8).astype(int) + 1).T.tolist() == [list(c) for c in PI_W]

    def test_usage_error_exit_code(self, tmp_path):
        assert main(["design", "z", "--dir", str(tmp_path / "void"),
                     "--index", "1"]) == 2


class TestEstimateCommand:
    @pytest.mark.parametrize("kind", ["oracle2", "oracle2-pearson", "oracle1",
                                      "triple-oracle1", "triple-oracle2", "total"])
    def test_kinds_emit_records(self, tmp_path, kind):
        spec = write_spec(tmp_path)
        out = tmp_path / "est.json"
        assert main(["estimate", "--spec", spec, "--kind", kind, "--index", "2",
                     "--replicates", "50", "--out", str(out)]) == 0
        record = json.loads(out.read_text())
        assert record["input"] == 2
        assert set(record) >= {"input", "kind", "value", "ci", "components",
                               "batches_used", "evaluations_charged"}
        assert record["ci"]["lower"] <= record["ci"]["upper"]
        assert record["ci"]["level"] == 0.95 and record["ci"]["B"] == 50

    def test_total_kind_needs_only_two_batches(self, tmp_path):
        spec = write_spec(tmp_path)
        out = tmp_path / "est.json"
        assert main(["estimate", "--spec", spec, "--kind", "total", "--index", "1",
                     "--no-ci", "--out", str(out)]) == 0
        record = json.loads(out.read_text())
        assert record["ledger_total"] == 2 * 64

    def test_unknown_model_is_usage_error(self, tmp_path):
        spec = write_spec(tmp_path, {"name": "x", "n": 8, "seed": 0,
                                     "model": {"builtin": "nope"}})
        assert main(["estimate", "--spec", spec, "--kind", "oracle2",
                     "--index", "1"]) == 2

    def test_bad_index_is_usage_error(self, tmp_path):
        spec = write_spec(tmp_path)
        assert main(["estimate", "--spec", spec, "--kind", "oracle2",
                     "--index", "9"]) == 2


def nuclear_style_spec(tmp_path):
    """14 mixed-marginal inputs bound to an external test double."""
    double = (
        "{exe} -c \"import sys,csv;"
        "rows=[[float(v) for v in r] for r in list(csv.reader(open(sys.argv[1])))[1:]];"
        "open(sys.argv[2],'w').write(chr(10).join(repr(2356.5 - 40*r[0] + 12*r[6] + 30*r[10] + sum(r)) for r in rows))\" "
        "{{input}} {{output}}"
    ).format(exe=__import__("sys").executable)
    inputs = [
        {"name": "SP1QLE", "kind": "log_uniform",
         "params": {"lower": -1.2039728, "upper": 1.0986123}},
        {"name": "SP1CL", "kind": "normal", "params": {"mean": 1.0, "std": 0.04},
         "truncation": {"lower": 0.92, "upper": 1.08}},
        {"name": "P1CLGN", "kind": "uniform", "params": {"lower": 0.8, "upper": 1.2}},
        {"name": "SP1TOI", "kind": "log_normal", "params": {"mean": 0.0, "std": 0.43}},
        {"name": "P1NVGP", "kind": "normal", "params": {"mean": 1.0, "std": 0.075}},
        {"name": "PCNB", "kind": "normal", "params": {"mean": 1.0, "std": 0.22}},
        {"name": "PCFLT", "kind": "log_normal", "params": {"mean": 0.0, "std": 0.35}},
        {"name": "PCFLL", "kind": "log_normal", "params": {"mean": 0.0, "std": 0.35}},
        {"name": "PCNLT", "kind": "log_normal", "params": {"mean": 0.0, "std": 0.35}},
        {"name": "PCNLL", "kind": "log_normal", "params": {"mean": 0.0, "std": 0.35}},
        {"name": "Gap", "kind": "uniform", "params": {"lower": 0.9, "upper": 1.1}},
        {"name": "Tin", "kind": "uniform", "params": {"lower": 54.0, "upper": 56.0}},
        {"name": "Flux", "kind": "uniform", "params": {"lower": 0.985, "upper": 1.015}},
        {"name": "Pout", "kind": "uniform", "params": {"lower": 0.99, "upper": 1.01}},
    ]
    return write_spec(tmp_path, {"name": "ofi", "n": 40, "seed": 11,
                                 "model": {"command": double},
                                 "inputs": inputs})


class TestNuclearStyleShapeContract:
    def test_total_order_record_shape(self, tmp_path):
        spec = nuclear_style_spec(tmp_path)
        out = tmp_path / "table6-row.json"
        assert main(["estimate", "--spec", spec, "--kind", "total", "--index", "7",
                     "--replicates", "80", "--dir", str(tmp_path / "cache"),
                     "--out", str(out)]) == 0
        record = json.loads(out.read_text())
        # the shape of a reported row: estimate with CI bounds and level
        assert record["kind"] == "total_order" and record["input"] == 7
        assert record["ci"]["lower"] <= record["value"] <= record["ci"]["upper"] \
            or record["ci"]["lower"] <= record["ci"]["upper"]
        assert record["ci"]["level"] == 0.95
        assert record["evaluations_charged"] == 2 * 40
        assert record["ledger_total"] == 2 * 40

    def test_triple_oracle1_record_shape(self, tmp_path):
        spec = nuclear_style_spec(tmp_path)
        out = tmp_path / "table5-row.json"
        assert main(["estimate", "--spec", spec, "--kind", "triple-oracle1",
                     "--index", "11", "--replicates", "80",
                     "--dir", str(tmp_path / "cache"),
                     "--out", str(out)]) == 0
        record = json.loads(out.read_text())
        assert record["kind"] == "oracle1_triple"
        assert len(record["components"]) == 3
        assert record["ci"]["B"] == 80
        assert record["ledger_total"] == 3 * 40


class TestCampaignCommands:
    def test_full_cycle(self, tmp_path, capsys):
        spec = write_spec(tmp_path, {"name": "gl", "n": 50, "seed": 7,
                                     "model": {"builtin": "mod-g-lin-eps0.10"}})
        d = str(tmp_path / "camp")
        assert main(["campaign", "init", "--spec", spec, "--dir", d,
                     "--no-ci"]) == 0
        assert main(["campaign", "status", "--dir", d]) == 0
        status = capsys.readouterr().out
        assert "stage: stage1_done" in status and "evaluations: 100" in status
        assert main(["campaign", "auto", "--dir", d, "--max-steps", "2"]) == 0
        assert "evaluations 200" in capsys.readouterr().out
        assert main(["campaign", "exit", "--dir", d]) == 0
        assert main(["campaign", "exit", "--dir", d]) == 4  # already closed

    def test_budget_law_through_cli(self, tmp_path, capsys):
        spec = write_spec(tmp_path, {"name": "gl", "n": 40, "seed": 9,
                                     "model": {"builtin": "mod-g-lin-eps0.10"}})
        d = str(tmp_path / "camp")
        main(["campaign", "init", "--spec", spec, "--dir", d, "--no-ci"])
        main(["campaign", "auto", "--dir", d, "--max-steps", "9"])
        ledger = json.loads((tmp_path / "camp" / "ledger.json").read_text())
        assert ledger["total"] == 40 * (9 + 2)

    def test_step_on_non_candidate_is_invariant_error(self, tmp_path, capsys):
        spec = write_spec(tmp_path)
        d = str(tmp_path / "camp")
        main(["campaign", "init", "--spec", spec, "--dir", d, "--no-ci"])
        assert main(["campaign", "step", "--dir", d, "--index", "3"]) == 4

    def test_lock_blocks_second_writer(self, tmp_path):
        spec = write_spec(tmp_path)
        d = str(tmp_path / "camp")
        main(["campaign", "init", "--spec", spec, "--dir", d, "--no-ci"])
        (tmp_path / "camp" / ".lock").write_text("123")
        assert main(["campaign", "auto", "--dir", d, "--max-steps", "1"]) == 2


class TestBenchCommands:
    def test_rmse(self, tmp_path, capsys):
        out = tmp_path / "rmse.csv"
        assert main(["bench", "rmse", "--model", "mod-g-19-9-4", "--reps", "3",
                     "--seed", "1", "--grid", "60", "--kinds", "oracle2",
                     "--out", str(out)]) == 0
        assert out.exists()

    def test_boxplot(self, tmp_path, capsys):
        out = tmp_path / "box.csv"
        assert main(["bench", "boxplot", "--model", "mod-g-lin-eps0.10",
                     "--n", "50", "--reps", "5", "--seed", "1",
                     "--out", str(out)]) == 0
        assert "flagged fraction" in capsys.readouterr().out

    def test_crossover(self, tmp_path, capsys):
        out = tmp_path / "cross.csv"
        assert main(["bench", "crossover", "--targets", "0.2", "0.8",
                     "--n", "100", "--reps", "50", "--seed", "1",
                     "--out", str(out)]) == 0
        assert out.exists()
