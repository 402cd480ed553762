"""Command-line interface, exit codes and report determinism."""
import json

import pytest

from qaclab.circuit import CircuitBuilder, cnot, dumps as circuit_dumps
from qaclab.cli import EXIT_FAIL, EXIT_IO, EXIT_OK, EXIT_USAGE, main
from qaclab.experiments import VERIFIERS, ExperimentConfig, report_bundle, run_verification


@pytest.fixture
def cnot_file(tmp_path):
    path = tmp_path / "cnot.json"
    path.write_text(circuit_dumps(CircuitBuilder(1, 1, output=1).layer(cnot(0, 1)).build()))
    return path


class TestCommands:
    def test_fourier(self, cnot_file, capsys):
        assert main(["fourier", str(cnot_file), "--level", "1"]) == EXIT_OK
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "mask,size,coefficient"
        assert out[2] == "1,1,1"
        assert out[-1] == "W>=1,1"

    @pytest.mark.parametrize("named,value", [("cat:3", 1.0), ("w:5", 0.0), ("eps:2,0.5", 0.5), ("oddmix:4", 0.25)])
    def test_felinity_named(self, named, value, capsys):
        assert main(["felinity", "--named", named]) == EXIT_OK
        assert float(capsys.readouterr().out) == pytest.approx(value, abs=1e-12)

    def test_felinity_state_file(self, tmp_path, capsys):
        path = tmp_path / "s.json"
        path.write_text(json.dumps({"n": 1, "amplitudes": [[0.6, 0], [0.8, 0]]}))
        assert main(["felinity", "--state", str(path)]) == EXIT_OK
        assert float(capsys.readouterr().out) == pytest.approx(4 * 0.36 * 0.64)

    def test_verify_list(self, capsys):
        assert main(["verify", "--list"]) == EXIT_OK
        out = capsys.readouterr().out
        assert all(k in out for k in VERIFIERS)

    def test_verify_writes_report(self, tmp_path, capsys):
        assert main(["verify", "fel-par", "--n", "3", "--seed", "7", "--out", str(tmp_path)]) == EXIT_OK
        data = json.loads((tmp_path / "fel-par-seed7.json").read_text())
        assert data["passed"] and data["seed"] == 7

    def test_verify_failure_exit(self, capsys):
        # a 1e-30 tolerance cannot be met in floating point
        assert main(["verify", "fel-par", "--n", "3", "--tol", "1e-30"]) == EXIT_FAIL

    def test_majority(self, tmp_path, capsys):
        csv = tmp_path / "maj.csv"
        assert main(["majority", "--n", "63", "--a", "2", "--d", "4", "--csv", str(csv)]) == EXIT_OK
        assert csv.read_text().startswith("n,t_or_design,l,probability")

    def test_weak_copy(self, capsys):
        assert main(["weak-copy", "--n", "4", "--t", "2"]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["passed"]


class TestExitCodes:
    def test_unknown_lemma(self, capsys):
        assert main(["verify", "no-such-id"]) == EXIT_USAGE

    def test_missing_lemma(self, capsys):
        assert main(["verify"]) == EXIT_USAGE

    def test_bad_named_state(self, capsys):
        assert main(["felinity", "--named", "cat"]) == EXIT_USAGE

    def test_missing_file(self, tmp_path, capsys):
        assert main(["fourier", str(tmp_path / "absent.json")]) == EXIT_IO

    def test_malformed_circuit(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"n_inputs": 1}))
        assert main(["fourier", str(path)]) == EXIT_USAGE

    def test_argparse_usage(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["majority"])
        assert exc.value.code == 2

    def test_empty_report(self, tmp_path, capsys):
        assert main(["report", "--out", str(tmp_path)]) == EXIT_OK
        assert json.loads((tmp_path / "summary.json").read_text())["runs"] == 0


class TestDeterminism:
    @pytest.mark.parametrize("lemma", ["fel-par", "clean-comp", "monotone", "post-process"])
    def test_same_seed_same_bytes(self, lemma):
        cfg = ExperimentConfig(lemma, n=3, seed=11, count=5)
        assert run_verification(cfg).to_json() == run_verification(cfg).to_json()

    def test_bundle_is_reproducible(self, tmp_path):
        cfgs = [ExperimentConfig("fel-par", n=2, seed=3, count=3), ExperimentConfig("partition", n=8, k=4, seed=1)]
        report_bundle(cfgs, tmp_path / "a", tables=False)
        report_bundle(cfgs, tmp_path / "b", tables=False)
        for name in ("00-fel-par.json", "01-partition.json", "summary.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    @pytest.mark.parametrize("lemma", sorted(VERIFIERS))
    def test_every_verifier_passes_small(self, lemma):
        small = {"approx-t": dict(n=64, t=32, a=2), "majority-corr": dict(n=63, a=2, d=4)}
        cfg = ExperimentConfig(lemma, seed=0, **small.get(lemma, {}))
        rep = run_verification(cfg)
        assert rep.passed, rep.failures()
