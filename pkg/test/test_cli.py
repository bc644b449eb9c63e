# =====================================================
# test/test_cli.py
# =====================================================
"""
Test del CLI: exit code, artefatti e output su stdout.
"""

import json

import pytest

from src.cli import EXIT_CONFIG, EXIT_OK, EXIT_STAGE_FAILED, main
from src.services.reporting import load_report


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("GORE_REGISTRY_URL", "GORE_OUT_DIR", "GORE_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def mock_config(data_dir):
    return str(data_dir / "mock" / "london_ambulance.config.json")


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "runs"


def run_dirs(out_dir):
    return sorted(p for p in out_dir.iterdir() if p.is_dir())


def cli(mock_config, out_dir, *args, registry=False):
    argv = ["--config", mock_config, "--out-dir", str(out_dir)]
    if not registry:
        argv.append("--no-registry")
    return main(argv + list(args))


class TestRunCommand:

    def test_run(self, mock_config, out_dir, capsys):
        code = cli(mock_config, out_dir, "run", "london_ambulance", registry=True)

        assert code == EXIT_OK
        stdout = capsys.readouterr().out
        assert "completed" in stdout
        assert "actors=4 HL=2 LL=10 api_mappings=0" in stdout
        assert (out_dir / "runs.db").exists()
        assert len(run_dirs(out_dir)) == 1

    def test_overrides_reach_manifest(self, mock_config, out_dir):
        code = cli(mock_config, out_dir, "run", "london_ambulance", "--strategy", "one-shot", "--critic", "off",
                   "--keep", "best", "--max-iterations", "2")

        manifest = json.loads((run_dirs(out_dir)[0] / "manifest.json").read_text(encoding="utf-8"))
        assert code == EXIT_OK
        assert (manifest["strategy"], manifest["critic_enabled"]) == ("one-shot", False)
        assert (manifest["keep"], manifest["max_iterations"]) == ("best", 2)

    def test_unknown_dataset(self, mock_config, out_dir, capsys):
        code = cli(mock_config, out_dir, "run", "atlantis", registry=True)

        assert code == EXIT_CONFIG
        assert "atlantis" in capsys.readouterr().err
        assert not out_dir.exists()

    def test_invalid_threshold(self, mock_config, out_dir):
        assert cli(mock_config, out_dir, "run", "london_ambulance", "--threshold", "11") == EXIT_CONFIG

    def test_stage_failure(self, data_dir, tmp_path, out_dir):
        script = json.loads((data_dir / "mock" / "london_ambulance.generator.json").read_text(encoding="utf-8"))
        (tmp_path / "gen.json").write_text(json.dumps(script[:1]), encoding="utf-8")
        config = tmp_path / "config.json"
        config.write_text(json.dumps({
            "providers": {"generator": {"kind": "mock", "script": "gen.json"}},
            "loop": {"critic_enabled": False},
        }), encoding="utf-8")

        code = main(["--config", str(config), "--out-dir", str(out_dir), "--no-registry", "run", "london_ambulance"])

        assert code == EXIT_STAGE_FAILED

    def test_matrix(self, mock_config, out_dir, capsys):
        code = cli(mock_config, out_dir, "run", "london_ambulance", "--matrix")

        assert code == EXIT_OK
        assert len(run_dirs(out_dir)) == 6
        assert capsys.readouterr().out.count("completed") == 6

    def test_replay_with_matrix_rejected(self, mock_config, out_dir, tmp_path):
        transcript = tmp_path / "t.jsonl"
        transcript.write_text("", encoding="utf-8")

        assert cli(mock_config, out_dir, "--replay", str(transcript), "run", "london_ambulance", "--matrix") == EXIT_CONFIG

    def test_replay(self, mock_config, out_dir):
        main(["--config", mock_config, "--out-dir", str(out_dir), "--no-registry", "--record",
              "run", "london_ambulance"])
        recorded = run_dirs(out_dir)[0]

        code = main(["--config", mock_config, "--out-dir", str(out_dir), "--no-registry",
                     "--replay", str(recorded / "transcript.jsonl"), "run", "london_ambulance"])

        assert code == EXIT_OK
        replayed = [d for d in run_dirs(out_dir) if d != recorded][0]
        assert (replayed / "goal_model.json").read_bytes() == (recorded / "goal_model.json").read_bytes()

    def test_missing_command(self):
        with pytest.raises(SystemExit):
            main([])


class TestEvaluationCommands:

    def test_evaluate_report_and_ablate(self, mock_config, out_dir, tmp_path, capsys):
        cli(mock_config, out_dir, "run", "london_ambulance")
        cli(mock_config, out_dir, "run", "london_ambulance", "--critic", "off")
        manifests = {
            d: json.loads((d / "manifest.json").read_text(encoding="utf-8")) for d in run_dirs(out_dir)
        }
        on = next(d for d, m in manifests.items() if m["critic_enabled"])
        off = next(d for d, m in manifests.items() if not m["critic_enabled"])
        capsys.readouterr()

        assert cli(mock_config, out_dir, "evaluate", str(on), "--output", str(tmp_path / "a.json")) == EXIT_OK
        assert cli(mock_config, out_dir, "evaluate", str(off), "--output", str(tmp_path / "b.json")) == EXIT_OK
        evaluated = capsys.readouterr().out
        assert "Results (critic on, 1 dataset, generated-recall convention)" in evaluated
        assert load_report(tmp_path / "a.json").rows[0].metrics.f1 == pytest.approx(1.0)

        assert main(["report", str(tmp_path / "a.json"), "--per-dataset", "--task", "LL"]) == EXIT_OK
        assert "Per-dataset results (LL, FS, critic on)" in capsys.readouterr().out

        assert main(["ablate", str(tmp_path / "a.json"), str(tmp_path / "b.json")]) == EXIT_OK
        ablation = capsys.readouterr().out.splitlines()
        assert len(ablation) == 2 + 9
        assert all(line.endswith("0.00") for line in ablation[2:])

    @pytest.fixture
    def registered_pair(self, mock_config, out_dir):
        """Run registrate con e senza critic, già valutate"""
        cli(mock_config, out_dir, "run", "london_ambulance", registry=True)
        cli(mock_config, out_dir, "run", "london_ambulance", "--critic", "off", registry=True)
        manifests = {
            d: json.loads((d / "manifest.json").read_text(encoding="utf-8")) for d in run_dirs(out_dir)
        }
        on = next(d for d, m in manifests.items() if m["critic_enabled"])
        off = next(d for d, m in manifests.items() if not m["critic_enabled"])
        assert cli(mock_config, out_dir, "evaluate", str(on), str(off), registry=True) == EXIT_OK
        return on, off

    def test_ablate_single_mixed_report(self, mock_config, out_dir, tmp_path, registered_pair, capsys):
        on, off = registered_pair
        mixed = tmp_path / "mixed.json"
        cli(mock_config, out_dir, "evaluate", str(on), str(off), "--output", str(mixed))
        capsys.readouterr()

        assert main(["ablate", str(mixed)]) == EXIT_OK

        ablation = capsys.readouterr().out.splitlines()
        assert len(ablation) == 2 + 9
        assert all(line.endswith("0.00") for line in ablation[2:])

    def test_ablate_rejects_swapped_reports(self, mock_config, out_dir, tmp_path, registered_pair, capsys):
        on, off = registered_pair
        cli(mock_config, out_dir, "evaluate", str(on), "--output", str(tmp_path / "a.json"))
        cli(mock_config, out_dir, "evaluate", str(off), "--output", str(tmp_path / "b.json"))
        capsys.readouterr()

        assert main(["ablate", str(tmp_path / "b.json"), str(tmp_path / "a.json")]) == EXIT_CONFIG
        assert "critic-on rows only" in capsys.readouterr().err

    def test_ablate_from_registry(self, mock_config, out_dir, registered_pair, capsys):
        capsys.readouterr()

        code = cli(mock_config, out_dir, "ablate", "--dataset", "london_ambulance", registry=True)

        assert code == EXIT_OK
        ablation = capsys.readouterr().out.splitlines()
        assert len(ablation) == 2 + 9
        assert [line.split()[1] for line in ablation[2::3]] == ["Actors", "HL", "LL"]
        assert all(line.endswith("0.00") for line in ablation[2:])

    def test_ablate_from_registry_without_pairs(self, mock_config, out_dir, capsys):
        cli(mock_config, out_dir, "run", "london_ambulance", registry=True)

        code = cli(mock_config, out_dir, "ablate", "--dataset", "london_ambulance", registry=True)

        assert code == EXIT_CONFIG
        assert "london_ambulance" in capsys.readouterr().err

    def test_ablate_dataset_needs_registry(self, mock_config, out_dir):
        assert cli(mock_config, out_dir, "ablate", "--dataset", "london_ambulance") == EXIT_CONFIG

    def test_ablate_without_inputs(self):
        assert main(["ablate"]) == EXIT_CONFIG

    def test_report_unknown_strategy(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["report", str(tmp_path / "r.json"), "--per-dataset", "--strategy", "XX"])

        assert exc.value.code == 2

    def test_report_missing_file(self, tmp_path):
        assert main(["report", str(tmp_path / "absent.json")]) == EXIT_CONFIG

    def test_evaluate_missing_run(self, mock_config, out_dir, tmp_path):
        assert cli(mock_config, out_dir, "evaluate", str(tmp_path / "nope")) == EXIT_CONFIG


class TestShotSimilarityCommand:

    def test_selected_datasets(self, mock_config, out_dir, tmp_path, capsys):
        code = cli(mock_config, out_dir, "shot-sim", "--datasets", "london_ambulance", "gestao_hospital",
                   "--output", str(tmp_path / "shots.json"))

        assert code == EXIT_OK
        data = json.loads((tmp_path / "shots.json").read_text(encoding="utf-8"))
        assert {r["dataset_id"] for r in data["rows"]} == {"london_ambulance", "gestao_hospital"}
        assert "Average per Task" in capsys.readouterr().out

    def test_unknown_dataset(self, mock_config, out_dir):
        assert cli(mock_config, out_dir, "shot-sim", "--datasets", "atlantis") == EXIT_CONFIG
