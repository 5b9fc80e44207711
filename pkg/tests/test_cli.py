"""CLI wiring: stage artifacts, determinism, exit codes, config precedence."""

import json

import pytest

from provdetect.cli import load_config, main


def write_config(tmp_path, out_dir, **overrides):
    cfg = {
        "dataset_id": "cli-test",
        "seed": 11,
        "out_dir": str(out_dir),
        "views": ["PA"],
        "synth": {"n_processes": 120, "contamination": 0.05},
        "backend": {"kind": "hash", "dim": 64},
        "train": {"epochs": 2, "batch_size": 32, "val_fraction": 0.1},
        "tsne": {"perplexity": 5, "iters": 40, "max_points": 25},
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


def tree_bytes(root):
    return {
        p.relative_to(root).as_posix(): p.read_bytes()
        for p in sorted(root.rglob("*")) if p.is_file()
    }


class TestPipeline:
    def test_end_to_end_artifacts(self, tmp_path):
        out = tmp_path / "run"
        config = write_config(tmp_path, out)
        assert main(["pipeline", "--config", str(config)]) == 0

        for name in (
            "data.jsonl", "corpus_PA.jsonl", "emb_PA.emb", "model_PA.aem",
            "scores_PA_MPNet-AE.csv", "scores_PA_IForest.csv",
            "scores_PA_OC-SVM.csv", "scores_PA_PCA.csv",
        ):
            assert (out / name).exists(), name
        report = out / "report"
        assert (report / "heatmap.csv").exists()
        assert (report / "summary.json").exists()
        assert (report / "tsne.csv").exists()
        header = (report / "heatmap.csv").read_text().splitlines()[0]
        assert header == "dataset,view,MPNet-AE,IForest,OC-SVM,PCA"

    def test_two_runs_byte_identical(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        cfg_a = write_config(tmp_path, out_a)
        assert main(["pipeline", "--config", str(cfg_a)]) == 0
        cfg_b = tmp_path / "config_b.json"
        cfg_b.write_text(json.dumps({**json.loads(cfg_a.read_text()), "out_dir": str(out_b)}))
        assert main(["pipeline", "--config", str(cfg_b)]) == 0
        assert tree_bytes(out_a) == tree_bytes(out_b)

    def test_seed_flag_changes_dataset(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        config = write_config(tmp_path, out_a)
        assert main(["synth", "--config", str(config)]) == 0
        assert main(["synth", "--config", str(config), "--seed", "99",
                     "--out", str(out_b)]) == 0
        assert (out_a / "data.jsonl").read_bytes() != (out_b / "data.jsonl").read_bytes()

    def test_stagewise_equals_pipeline(self, tmp_path):
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        cfg_a = write_config(tmp_path, out_a)
        assert main(["pipeline", "--config", str(cfg_a)]) == 0

        cfg_b = tmp_path / "config_b.json"
        cfg_b.write_text(json.dumps({**json.loads(cfg_a.read_text()), "out_dir": str(out_b)}))
        for stage in ("synth", "textualize", "embed", "train", "score",
                      "baselines", "eval", "tsne"):
            assert main([stage, "--config", str(cfg_b)]) == 0, stage
        assert tree_bytes(out_a) == tree_bytes(out_b)


class TestExitCodes:
    def test_usage_error_is_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["no-such-command"])
        assert exc.value.code == 2

    def test_missing_remote_url_is_2(self, tmp_path, monkeypatch):
        monkeypatch.delenv("PROVDETECT_EMBED_URL", raising=False)
        out = tmp_path / "run"
        config = write_config(tmp_path, out, backend={"kind": "remote", "dim": 64})
        assert main(["synth", "--config", str(config)]) == 0
        assert main(["textualize", "--config", str(config)]) == 0
        assert main(["embed", "--config", str(config)]) == 2

    def test_unreachable_remote_is_1_and_named(self, tmp_path, capsys):
        out = tmp_path / "run"
        config = write_config(tmp_path, out, backend={"kind": "remote", "dim": 64})
        assert main(["synth", "--config", str(config)]) == 0
        assert main(["textualize", "--config", str(config)]) == 0
        code = main(["embed", "--config", str(config), "--url", "http://127.0.0.1:9"])
        assert code == 1
        assert "BackendUnavailable" in capsys.readouterr().err

    def test_bad_config_value_is_1(self, tmp_path, capsys):
        config = write_config(tmp_path, tmp_path / "run",
                              synth={"n_processes": 0, "contamination": 0.0})
        assert main(["synth", "--config", str(config)]) == 1
        assert "InvalidConfig" in capsys.readouterr().err

    def test_missing_artifact_is_1(self, tmp_path):
        config = write_config(tmp_path, tmp_path / "empty")
        # train before synth/embed: the missing artifact surfaces as exit 1
        assert main(["train", "--config", str(config)]) == 1


class TestConfigPrecedence:
    class _Args:
        def __init__(self, **kw):
            self.config = kw.get("config")
            self.seed = kw.get("seed")
            self.view = kw.get("view")
            self.backend = kw.get("backend")
            self.url = kw.get("url")
            self.out = kw.get("out")

    def test_defaults_without_file(self):
        cfg = load_config(None, self._Args())
        assert cfg["views"] == ["PA"]
        assert cfg["backend"]["kind"] == "hash"
        assert cfg["train"]["epochs"] == 15

    def test_file_overrides_defaults(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"views": ["PN"], "train": {"epochs": 3}}))
        cfg = load_config(str(path), self._Args())
        assert cfg["views"] == ["PN"]
        assert cfg["train"]["epochs"] == 3
        assert cfg["train"]["batch_size"] == 128  # untouched default survives

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"views": ["PN"], "seed": 5}))
        cfg = load_config(str(path), self._Args(view="PE", seed=77))
        assert cfg["views"] == ["PE"]
        assert cfg["seed"] == 77

    def test_env_var_supplies_url(self, tmp_path, monkeypatch):
        monkeypatch.setenv("PROVDETECT_EMBED_URL", "http://example:8080")
        cfg = load_config(None, self._Args(backend="remote"))
        assert cfg["backend"]["url"] == "http://example:8080"

    def test_url_flag_beats_env(self, monkeypatch):
        monkeypatch.setenv("PROVDETECT_EMBED_URL", "http://env:1")
        cfg = load_config(None, self._Args(url="http://flag:2"))
        assert cfg["backend"]["url"] == "http://flag:2"
