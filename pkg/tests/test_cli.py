from __future__ import annotations

import csv
import json

import numpy as np
import pytest

from bgsl.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_SAMPLER, RunConfig, load_config, main
from bgsl.synthdata import Dataset, EnsembleSpec, make_dataset

FAST = {"seed": 3, "depth": 20, "data": {"n": 8, "n_train": 4, "n_test": 3},
        "hmc": {"n_chains": 2, "n_warmup": 30, "n_samples": 20}}


def write_config(path, **over):
    obj = json.loads(json.dumps(FAST))
    obj.update(over)
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture()
def run(tmp_path, monkeypatch):
    monkeypatch.setenv("BGSL_THREADS", "1")
    cfg = write_config(tmp_path / "cfg.json", out=str(tmp_path / "out"))

    def _run(*args):
        return main([args[0], "--config", cfg, *args[1:]])
    return _run


def test_gen_fit_predict_pipeline(run, tmp_path):
    out = tmp_path / "out"
    assert run("gen") == EXIT_OK
    assert Dataset.load(out / "train.json").T == 4
    assert run("fit") == EXIT_OK
    with (out / "posterior.csv").open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["chain", "draw", "theta", "delta", "b"] and len(rows) == 41
    diag = json.loads((out / "posterior.json").read_text())["diagnostics"]
    assert set(diag) == {"theta", "delta", "b"}
    assert run("eval") == EXIT_OK
    metrics = json.loads((out / "metrics.json").read_text())
    assert set(metrics["correlation"]) == {"overall", "true_positive", "true_negative"}
    for name in ("reliability.csv", "edges.csv", "gen_config.json", "fit_config.json", "eval_config.json"):
        assert (out / name).exists()


def test_fit_is_deterministic(run, tmp_path):
    out = tmp_path / "out"
    run("gen")
    run("fit")
    first = (out / "posterior.csv").read_bytes()
    run("fit")
    assert (out / "posterior.csv").read_bytes() == first


def test_resolved_config_reproduces_outputs(run, tmp_path):
    out = tmp_path / "out"
    run("gen", "--seed", "11")
    before = (out / "train.json").read_bytes()
    resolved = load_config(out / "gen_config.json")
    assert resolved.seed == 11
    (out / "train.json").unlink()
    assert main(["gen", "--config", str(out / "gen_config.json")]) == EXIT_OK
    assert (out / "train.json").read_bytes() == before


def test_map_flag(run, tmp_path):
    run("gen")
    assert run("fit", "--map") == EXIT_OK
    est = json.loads((tmp_path / "out" / "map.json").read_text())
    assert est["theta"] > 0 and est["delta"] > 0 and est["b"] > 0
    assert not (tmp_path / "out" / "posterior.csv").exists()


def test_perfect_posterior_scores_zero_error(tmp_path):
    out = tmp_path / "o"
    out.mkdir()
    test = make_dataset(EnsembleSpec("ER", 1.0, 6), 3, np.random.default_rng(0))
    assert np.all(test.a == 1)
    test.save(out / "test.json")
    with (out / "posterior.csv").open("w") as fh:
        fh.write("chain,draw,theta,delta,b\n")
        for i in range(4):
            fh.write(f"0,{i},0.001,1e9,1e-9\n")
    assert main(["eval", "--out", str(out), "--depth", "20"]) == EXIT_OK
    m = json.loads((out / "metrics.json").read_text())
    assert m["error_mean"] == 0.0 and m["ece"] == 0.0


def test_check_sweep_scale(run, tmp_path):
    out = tmp_path / "out"
    run("gen")
    assert run("check", "--stage", "prior") == EXIT_OK
    bands = json.loads((out / "check_prior_summary.json").read_text())["band_fractions"]
    assert "[0.75,1]" in bands
    assert run("sweep") == EXIT_OK
    with (out / "sweep.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    dens = [float(r["density_mean"]) for r in rows]
    assert all(b <= a for a, b in zip(dens, dens[1:]))
    assert run("scale", "--anchor", "n=20,theta=1,delta=2", "--targets", "50,100,200") == EXIT_OK
    with (out / "scale.csv").open() as fh:
        table = list(csv.reader(fh))
    assert len(table) == 4 and len(table[0]) >= 4


def test_exit_codes(tmp_path, run):
    assert main(["gen", "--out", str(tmp_path), "--depth", "0"]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"nonsense": 1}))
    assert main(["gen", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["fit", "--out", str(tmp_path / "empty")]) == EXIT_IO
    assert main(["scale", "--out", str(tmp_path), "--anchor", "q=1"]) == EXIT_CONFIG


def test_sampler_failure_exit_code(run, monkeypatch):
    import bgsl.cli as cli
    from bgsl.bayes import SamplerError

    def boom(*a, **k):
        raise SamplerError("every post-warmup transition diverged")
    run("gen")
    monkeypatch.setattr(cli, "fit_posterior", boom)
    assert run("fit") == EXIT_SAMPLER


def test_toml_config(tmp_path):
    path = tmp_path / "c.toml"
    path.write_text('seed = 5\ndepth = 30\n[data]\nensemble = "ER:1/2"\nn = 10\n[hmc]\nn_chains = 2\n')
    cfg = load_config(path)
    assert isinstance(cfg, RunConfig) and cfg.seed == 5 and cfg.data.n == 10
    assert cfg.hmc_config().n_chains == 2
