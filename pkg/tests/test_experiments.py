import numpy as np
import pytest

from sdnapl import experiments
from sdnapl.experiments import ExperimentConfig, ScenarioStats


def small(tmp_path=None, **kw):
    base = dict(m=8, n=10, betas=[1, 3], taus=[2, 3], realizations=2, requests=6, inter="er:0.4", seed=7)
    if tmp_path is not None:
        base["out_dir"] = str(tmp_path)
    base.update(kw)
    return ExperimentConfig(**base)


def test_config_validation():
    for bad in (dict(realizations=0), dict(requests=0), dict(betas=[0]), dict(taus=[0])):
        with pytest.raises(ValueError):
            small(**bad)


def test_from_mapping_aliases_and_unknown_keys():
    cfg = ExperimentConfig.from_mapping({"beta": "1, 4", "tau": "2", "R": "3", "S": "4", "exact": "true"})
    assert cfg.betas == [1, 4] and cfg.taus == [2] and cfg.realizations == 3 and cfg.requests == 4
    assert cfg.exact is True
    with pytest.raises(ValueError, match="unknown config keys: nope"):
        ExperimentConfig.from_mapping({"nope": 1})


def test_read_config_file(tmp_path):
    f = tmp_path / "c.cfg"
    f.write_text("# comment\nm = 12\n\nbeta=1,2  # sweep\n")
    assert experiments.read_config_file(f) == {"m": "12", "beta": "1,2"}
    f.write_text("m 12\n")
    with pytest.raises(ValueError):
        experiments.read_config_file(f)


def test_run_shapes_and_pairing():
    cfg = small()
    stats = experiments.run(cfg)
    assert len(stats) == len(cfg.betas) * len(cfg.scenarios)
    for beta in cfg.betas:
        rows = {s.scenario: s for s in stats if s.beta == beta}
        assert all(r.sample_count == 12 and r.std_error >= 0 for r in rows.values())
        cs = rows["CS"].samples
        for r in rows.values():
            assert np.all(cs <= r.samples)


def test_run_is_deterministic():
    a = experiments.run(small(realizations=1, requests=1))
    b = experiments.run(small(realizations=1, requests=1))
    assert [experiments.format_row(s) for s in a] == [experiments.format_row(s) for s in b]


def test_parallel_matches_serial():
    a = experiments.run(small(workers=1))
    b = experiments.run(small(workers=2))
    assert [experiments.format_row(s) for s in a] == [experiments.format_row(s) for s in b]


def test_requests_are_cross_domain():
    reqs = experiments.draw_requests(3, 4, 200, np.random.default_rng(0))
    assert all(r.src[0] != r.dst[0] for r in reqs)


def test_relative_error():
    s = ScenarioStats("MS", 1, 10.0, 0.1, 5, 12.0)
    assert s.relative_error == pytest.approx(0.2)


def test_files_roundtrip(tmp_path):
    cfg = small(tmp_path)
    results, summary, stats = experiments.run_to_files(cfg)
    assert results.read_text().splitlines()[0] == experiments.RESULTS_HEADER
    back = experiments.read_results(results)
    assert [(s.beta, s.scenario) for s in back] == [(s.beta, s.scenario) for s in stats]
    assert back[0].simulated_mean == pytest.approx(stats[0].simulated_mean, abs=1e-6)
    assert "Diminishing returns" in summary.read_text()


def test_failure_leaves_marker(tmp_path, monkeypatch):
    real = experiments.simulate
    calls = []

    def flaky(config, beta):
        calls.append(beta)
        if len(calls) == 2:
            raise RuntimeError("disk on fire")
        return real(config, beta)

    monkeypatch.setattr(experiments, "simulate", flaky)
    with pytest.raises(RuntimeError):
        experiments.run_to_files(small(tmp_path))
    lines = (tmp_path / "results.csv").read_text().splitlines()
    assert lines[-1].startswith("# FAILED: RuntimeError")
    assert len(lines) == 2 + len(small().scenarios)


def test_summarize_single_scenario():
    text = experiments.summarize([ScenarioStats("SS", 1, 5.0, 0.1, 10, 5.5)])
    row = [l for l in text.splitlines() if " SS " in l][0]
    assert row.rstrip().endswith("0.100")  # rel_err is the last filled column
    with pytest.raises(ValueError):
        experiments.summarize([])


def test_reduction_table():
    rows = [ScenarioStats("MS", 1, 10.0, 0, 1, 0), ScenarioStats("CS", 1, 4.0, 0, 1, 0)]
    assert experiments.reduction_table(rows) == {1: {"CS": pytest.approx(60.0)}}


def test_pmf_source_is_used_verbatim(tmp_path):
    f = tmp_path / "deg.txt"
    f.write_text("1,0.5\n3,0.5\n")
    cfg = small(intra=f"pmf:{f}")
    p = experiments.model_params(cfg, 2)
    assert p.intra_degree.as_dict() == {1: 0.5, 3: 0.5}
