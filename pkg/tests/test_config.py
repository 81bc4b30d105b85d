import pytest

from hotspots.config import (RunConfig, config_hash, header_line,
                             load_config, parse_flat_config)


def test_defaults():
    cfg = RunConfig()
    assert cfg.solver.terms == 20
    assert cfg.solver.sigma_tol == 1e-5
    assert cfg.solver.boundary_factor == 3
    assert cfg.solver.interior_factor == 3
    assert cfg.solver.exclusion_radius == 1e-3
    assert cfg.sweep.margin == 0.05


def test_parse_flat():
    text = """
    # a comment
    solver.terms = 24
    solver.sigma_tol = 2e-6   # trailing comment
    sweep.resolution = 12
    output_dir = "out"
    """
    d = parse_flat_config(text)
    assert d == {"solver.terms": 24, "solver.sigma_tol": 2e-6,
                 "sweep.resolution": 12, "output_dir": "out"}


def test_with_updates_and_validation():
    cfg = RunConfig().with_updates({"solver.terms": 24,
                                    "analysis.eps_g": 1e-8})
    assert cfg.solver.terms == 24
    assert cfg.analysis.eps_g == 1e-8
    with pytest.raises(KeyError):
        RunConfig().with_updates({"solver.nope": 1})
    with pytest.raises(ValueError):
        RunConfig().with_updates({"solver.sigma_tol": -1.0})


def test_load_config_file_and_env(tmp_path, monkeypatch):
    p = tmp_path / "run.cfg"
    p.write_text("solver.seed = 9\nsweep.margin = 0.06\n")
    cfg = load_config(str(p))
    assert cfg.solver.seed == 9
    assert cfg.sweep.margin == 0.06
    monkeypatch.setenv("HOTSPOTS_SEED", "123")
    cfg = load_config(str(p))
    assert cfg.solver.seed == 123
    # flags win over file and env in the CLI layer
    cfg = load_config(str(p), overrides={"solver.terms": 30})
    assert cfg.solver.terms == 30


def test_hash_stability_and_sensitivity():
    a = RunConfig()
    b = RunConfig()
    assert config_hash(a) == config_hash(b)
    c = a.with_updates({"solver.terms": 21})
    assert config_hash(a) != config_hash(c)
    line = header_line(a)
    assert line.startswith("# config_hash=")
    assert f"seed={a.solver.seed}" in line
