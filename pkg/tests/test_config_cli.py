import numpy as np
import pytest

from hystkit import load_config
from hystkit.cli import main

FULL_CONFIG = """
[material]
steepness = 50.0
saturation = 1.54
chi = 0, 20, 40
weight = 0.5

[protocol]
kind = multi-amplitude-sine
amplitude = 100, 200
steps_per_period = 64
periods = 2
direction = forward

[solver]
epsilon = 1e-9
grad_tol = 1e-9

[fem]
limb_width = 0.02
i_max = 90
probes = P1:0:0, P2:0.05:0.001
"""


def test_load_full_config(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text(FULL_CONFIG)
    cfg = load_config(p)
    assert cfg.material.n_sites == 3
    assert np.allclose(cfg.material.chi, [0.0, 20.0, 40.0])
    assert np.allclose(cfg.material.weight, 0.5)
    assert cfg.material.sites[0].steepness == 50.0
    assert cfg.protocol.kind == "multi-amplitude-sine"
    assert cfg.protocol.amplitudes == (100.0, 200.0)
    assert cfg.protocol.periods == 2
    assert cfg.solver.epsilon == 1e-9
    assert cfg.fem.geometry.limb_width == 0.02
    assert cfg.fem.i_max == 90.0
    assert cfg.fem.probes == {"P1": (0.0, 0.0), "P2": (0.05, 0.001)}
    assert cfg.has_material


def test_defaults_from_empty_config(tmp_path):
    p = tmp_path / "empty.ini"
    p.write_text("")
    cfg = load_config(p)
    assert cfg.material.n_sites == 1
    assert cfg.material.chi[0] == 71.0
    assert cfg.protocol.kind == "uniaxial-sine"
    assert cfg.solver.epsilon == 1e-8
    assert not cfg.has_material


def test_weight_length_mismatch(tmp_path):
    p = tmp_path / "bad.ini"
    p.write_text("[material]\nchi = 1, 2, 3\nweight = 0.5, 0.5\n")
    with pytest.raises(ValueError):
        load_config(p)


def test_cli_loop_and_replay(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[protocol]\namplitude = 180\nsteps_per_period = 32\nperiods = 1\n")
    out = tmp_path / "trace.csv"
    assert main(["loop", "--config", str(cfg), "--out", str(out)]) == 0
    text = out.read_text()
    assert text.splitlines()[0] == "step,t,Hx,Hy,Bx,By,Jx,Jy"
    assert len(text.splitlines()) == 33


def test_cli_loop_multi_amplitude(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[protocol]\nkind = multi-amplitude-sine\n"
                   "amplitude = 100, 200\nsteps_per_period = 16\nperiods = 1\n")
    out = tmp_path / "trace.csv"
    assert main(["loop", "--config", str(cfg), "--out", str(out)]) == 0
    assert (tmp_path / "trace-Hm100.csv").exists()
    assert (tmp_path / "trace-Hm200.csv").exists()


def test_cli_bench(tmp_path):
    out = tmp_path / "bench.csv"
    code = main(["bench", "--nchi", "2,3", "--out", str(out),
                 "--steps", "16", "--points", "4", "--reps", "1"])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "nchi,dir,time_ms,iters"
    assert len(lines) == 5


def test_cli_check_small(capsys):
    code = main(["check", "--pairs", "3"])
    out = capsys.readouterr().out
    assert code == 0
    assert "PASS" in out
    assert "FAIL" not in out


def test_cli_fem_small(tmp_path):
    cfg = tmp_path / "fem.ini"
    cfg.write_text("""
[fem]
mesh_core = 0.012
mesh_air = 0.05
i_max = 90
steps_per_period = 4
probes = C6:0:0
""")
    out = tmp_path / "probes.csv"
    mesh_out = tmp_path / "mesh.txt"
    code = main(["fem", "--config", str(cfg), "--formulation", "scalar",
                 "--out", str(out), "--mesh-out", str(mesh_out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "step,t,Is,probe,Hx,Hy,Bx,By"
    assert len(lines) == 5
    head = mesh_out.read_text().splitlines()[0].split()
    assert head[0] == "nodes" and head[2] == "triangles"
