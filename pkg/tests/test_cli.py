import pytest

from optomech_bistab import __version__
from optomech_bistab.cli import main


CONFIG = """
cavity_length_m = 1e-3
finesse = 1.07e4
wavelength_m = 810e-9
power_W = 0.057
mass_kg = 5e-12
mech_freq = 1e7
mech_damping = 100
temperature_K = 0.4
bare_detuning = 2.62e7
freq_convention = cyclic
kappa_override = 1.4e7
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "params.cfg"
    path.write_text(CONFIG)
    return path


def test_optima_output(capsys):
    assert main(["optima"]) == 0
    out = capsys.readouterr().out
    assert "kappa/omega_m" in out
    assert "1.400000" in out
    assert "0.851469" in out  # entanglement Delta_opt for kappa = 1.4
    assert "entanglement max E_N" in out


def test_steady_writes_csv(tmp_path, config_file, capsys):
    code = main(["steady", "--config", str(config_file),
                 "--out", str(tmp_path / "out")])
    assert code == 0
    csv = (tmp_path / "out" / "steady.csv").read_text()
    lines = csv.splitlines()
    assert lines[0].startswith(f"# optomech-bistab v{__version__} ")
    header = next(l for l in lines if not l.startswith("#"))
    assert header == ("P_in_W,branch,q_s,photons,Delta_over_wm,"
                      "G_over_wm,eta,stable")
    out = capsys.readouterr().out
    assert "lower" in out and "middle" in out and "upper" in out


def test_sweep_command(tmp_path, config_file):
    code = main(["sweep", "--config", str(config_file),
                 "--out", str(tmp_path / "out"), "--grid", "5",
                 "--axis1", "eta=0.1:0.9",
                 "--axis2", "effective_detuning=0.5:2.0:3"])
    assert code == 0
    lines = (tmp_path / "out" / "sweep.csv").read_text().splitlines()
    data = [l for l in lines if not l.startswith("#")]
    assert data[0].startswith("Delta_target_over_wm,eta_target,")
    assert len(data) - 1 == 15  # 5 eta x 3 detuning synthetic points


def test_sweep_rejects_unknown_axis(tmp_path, config_file, capsys):
    code = main(["sweep", "--config", str(config_file),
                 "--out", str(tmp_path / "out"),
                 "--axis1", "volume=1:2:3"])
    assert code == 2
    assert "unknown name" in capsys.readouterr().err


def test_sweep_rejects_bad_grid_syntax(tmp_path, config_file, capsys):
    code = main(["sweep", "--config", str(config_file),
                 "--out", str(tmp_path / "out"),
                 "--axis1", "eta=0.1:0.9:3:4"])
    assert code == 2


def test_figure_command_runs(tmp_path, config_file):
    code = main(["figure", "fig2", "--config", str(config_file),
                 "--out", str(tmp_path / "out"), "--grid", "40"])
    assert code == 0
    assert (tmp_path / "out" / "fig2.csv").exists()


def test_figure_rejects_unknown_id(tmp_path, config_file):
    with pytest.raises(SystemExit) as err:
        main(["figure", "fig17", "--config", str(config_file),
              "--out", str(tmp_path / "out")])
    assert err.value.code == 2


def test_missing_config_file(tmp_path, capsys):
    code = main(["steady", "--config", str(tmp_path / "nope.cfg"),
                 "--out", str(tmp_path / "out")])
    assert code == 2
    assert "cannot read" in capsys.readouterr().err


def test_malformed_config(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("finesse = -3\n")
    code = main(["steady", "--config", str(bad),
                 "--out", str(tmp_path / "out")])
    assert code == 2


def test_threads_flag_matches_serial(tmp_path, config_file):
    out1 = tmp_path / "serial"
    out2 = tmp_path / "parallel"
    for out, threads in ((out1, "1"), (out2, "3")):
        code = main(["figure", "fig3a", "--config", str(config_file),
                     "--out", str(out), "--grid", "6",
                     "--threads", threads])
        assert code == 0
    body1 = (out1 / "fig3a.csv").read_text().splitlines()[1:]
    body2 = (out2 / "fig3a.csv").read_text().splitlines()[1:]
    assert body1 == body2


def test_numerical_failure_exit_code(monkeypatch, capsys):
    from optomech_bistab import cli
    from optomech_bistab.errors import UnstableSystemError

    def boom(args):
        raise UnstableSystemError(complex(0.1, 1.0))

    monkeypatch.setitem(cli._COMMANDS, "optima", boom)
    assert main(["optima"]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_validity_threshold_flag(tmp_path, config_file):
    # a permissive threshold flips the validity flag on marginal points
    args = ["sweep", "--config", str(config_file),
            "--axis1", "eta=0.001:0.001:1", "--grid", "1"]
    strict = tmp_path / "strict"
    loose = tmp_path / "loose"
    assert main(args + ["--out", str(strict),
                        "--validity-threshold", "1e-9"]) == 0
    assert main(args + ["--out", str(loose),
                        "--validity-threshold", "1e9"]) == 0

    def flag(path):
        lines = [l for l in (path / "sweep.csv").read_text().splitlines()
                 if not l.startswith("#")]
        header = lines[0].split(",")
        return lines[1].split(",")[header.index("validity_ok")]

    assert flag(strict) == "0"
    assert flag(loose) == "1"
