"""CLI: config parsing, subcommands, exit codes and output determinism."""

import io
import json

import numpy as np
import pytest

from trawlsim import cli


ACF_TOML = """
name = "acf-demo"
kind = "acf"
num_paths = 2000
n_list = [3]

[seed]
family = "poisson"
intensity = 1.0

[trawl]
family = "exponential"
lambda = 1.0

[delta_rule]
c = 0.5
p = 0.5
"""


def write(tmp_path, text, name="scenario.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# --- config building ----------------------------------------------------------

def test_build_seed_families():
    assert cli.build_seed({"family": "poisson", "intensity": 2.0}).intensity == 2.0
    assert cli.build_seed({"family": "gaussian", "b": 2.0}).b == 2.0
    s = cli.build_seed({"family": "stable", "beta": 1.5, "k_plus": 1.0,
                        "k_minus": 0.5})
    assert s.beta == 1.5
    cp = cli.build_seed({"family": "compound_poisson", "rate": 1.0,
                         "jumps": {"kind": "normal", "std": 2.0}})
    assert cp.intensity == 1.0


def test_build_seed_errors_carry_field_paths():
    with pytest.raises(cli.ConfigError, match="family"):
        cli.build_seed({"family": "weird"})
    with pytest.raises(cli.ConfigError, match="missing field intensity"):
        cli.build_seed({"family": "poisson"})
    with pytest.raises(cli.ConfigError, match="jumps.kind"):
        cli.build_seed({"family": "compound_poisson", "rate": 1.0,
                        "jumps": {"kind": "bad"}})


def test_build_trawl_families_and_errors():
    assert cli.build_trawl({"family": "exponential", "lambda": 2.0}).lam == 2.0
    assert cli.build_trawl({"family": "power_law", "kappa": 2.5}).kappa == 2.5
    kt = cli.build_trawl({"family": "kernel_exponential", "lambda": 1.0})
    assert float(kt.tail(0.0)) == pytest.approx(0.5, abs=1e-6)
    with pytest.raises(cli.ConfigError, match="missing field kappa"):
        cli.build_trawl({"family": "power_law"})
    with pytest.raises(cli.ConfigError, match="family"):
        cli.build_trawl({"family": "nope"})


def test_load_scenario_validation(tmp_path):
    bad = write(tmp_path, ACF_TOML.replace("n_list = [3]", "n_list = [4, 2]"))
    with pytest.raises(cli.ConfigError, match="n_list"):
        cli.load_scenario(bad, {})
    bad2 = write(tmp_path, ACF_TOML.replace("num_paths = 2000",
                                            "num_paths = 0"), "b2.toml")
    with pytest.raises(cli.ConfigError, match="num_paths"):
        cli.load_scenario(bad2, {})
    notoml = write(tmp_path, "kind = [unclosed", "b3.toml")
    with pytest.raises(cli.ConfigError, match="TOML"):
        cli.load_scenario(notoml, {})


# --- CSV emission -------------------------------------------------------------

def test_emit_plotdata_empty_report():
    buf = io.StringIO()
    cli.emit_plotdata([], buf)
    assert buf.getvalue() == cli.CSV_HEADER + "\n"


def test_emit_plotdata_rows_and_roundtrip():
    rows = [{"scenario": "s", "n": 4, "delta": 0.25, "metric": f"m{i}",
             "value": 1.0 / 3.0, "se": 0.01, "target": 0.3333,
             "pass": True} for i in range(3)]
    buf = io.StringIO()
    cli.emit_plotdata(rows, buf)
    lines = buf.getvalue().strip().split("\n")
    assert len(lines) == 4
    fields = lines[1].split(",")
    assert float(fields[4]) == pytest.approx(1.0 / 3.0, rel=1e-11)
    assert fields[7] == "true"


# --- subcommands --------------------------------------------------------------

def test_verify_success_and_outputs(tmp_path):
    scen = write(tmp_path, ACF_TOML)
    out = str(tmp_path / "report")
    rc = cli.main(["verify", scen, "--out", out])
    assert rc == 0
    csv = (tmp_path / "report.csv").read_text()
    assert csv.startswith(cli.CSV_HEADER)
    assert csv.count("\n") == 4                     # header + 3 lag rows
    doc = json.loads((tmp_path / "report.json").read_text())
    assert doc["schema"] == 1
    assert doc["pass"] is True
    assert len(doc["rows"]) == 3


def test_verify_thread_count_never_changes_bytes(tmp_path):
    scen = write(tmp_path, ACF_TOML)
    outputs = []
    for threads in (1, 4, 8):
        out = str(tmp_path / f"r{threads}")
        assert cli.main(["verify", scen, "--out", out,
                         "--threads", str(threads)]) == 0
        outputs.append((tmp_path / f"r{threads}.csv").read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_verify_seed_override_changes_results(tmp_path):
    scen = write(tmp_path, ACF_TOML)
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    cli.main(["verify", scen, "--out", a, "--seed", "1"])
    cli.main(["verify", scen, "--out", b, "--seed", "2"])
    assert (tmp_path / "a.csv").read_bytes() != (tmp_path / "b.csv").read_bytes()


def test_verify_metric_failure_exits_one(tmp_path):
    failing = """
name = "fail-demo"
kind = "short_memory"
num_paths = 200
n_list = [16, 64]

[seed]
family = "poisson"
intensity = 1.0

[trawl]
family = "exponential"
lambda = 1.0

[tolerances]
ks = 1e-9
"""
    scen = write(tmp_path, failing)
    assert cli.main(["verify", scen]) == 1


def test_verify_config_error_exits_two(tmp_path, capsys):
    assert cli.main(["verify", str(tmp_path / "missing.toml")]) == 2
    assert "error:" in capsys.readouterr().err


def test_simulate_writes_matrix_and_sidecar(tmp_path):
    out = str(tmp_path / "paths.csv")
    rc = cli.main(["simulate", "--family", "poisson", "--intensity", "1.0",
                   "--n", "8", "--delta", "0.5", "--paths", "16",
                   "--seed", "7", "--out", out])
    assert rc == 0
    mat = np.loadtxt(out, delimiter=",")
    assert mat.shape == (16, 8)
    meta = json.loads((tmp_path / "paths.csv.json").read_text())
    assert meta["schema"] == 1 and meta["n"] == 8 and meta["master_seed"] == 7

    out2 = str(tmp_path / "paths2.csv")
    cli.main(["simulate", "--family", "poisson", "--intensity", "1.0",
              "--n", "8", "--delta", "0.5", "--paths", "16",
              "--seed", "7", "--out", out2, "--threads", "4"])
    assert (tmp_path / "paths.csv").read_bytes() \
        == (tmp_path / "paths2.csv").read_bytes()


def test_acf_subcommand_prints_closed_form(capsys):
    rc = cli.main(["acf", "--trawl", "exponential", "--decay", "1.0",
                   "--lags", "0", "1"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert float(lines[0].split(",")[1]) == pytest.approx(1.0)
    assert float(lines[1].split(",")[1]) == pytest.approx(np.exp(-1.0))


def test_moment4_subcommand(capsys):
    rc = cli.main(["moment4", "--family", "poisson", "--intensity", "2.0"])
    assert rc == 0
    out = dict(line.split(",") for line in capsys.readouterr().out.strip().split("\n"))
    assert float(out["central4"]) == pytest.approx(14.0)
    assert float(out["paper_displayed"]) == pytest.approx(6.0)


def test_constants_subcommand(capsys):
    rc = cli.main(["constants", "--family", "gaussian", "--b", "1.0",
                   "--trawl", "power_law", "--kappa", "2.5",
                   "--regime", "long_memory_gauss"])
    assert rc == 0
    out = dict(line.split(",") for line in capsys.readouterr().out.strip().split("\n"))
    assert float(out["H"]) == pytest.approx(0.75)
    assert float(out["sigma_kappa2"]) == pytest.approx(8.0 / 3.0)


def test_constants_invalid_regime_parameters_exit_two(capsys):
    rc = cli.main(["constants", "--family", "gaussian",
                   "--trawl", "exponential",
                   "--regime", "long_memory_gauss", "--kappa", "3.5"])
    assert rc == 2
