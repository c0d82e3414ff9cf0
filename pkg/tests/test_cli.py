import csv
import json
import math

import numpy as np
import pytest

from cauchygf.cavity import CavityParams, polariton_poles
from cauchygf.cli import main
from cauchygf.engine import SpectralGrid, averaged_greens, diagonalize
from cauchygf.lattice import assemble_huckel, build_topology

STAR_INI = """\
[model]
kind = star
n_sites = 7
gamma = 0.1
"""

CAVITY_INI = """\
[model]
kind = cavity
epsilon_c = 2.1
epsilon_a = 2.1
gamma = 0.02
n_molecules = 6
v_tilde = 4.06e-14
number_density = 1.16e25
"""


def run(tmp_path, ini, *argv):
    cfg = tmp_path / "run.ini"
    cfg.write_text(ini)
    return main([argv[0], "--config", str(cfg), "--quiet", *argv[1:]])


def read_columns(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {name: [row[name] for row in rows] for name in rows[0]}


# ----------------------------------------------------------------------- dos

def test_dos_star_matches_engine(tmp_path):
    out = tmp_path / "star.csv"
    assert run(tmp_path, STAR_INI, "dos", "--out", str(out),
               "--grid=-3:3:41") == 0
    table = read_columns(out)
    omegas = np.array([float(x) for x in table["omega"]])
    np.testing.assert_allclose(omegas, np.linspace(-3, 3, 41), atol=1e-12)

    spec = assemble_huckel(build_topology("star", 7), 0.0, 1.0, 0.1)
    evaluations = averaged_greens(diagonalize(spec), spec,
                                  SpectralGrid(omegas))
    want = np.array([-ev.diagonal().imag.sum() / np.pi for ev in evaluations])
    got = np.array([float(x) for x in table["rho_total"]])
    np.testing.assert_allclose(got, want, rtol=1e-11)
    hub = np.array([float(x) for x in table["rho_site_0"]])
    leaf = np.array([float(x) for x in table["rho_site_3"]])
    assert hub[20] != leaf[20]  # distinct site columns, not copies

    summary = json.loads((tmp_path / "star.summary.json").read_text())
    assert summary["model"] == {"kind": "star", "n_sites": 7, "alpha": 0.0,
                                "beta": 1.0, "gamma": 0.1,
                                "edges": [[0, i] for i in range(1, 7)]}
    assert summary["grid"] == {"lo": -3.0, "hi": 3.0, "n": 41, "eta": 0.0}


def test_dos_greens_element_columns(tmp_path):
    ini = STAR_INI + "[output]\ncolumns = rho_total, re_G_0_1, im_G_0_1\n"
    out = tmp_path / "g.csv"
    assert run(tmp_path, ini, "dos", "--out", str(out), "--grid", "0.4:0.6:3") == 0
    table = read_columns(out)
    assert list(table) == ["omega", "rho_total", "re_G_0_1", "im_G_0_1"]
    spec = assemble_huckel(build_topology("star", 7), 0.0, 1.0, 0.1)
    evaluations = averaged_greens(diagonalize(spec), spec,
                                  SpectralGrid(np.linspace(0.4, 0.6, 3)),
                                  elements=[(0, 1)])
    want = evaluations[1].entry(0, 1)
    assert float(table["re_G_0_1"][1]) == pytest.approx(want.real, rel=1e-11)
    assert float(table["im_G_0_1"][1]) == pytest.approx(want.imag, rel=1e-11)


def test_dos_rejects_unknown_column(tmp_path):
    ini = STAR_INI + "[output]\ncolumns = rho_site_9\n"
    assert run(tmp_path, ini, "dos") == 3


# -------------------------------------------------------------------- cavity

def test_cavity_poles_and_absorption_columns(tmp_path):
    out = tmp_path / "cav.csv"
    assert run(tmp_path, CAVITY_INI + "mu_debye = 10.0\n", "cavity",
               "--out", str(out), "--grid", "1.7:2.5:101") == 0
    table = read_columns(out)
    assert list(table) == ["omega", "rho_c", "delta_rho_m", "delta_rho_t",
                           "alpha_m2", "alpha_normalized"]
    norm = [float(x) for x in table["alpha_normalized"]]
    assert max(norm) == pytest.approx(1.0, abs=1e-12)

    params = CavityParams(2.1, 2.1, 0.02, 6, v_tilde=4.06e-14,
                          number_density=1.16e25)
    poles = polariton_poles(params)
    payload = json.loads((tmp_path / "cav.poles.json").read_text())
    assert payload["poles"]["eps_plus"] == {
        "re": pytest.approx(poles.eps_plus.real, abs=1e-15),
        "im": pytest.approx(poles.eps_plus.imag, abs=1e-15)}
    assert payload["poles"]["rabi_splitting"] == pytest.approx(
        poles.rabi_splitting, abs=1e-15)
    assert payload["model"]["collective_coupling_sq"] == pytest.approx(
        params.nv2, rel=1e-15)


def test_cavity_without_dipole_omits_absorption(tmp_path):
    out = tmp_path / "cav.csv"
    assert run(tmp_path, CAVITY_INI, "cavity", "--out", str(out),
               "--grid", "1.7:2.5:11") == 0
    assert list(read_columns(out)) == ["omega", "rho_c", "delta_rho_m",
                                       "delta_rho_t"]


def test_cavity_command_requires_cavity_model(tmp_path):
    assert run(tmp_path, STAR_INI, "cavity") == 3


# ---------------------------------------------------------------- mc-compare

def test_mc_compare_is_bytewise_reproducible(tmp_path):
    ini = STAR_INI + "[ensemble]\nsamples = 400\nseed = 12\neta = 0.05\n"
    out = tmp_path / "mc.csv"
    args = ("mc-compare", "--out", str(out), "--grid=-3:3:9")
    assert run(tmp_path, ini, *args) == 0
    first_csv = out.read_bytes()
    first_json = (tmp_path / "mc.summary.json").read_bytes()
    assert run(tmp_path, ini, *args) == 0
    assert out.read_bytes() == first_csv
    assert (tmp_path / "mc.summary.json").read_bytes() == first_json

    summary = json.loads(first_json)
    assert summary["ensemble"] == {"samples": 400, "seed": 12,
                                   "distribution": "cauchy", "scale": 0.1,
                                   "eta": 0.05}
    assert summary["grid"]["eta"] == 0.05  # forced to the ensemble eta
    assert 0.0 <= summary["fraction_within_3_stderr"] <= 1.0
    assert summary["max_deviation_stderr_units"] >= 0.0
    table = read_columns(out)
    assert set(table["element"]) == {f"G_{i}_{i}" for i in range(7)}
    assert len(table["omega"]) == 9 * 7


def test_mc_compare_flag_overrides_beat_config(tmp_path):
    ini = STAR_INI + "[ensemble]\nsamples = 400\nseed = 12\n"
    out = tmp_path / "mc.csv"
    assert run(tmp_path, ini, "mc-compare", "--out", str(out),
               "--grid=-1:1:5", "--samples", "37", "--seed", "9") == 0
    summary = json.loads((tmp_path / "mc.summary.json").read_text())
    assert summary["n_samples"] == 37
    assert summary["seed"] == 9


# ----------------------------------------------------------------- sum-rules

def test_sum_rules_huckel_passes(tmp_path):
    out = tmp_path / "rules.json"
    assert run(tmp_path, STAR_INI, "sum-rules", "--out", str(out)) == 0
    payload = json.loads(out.read_text())
    assert payload["all_passed"] is True
    (check,) = payload["checks"]
    assert check["name"] == "total_dos_norm"
    assert check["value"] == pytest.approx(7.0, abs=0.14)


def test_sum_rules_cavity_reports_band_deficit(tmp_path):
    # The [eps_a +- 5*gamma] band holds the -1 dip plus ~0.15 state of
    # polariton tails, so the band integral lands near -0.85 and the check
    # reports the shortfall instead of hiding it.
    out = tmp_path / "rules.json"
    assert run(tmp_path, CAVITY_INI, "sum-rules", "--out", str(out)) == 0
    payload = json.loads(out.read_text())
    by_name = {c["name"]: c for c in payload["checks"]}
    assert by_name["rho_c_norm"]["passed"] is True
    assert by_name["rho_c_norm"]["value"] == pytest.approx(1.0, abs=0.02)
    band = by_name["delta_rho_m_band"]
    assert band["value"] == pytest.approx(-0.8473, abs=2e-3)
    assert band["passed"] is False
    wide = by_name["delta_rho_t_wide"]
    assert wide["passed"] is True
    assert payload["grid"]["delta_rho_t_eta"] == pytest.approx(0.01)
    assert payload["all_passed"] is False


# -------------------------------------------------------------- error paths

def test_missing_config_file_is_io_error(tmp_path):
    assert main(["dos", "--config", str(tmp_path / "absent.ini"),
                 "--quiet"]) == 4


def test_malformed_ini_is_config_error(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("kind = star\n")  # key before any section header
    assert main(["dos", "--config", str(cfg), "--quiet"]) == 3


def test_unknown_model_kind_is_config_error(tmp_path):
    assert run(tmp_path, "[model]\nkind = moebius\nn_sites = 4\ngamma = 0.1\n",
               "dos") == 3


def test_missing_required_key_is_config_error(tmp_path):
    assert run(tmp_path, "[model]\nkind = star\ngamma = 0.1\n", "dos") == 3


def test_bad_grid_flag_is_config_error(tmp_path):
    assert run(tmp_path, STAR_INI, "dos", "--grid", "0:1") == 3
    assert run(tmp_path, STAR_INI, "dos", "--grid", "0:one:5") == 3


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 2


def test_default_artifact_names_and_progress_lines(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    cfg = tmp_path / "run.ini"
    cfg.write_text(STAR_INI)
    assert main(["dos", "--config", str(cfg), "--grid=-1:1:3"]) == 0
    out = capsys.readouterr().out
    assert "wrote dos.csv" in out and "wrote dos.summary.json" in out
    assert (tmp_path / "dos.csv").exists()
    assert (tmp_path / "dos.summary.json").exists()
