import json
import math

import numpy as np
import pytest

import vfshm


def five_dof_grid():
    return np.linspace(100.0, 450.0, 3501)


def test_vector_fit_recovers_five_dof_poles():
    f = five_dof_grid()
    h = vfshm.mdof_frf(f)
    fit = vfshm.vector_fit(f, h, order=10)
    truth = sorted(vfshm.mdof_poles(), key=lambda p: (p.imag, p.real))
    got = sorted(fit["poles"], key=lambda p: (p.imag, p.real))
    assert max(abs(a - b) / abs(b) for a, b in zip(got, truth)) < 1e-6
    assert fit["diagnostics"]["final_rms_error"] < 1e-6 * np.sqrt(np.mean(np.abs(h) ** 2))
    model = vfshm.evaluate_model(fit["poles"], fit["residues"], fit["d"], fit["h"], f)
    assert np.max(np.abs(model - h)) < 1e-6 * np.max(np.abs(h))


def test_modal_parameters_match_table_frequencies():
    modes = vfshm.modal_parameters(vfshm.mdof_poles())["modes"]
    freqs = [m["frequency_hz"] for m in modes]
    assert freqs == pytest.approx([116.51, 225.08, 318.31, 389.85, 434.82], abs=0.006)


def test_lscf_agrees_at_low_frequency():
    f = five_dof_grid()
    h = vfshm.mdof_frf(f)
    ls = vfshm.lscf_fit(f, h, 10)
    modes = vfshm.modal_parameters(ls["poles"])["modes"]
    truth = vfshm.modal_parameters(vfshm.mdof_poles())["modes"]
    assert len(modes) == 5
    for a, b in zip(modes, truth):
        assert abs(a["frequency_hz"] / b["frequency_hz"] - 1) < 5e-4


def test_order_sweep_finds_the_five_modes():
    f = five_dof_grid()
    r = vfshm.order_sweep(f, vfshm.mdof_frf(f), n_min=6, n_max=14)
    assert len(r["stable_modes"]) == 5
    assert sum(c["stable"] for c in r["clusters"]) == 5
    assert r["failures"] == []


def test_metrics_invariants():
    f = five_dof_grid()
    z = vfshm.mdof_frf(f)
    assert vfshm.rmsd(f, z, z) == 0.0
    assert vfshm.xcorr(f, 2.5 * z + 3.0, z) < 1e-12
    zd = vfshm.mdof_frf(f, damaged=True)
    assert vfshm.rmsd(f, zd, z) > 0.0
    assert 0.0 <= vfshm.xcorr(f, zd, z) <= 1.0
    windows = vfshm.windowed_metric(f, z, z, 50.0)
    assert len(windows) == 7
    assert all(w["value"] == 0.0 for w in windows)


def test_emi_capacitive_limit():
    f = np.linspace(30e3, 100e3, 101)
    r = vfshm.emi_impedance(f, d13=0.0)
    assert r["flagged"] == []
    assert np.all(r["impedance"].imag < 0)


def test_assess_classifies_softening():
    base = [(116.51, 9.15e-5), (225.08, 1.77e-4)]
    inv = [(110.0, 9.2e-5), (220.0, 1.8e-4)]
    report = vfshm.assess(base, inv)
    assert report["classification"] == "damaged"
    assert report["direction_hint"] == "softening"
    assert report["matches"][0]["delta_freq_pct"] == pytest.approx(100 * (110.0 - 116.51) / 116.51)


def test_errors_are_typed():
    with pytest.raises(vfshm.DataError):
        vfshm.vector_fit([1.0, 1.0, 2.0], [1, 1, 1], order=2)
    with pytest.raises(vfshm.ConfigError):
        vfshm.vector_fit(five_dof_grid(), vfshm.mdof_frf(five_dof_grid()), order=0)
    assert issubclass(vfshm.IllConditionedError, vfshm.NumericError)


def test_cli_roundtrip(tmp_path):
    data = tmp_path / "b.csv"
    code, _, err = vfshm.run_cli(["simulate", "--out", str(data)])
    assert code == 0, err
    code, _, err = vfshm.run_cli(["fit", "--input", str(data), "--out-dir", str(tmp_path)])
    assert code == 0, err
    diag = json.loads((tmp_path / "diagnostics.json").read_text())
    assert len(diag["modal"]["modes"]) == 5
    assert vfshm.run_cli(["nope"])[0] == 1
    assert vfshm.run_cli(["fit", "--input", str(tmp_path / "missing.csv")])[0] == 2
