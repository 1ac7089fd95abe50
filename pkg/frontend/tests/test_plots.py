import hashlib
import json
import shutil
import subprocess
from pathlib import Path

import numpy as np
import pytest

from mixbgk_plot.bundleio import BundleError, load_profiles, load_scaling, \
    read_csv
from mixbgk_plot.cli import main
from mixbgk_plot.figures import plot_profiles, plot_scaling


def _fmt(x):
    return format(float(x), ".17g")


def _write_field(path, field, species, t, x, values):
    with open(path, "w") as fh:
        fh.write(f"# field={field} species={species} t={t} units=abstract\n")
        fh.write("x,value\n")
        for xi, vi in zip(x, values):
            fh.write(f"{_fmt(xi)},{_fmt(vi)}\n")


def _make_profile_bundle(root: Path, nx=24, ref_nx=48):
    x = np.linspace(-1, 1, nx)
    xr = np.linspace(-1, 1, ref_nx)
    for s in (1, 2):
        _write_field(root / f"bbgsp_eps1e-03__n_s{s}_t0.2.csv", "n", s, 0.2,
                     x, 1.0 + 0.1 * s * np.sin(np.pi * x))
        _write_field(root / f"bbgsp_eps1e-03__T_s{s}_t0.2.csv", "T", s, 0.2,
                     x, 30.0 + s * np.cos(np.pi * x))
        _write_field(root / f"nsglobal_eps1e-03__n_s{s}_t0.2.csv", "n", s,
                     0.2, xr, 1.0 + 0.1 * s * np.sin(np.pi * xr))
    _write_field(root / "bbgsp_eps1e-03__u_sglobal_t0.2.csv", "u", "global",
                 0.2, x, 0.1 * np.sin(np.pi * x))


def _make_scaling_bundle(root: Path):
    times = np.linspace(0.004, 0.04, 10)
    with open(root / "scaling__aap-vs-bbgsp.csv", "w") as fh:
        fh.write("# field=l1-relative-distance units=dimensionless\n")
        fh.write("eps,t,distance_species_1,distance_species_2\n")
        for eps in (1e-2, 1e-3, 1e-4):
            for t in times:
                d = eps * (1 + 10 * t)
                fh.write(f"{_fmt(eps)},{_fmt(t)},{_fmt(d)},{_fmt(1.1 * d)}\n")
    (root / "summary.json").write_text(json.dumps(
        {"pairs": {"aap-vs-bbgsp": {"slopes": {"[0.0001,0.01]": 1.0}}}}))


def test_scaling_figure_renders_with_curves_per_eps(tmp_path):
    _make_scaling_bundle(tmp_path)
    out = tmp_path / "fig.png"
    plot_scaling(tmp_path, out)
    assert out.exists() and out.stat().st_size > 5000


def test_scaling_missing_columns_is_explicit_error(tmp_path):
    with open(tmp_path / "scaling__x.csv", "w") as fh:
        fh.write("# field=l1\n")
        fh.write("eps,t\n")
        fh.write("0.01,0.1\n")
    with pytest.raises(BundleError):
        load_scaling(tmp_path)


def test_scaling_empty_distance_column_is_error(tmp_path):
    with open(tmp_path / "scaling__x.csv", "w") as fh:
        fh.write("# field=l1\n")
        fh.write("eps,t,distance_species_1\n")
    with pytest.raises(BundleError):
        load_scaling(tmp_path)


def test_profiles_figure_renders(tmp_path):
    _make_profile_bundle(tmp_path)
    out = tmp_path / "profiles.png"
    plot_profiles(tmp_path, out)
    assert out.exists() and out.stat().st_size > 5000


def test_single_series_single_panel(tmp_path):
    x = np.linspace(0, 1, 8)
    _write_field(tmp_path / "bbgsp_eps1__T_s1_t1.csv", "T", 1, 1.0, x, x + 1)
    out = tmp_path / "one.png"
    plot_profiles(tmp_path, out)
    assert out.exists()


def test_grid_mismatch_within_run_is_error(tmp_path):
    x1 = np.linspace(0, 1, 8)
    x2 = np.linspace(0, 1, 9)
    _write_field(tmp_path / "bbgsp_eps1__T_s1_t1.csv", "T", 1, 1.0, x1, x1)
    _write_field(tmp_path / "bbgsp_eps1__T_s2_t1.csv", "T", 2, 1.0, x2, x2)
    with pytest.raises(BundleError):
        plot_profiles(tmp_path, tmp_path / "bad.png")


def test_reference_series_allowed_on_finer_grid(tmp_path):
    _make_profile_bundle(tmp_path, nx=16, ref_nx=64)
    out = tmp_path / "mixed.png"
    plot_profiles(tmp_path, out, fields=["n"])
    assert out.exists()


def test_normalized_filter(tmp_path):
    x = np.linspace(0, 1, 8)
    _write_field(tmp_path / "bbgsp__n_norm_s1_t1.csv", "n_norm", 1, 1.0, x,
                 x * 0 + 0.8)
    _write_field(tmp_path / "bbgsp__n_s1_t1.csv", "n", 1, 1.0, x, x)
    out = tmp_path / "norm.png"
    plot_profiles(tmp_path, out, normalized=True)
    assert out.exists()
    with pytest.raises(BundleError):
        plot_profiles(tmp_path / "nowhere", out)


def test_rendering_is_byte_deterministic(tmp_path):
    _make_profile_bundle(tmp_path)
    _make_scaling_bundle(tmp_path)
    digests = {}
    for kind in ("scaling", "profiles"):
        pair = []
        for tag in ("a", "b"):
            out = tmp_path / f"{kind}_{tag}.png"
            assert main([kind, "--in", str(tmp_path), "--out", str(out)]) == 0
            pair.append(hashlib.sha256(out.read_bytes()).hexdigest())
        assert pair[0] == pair[1], kind
        digests[kind] = pair[0]
    # svg path too
    out1 = tmp_path / "s1.svg"
    out2 = tmp_path / "s2.svg"
    main(["scaling", "--in", str(tmp_path), "--out", str(out1)])
    main(["scaling", "--in", str(tmp_path), "--out", str(out2)])
    assert out1.read_bytes() == out2.read_bytes()


def test_csv_reader_rejects_headerless(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("x,value\n0,1\n")
    with pytest.raises(BundleError):
        read_csv(p)


@pytest.mark.skipif(shutil.which("mixbgk") is None,
                    reason="solver CLI not installed")
def test_end_to_end_with_solver_bundle(tmp_path):
    run_dir = tmp_path / "run"
    subprocess.run(
        ["mixbgk", "run", "discrepancy-4gas", "--nx", "24", "--nv", "16",
         "--t-end", "0.008", "--eps", "1e-2", "1e-3", "--out", str(run_dir)],
        check=True, capture_output=True)
    out1 = tmp_path / "scale1.png"
    out2 = tmp_path / "scale2.png"
    assert main(["scaling", "--in", str(run_dir), "--out", str(out1)]) == 0
    assert main(["scaling", "--in", str(run_dir), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    prof = tmp_path / "prof.png"
    assert main(["profiles", "--in", str(run_dir), "--out", str(prof),
                 "--fields", "T", "u"]) == 0
    assert prof.stat().st_size > 5000
