"""Smoke tests for the python bindings."""

import math

import pytest

import machansim as mc


@pytest.fixture(scope="module")
def dataset():
    grid = mc.PortGrid(rows=8, cols=8)
    # Enough sweep points that the reflected delay stays below the alias
    # period 1/df.
    freq = mc.FrequencyGrid(f_start_hz=260e9, f_stop_hz=320e9, n_points=1001)
    return mc.synth_ctf(grid=grid, freq=freq)


def test_defaults():
    grid = mc.PortGrid()
    assert grid.rows == 32 and grid.cols == 32
    assert grid.center_row == 16 and grid.center_col == 16
    freq = mc.FrequencyGrid()
    assert freq.n_points == 1001
    assert freq.nearest_index(290e9) == 500


def test_synth_and_extract(dataset):
    assert len(dataset.ctf) == 8 * 8 * 1001
    ctf = dataset.port_ctf(dataset.grid.center_row, dataset.grid.center_col)
    cir = mc.ctf_to_cir(ctf, dataset.freq)
    res = mc.extract_rays(cir, ctf)
    assert len(res.rays) == 2 and not res.warning
    los, ref = res.rays
    assert los.kind == mc.RayKind.los and ref.kind == mc.RayKind.reflected
    assert los.delay_s < ref.delay_s
    assert 20 * math.log10(abs(los.gain)) == pytest.approx(-79.6, abs=0.5)
    assert 20 * math.log10(abs(ref.gain)) == pytest.approx(-89.95, abs=0.5)


def test_dataset_roundtrip(tmp_path, dataset):
    path = tmp_path / "ds.bin"
    mc.write_dataset(dataset, path)
    back = mc.read_dataset(path)
    assert back == dataset


def test_errors_translate(tmp_path):
    with pytest.raises(OSError):
        mc.read_dataset(tmp_path / "missing.bin")
    with pytest.raises(ValueError):
        mc.partition_regions(4, 4, mc.MAConfig(5, 1))
    with pytest.raises(ArithmeticError):
        mc.port_sinr(1 + 0j, 1.0, 0.0)


def test_covariance_and_generation(dataset):
    field = mc.narrowband_slice(dataset, 290e9, mc.Normalization.unit_mean_power)
    rows = mc.row_samples_from_field(field)
    cov = mc.complex_cov(rows)
    assert cov.sigma.shape == (8, 8)
    c = mc.factorize(cov.sigma)
    recon_err = abs(cov.sigma - c @ c.conj().T).max()
    assert recon_err <= 1e-10 * abs(cov.sigma).max()
    samples = mc.gen_complex(cov, mc.ComplexSource.circular_uniform_phase, 16, 1)
    assert samples.shape == (8, 16)
    again = mc.gen_complex(cov, mc.ComplexSource.circular_uniform_phase, 16, 1)
    assert (samples == again).all()


def test_selection_and_sweep(dataset):
    field = mc.narrowband_slice(dataset, 290e9, mc.Normalization.unit_mean_power)
    regions = mc.partition_regions(8, 8, mc.MAConfig(2, 1))
    uniform = mc.select_uniform(field, regions, 1.0, 4.89e-6)
    assert len(uniform.positions) == 2
    curve = mc.run_power_sweep(field, uniform, mc.SweepSpec())
    assert curve.p_dbm == [0.0, 5.0, 10.0, 15.0, 20.0]
    assert all(b > a for a, b in zip(curve.se_bits_per_hz, curve.se_bits_per_hz[1:]))


def test_improvement_table(dataset):
    report = mc.improvement_table(
        dataset, [mc.MAConfig(2, 1)], [4, 8], mc.SweepSpec()
    )
    assert len(report.entries) == 2
    assert all(e.feasible for e in report.entries)
    assert "entries" in report.to_json()
