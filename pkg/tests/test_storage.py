import csv
import json
import struct

import numpy as np
import pytest

from hardy_kernels import FormatError, HardyCoupling, LevyModel, kappa_star
from hardy_kernels.duhamel import PerturbedKernelTable, perturbed_kernel_1d
from hardy_kernels.kernel_engine import RadialGrid, heat_table
from hardy_kernels.report import FAIL, PASS, AuditReport
from hardy_kernels.storage import MAGIC, export_csv, read_reports, read_table, write_report, write_table

REL1 = LevyModel(1, 0.5, "relativistic", m=1.0)


@pytest.fixture(scope="module")
def heat():
    return heat_table(REL1, RadialGrid.log(n=32, m=4, r_min=1e-2, r_max=10.0, t_min=0.1, t_max=1.0))


@pytest.fixture(scope="module")
def perturbed():
    c = HardyCoupling.from_kappa(1, 0.5, 0.4 * kappa_star(1, 0.5))
    return perturbed_kernel_1d(REL1, c, radii=np.geomspace(1e-2, 10.0, 12), T=0.5, k_steps=3)


def test_heat_table_roundtrip_is_bit_identical(heat, tmp_path):
    back = read_table(write_table(heat, tmp_path / "h.hkt"))
    assert type(back) is type(heat)
    assert back.kind == heat.kind and back.model == heat.model and back.metadata == heat.metadata
    for name in ("radii", "params", "values"):
        np.testing.assert_array_equal(getattr(back, name), getattr(heat, name))


def test_perturbed_table_roundtrip_is_bit_identical(perturbed, tmp_path):
    back = read_table(write_table(perturbed, tmp_path / "p.hkt"))
    assert isinstance(back, PerturbedKernelTable)
    assert back.hardy.kappa == perturbed.hardy.kappa
    assert back.n_terms == perturbed.n_terms
    for name in ("values", "opposite", "free", "free_opposite"):
        np.testing.assert_array_equal(getattr(back, name), getattr(perturbed, name))
    np.testing.assert_array_equal(back.raw[-1], perturbed.raw[-1])


def test_container_prefix(heat, tmp_path):
    data = write_table(heat, tmp_path / "h.hkt").read_bytes()
    magic, version, reserved, n = struct.unpack_from("<4sHHQ", data)
    assert (magic, version, reserved) == (MAGIC, 1, 0)
    header = json.loads(data[16:16 + n])
    assert [a["name"] for a in header["arrays"]] == ["radii", "params", "values"]
    assert len(data) == 16 + n + 8 * (32 + 4 + 4 * 32)


@pytest.mark.parametrize("damage", ["magic", "version", "truncate", "short", "header"])
def test_damaged_containers_raise_format_error(heat, tmp_path, damage):
    data = bytearray(write_table(heat, tmp_path / "h.hkt").read_bytes())
    if damage == "magic":
        data[:4] = b"XXXX"
    elif damage == "version":
        data[4:6] = struct.pack("<H", 2)
    elif damage == "truncate":
        data = data[:-8]
    elif damage == "short":
        data = data[:10]
    else:
        data[16] = 0xFF
    bad = tmp_path / "bad.hkt"
    bad.write_bytes(bytes(data))
    with pytest.raises(FormatError):
        read_table(bad)


def test_write_to_missing_directory_names_path(heat, tmp_path):
    target = tmp_path / "missing" / "h.hkt"
    with pytest.raises(OSError, match="missing"):
        write_table(heat, target)


def test_csv_export_row_counts(heat, perturbed, tmp_path):
    assert export_csv(heat, tmp_path / "h.csv") == 32 * 4
    with open(tmp_path / "h.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["param", "r", "value"]
    assert float(rows[1][2]) == heat.values[0, 0]
    n = export_csv(perturbed, tmp_path / "p.csv")
    assert n == 12 * 12 * perturbed.times.size


def test_report_roundtrip(tmp_path):
    reports = [
        AuditReport("a", constants={"c_upper": float("inf")}, verdict=PASS, refinement_stable=True),
        AuditReport("b", residuals={"x": np.float64(0.5)}, verdict=FAIL, refinement_stable=True),
    ]
    back = read_reports(write_report(reports, tmp_path / "r.json"))
    assert [r.estimate_id for r in back] == ["a", "b"]
    assert back[0].constants["c_upper"] == "inf"
    assert back[1].residuals["x"] == 0.5
    assert [r.verdict for r in back] == [PASS, FAIL]


def test_read_reports_rejects_bad_json(tmp_path):
    bad = tmp_path / "r.json"
    bad.write_text("{not json")
    with pytest.raises(FormatError):
        read_reports(bad)
