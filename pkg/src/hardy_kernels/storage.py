"""Persistence of kernel tables (binary ``HKT1`` container), CSV export and JSON reports.

Container layout (little endian)::

    b"HKT1"  uint16 version  uint16 reserved  uint64 header_length
    header   UTF-8 JSON describing the table and the array list
    arrays   float64 data in header order

Arrays are stored verbatim, so a write/read roundtrip is bit-identical.
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np

from .duhamel import PerturbedKernelTable
from .errors import FormatError
from .hardy_map import HardyCoupling
from .kernel_engine import KernelTable
from .levy_models import LevyModel
from .report import AuditReport, _clean

__all__ = ["MAGIC", "VERSION", "write_table", "read_table", "export_csv", "write_report", "read_reports"]

MAGIC = b"HKT1"
VERSION = 1
_PREFIX = struct.Struct("<4sHHQ")
_PERTURBED_ARRAYS = ("opposite", "free", "free_opposite", "tail", "widths", "potential")


def _arrays(table: KernelTable) -> dict[str, np.ndarray]:
    out = {"radii": table.radii, "params": table.params, "values": table.values}
    if isinstance(table, PerturbedKernelTable):
        for name in _PERTURBED_ARRAYS:
            if getattr(table, name) is not None:
                out[name] = getattr(table, name)
        if table.raw:
            out["raw_even"], out["raw_odd"] = table.raw[1], table.raw[-1]
    return {k: np.ascontiguousarray(v, dtype="<f8") for k, v in out.items()}


def write_table(table: KernelTable, path) -> Path:
    """Write ``table`` to ``path`` in the ``HKT1`` container.

    Raises
    ------
    OSError
        If the file cannot be written; the message names the path.
    """
    path = Path(path)
    arrays = _arrays(table)
    header = {
        "class": type(table).__name__,
        "kind": table.kind,
        "model": table.model.to_dict(),
        "coupling": _clean(table.coupling),
        "metadata": _clean(table.metadata),
        "arrays": [{"name": k, "shape": list(v.shape)} for k, v in arrays.items()],
    }
    if isinstance(table, PerturbedKernelTable):
        header["n_terms"] = int(table.n_terms)
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    try:
        with open(path, "wb") as fh:
            fh.write(_PREFIX.pack(MAGIC, VERSION, 0, len(blob)))
            fh.write(blob)
            for v in arrays.values():
                fh.write(v.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write table to {path}: {exc}") from exc
    return path


def read_table(path) -> KernelTable:
    """Read a table written by :func:`write_table`.

    Raises
    ------
    FormatError
        On a wrong magic number, an unsupported version or a truncated file.
    """
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _PREFIX.size:
        raise FormatError(f"{path}: file too short for an HKT1 header")
    magic, version, _, n = _PREFIX.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: not an HKT1 container (magic {magic!r})")
    if version != VERSION:
        raise FormatError(f"{path}: container version {version}, this reader supports {VERSION}")
    try:
        header = json.loads(data[_PREFIX.size:_PREFIX.size + n].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: corrupt header") from exc
    offset = _PREFIX.size + n
    arrays = {}
    for entry in header["arrays"]:
        count = int(np.prod(entry["shape"], dtype=np.int64))
        end = offset + 8 * count
        if end > len(data):
            raise FormatError(f"{path}: truncated array {entry['name']!r}")
        arrays[entry["name"]] = np.frombuffer(data, dtype="<f8", count=count, offset=offset).reshape(entry["shape"]).copy()
        offset = end
    model = LevyModel.from_dict(header["model"])
    common = dict(kind=header["kind"], model=model, radii=arrays["radii"], params=arrays["params"],
                  values=arrays["values"], coupling=header["coupling"], metadata=header["metadata"])
    if header["class"] == "PerturbedKernelTable":
        c = header["coupling"]
        extra = {k: arrays.get(k) for k in _PERTURBED_ARRAYS}
        raw = {1: arrays["raw_even"], -1: arrays["raw_odd"]} if "raw_even" in arrays else None
        return PerturbedKernelTable(**common, **extra, n_terms=header.get("n_terms", 0),
                                    hardy=HardyCoupling(c["d"], c["alpha"], c["kappa"], c["delta"]), raw=raw)
    return KernelTable(**common)


def export_csv(table: KernelTable, path) -> int:
    """Write ``(t, r, value)`` rows (``(t, x, y, same, opposite)`` for perturbed tables); returns the row count."""
    path = Path(path)
    rows = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if isinstance(table, PerturbedKernelTable):
            w.writerow(["t", "x", "y", "same_side", "opposite_side"])
            r = table.radii
            for k, t in enumerate(table.times):
                for i, x in enumerate(r):
                    for j, y in enumerate(r):
                        w.writerow([repr(float(t)), repr(float(x)), repr(float(y)),
                                    repr(float(table.values[k, i, j])), repr(float(table.opposite[k, i, j]))])
                        rows += 1
        else:
            w.writerow(["param", "r", "value"])
            for k, t in enumerate(table.params):
                for i, x in enumerate(table.radii):
                    w.writerow([repr(float(t)), repr(float(x)), repr(float(table.values[k, i]))])
                    rows += 1
    return rows


def write_report(reports, path) -> Path:
    """Write one report or a list of reports as a JSON array."""
    if isinstance(reports, AuditReport):
        reports = [reports]
    path = Path(path)
    try:
        path.write_text(json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True))
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    return path


def read_reports(path) -> list[AuditReport]:
    """Read a JSON array written by :func:`write_report`."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON") from exc
    if isinstance(data, dict):
        data = [data]
    return [AuditReport.from_dict(d) for d in data]
