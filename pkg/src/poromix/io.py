"""Deterministic artifact I/O: CSV diagnostics, binary snapshots, manifests.

Floats are always written with 17 significant digits so identical runs
produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import os

import numpy as np

from .diagnostics import CesaroSeries, EnergySeries, IdentityResiduals, SurfacePowerSeries
from .solver import StateField

FLOAT_FMT = "%.17g"


def _fmt(x: float) -> str:
    return FLOAT_FMT % float(x)


def _write_rows(path, header: list[str], rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def write_energy_csv(path, series: EnergySeries) -> None:
    rows = zip(series.t, series.kinetic_u, series.kinetic_phi, series.strain, series.total)
    _write_rows(path, ["t", "kinetic_u", "kinetic_phi", "strain", "total"], rows)


def write_power_csv(path, sps: SurfacePowerSeries) -> None:
    rows = (
        (t, r, sps.P[i, j], sps.E_vol[i, j])
        for i, r in enumerate(sps.r_grid)
        for j, t in enumerate(sps.t_grid)
    )
    _write_rows(path, ["t", "r", "P", "E_vol"], rows)


def write_cesaro_csv(path, cs: CesaroSeries) -> None:
    rows = zip(cs.t, cs.Kc_u, cs.Kc_phi, cs.Kc, cs.Sc, cs.gap)
    _write_rows(path, ["t", "Kc_u", "Kc_phi", "Kc", "Sc", "gap"], rows)


def write_residuals_csv(path, ir: IdentityResiduals) -> None:
    rows = zip(ir.t, ir.res_energy_balance, ir.res_virial, ir.res_two_time)
    _write_rows(path, ["t", "res_energy_balance", "res_virial", "res_two_time"], rows)


_SNAPSHOT_FIELDS = ("u1", "u2", "phi1", "phi2", "v1", "v2", "psi1", "psi2")


def write_snapshot(path, state: StateField) -> None:
    """Flat binary blocks, each preceded by a self-describing text header."""
    with open(path, "wb") as fh:
        for name in _SNAPSHOT_FIELDS:
            arr = np.ascontiguousarray(getattr(state, name), dtype="<f8")
            header = (
                f"field {name}\n"
                f"shape {' '.join(str(s) for s in arr.shape)}\n"
                f"time {_fmt(state.t)}\n"
                f"dtype float64\n\n"
            )
            fh.write(header.encode("ascii"))
            fh.write(arr.tobytes())


def read_snapshot(path) -> StateField:
    fields = {}
    t = 0.0
    with open(path, "rb") as fh:
        data = fh.read()
    pos = 0
    while pos < len(data):
        end = data.index(b"\n\n", pos)
        header = data[pos:end].decode("ascii").splitlines()
        meta = dict(line.split(" ", 1) for line in header)
        shape = tuple(int(v) for v in meta["shape"].split())
        t = float(meta["time"])
        count = int(np.prod(shape))
        start = end + 2
        arr = np.frombuffer(data[start : start + 8 * count], dtype="<f8").reshape(shape)
        fields[meta["field"]] = arr.copy()
        pos = start + 8 * count
    return StateField(t=t, **fields)


def file_sha256(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(path, entries: dict[str, str]) -> None:
    """name -> sha256 lines, sorted by name."""
    with open(path, "w", newline="\n") as fh:
        for name in sorted(entries):
            fh.write(f"{entries[name]}  {name}\n")


def hash_tree(paths: list[str]) -> dict[str, str]:
    return {os.path.basename(p): file_sha256(p) for p in paths}
