"""Series CSV and snapshot file formats.

Series: fixed header t,energy,energy_bogomolny,eta_l2,v_l2,y_l2,phi_l2,
a0_l2,grad_norm,flux,vortex_total; floats printed with 17 significant digits
so binary64 values round-trip losslessly; vortex_total is an integer.

Snapshot: one JSON header line {version, N, L1, L2, n1, n2, t, endian}
followed by raw little-endian float64 arrays in fixed order rho, A1, A2,
Re phi, Im phi; row-major with x2 outer. a0 is excluded (recomputable).
"""

import json

import numpy as np

from .diagnostics import CSV_FIELDS
from .errors import FormatError
from .geometry import make_geometry
from .state import FlowState

SNAPSHOT_VERSION = 1


def fmt(x):
    return f"{x:.17g}"


def format_record(rec):
    parts = []
    for name in CSV_FIELDS:
        val = getattr(rec, name)
        parts.append(str(val) if name == "vortex_total" else fmt(val))
    return ",".join(parts)


def write_series(path, records):
    with open(path, "w", newline="\n") as f:
        f.write(",".join(CSV_FIELDS) + "\n")
        for rec in records:
            f.write(format_record(rec) + "\n")


def read_series(path):
    """Columns as a dict of numpy arrays."""
    with open(path, "r") as f:
        header = f.readline().strip()
        names = header.split(",")
        if names != list(CSV_FIELDS):
            raise FormatError(f"unexpected series header: {header!r}")
        rows = []
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(names):
                raise FormatError(f"line {lineno}: expected {len(names)} fields")
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise FormatError(f"line {lineno}: {exc}") from exc
    data = np.array(rows) if rows else np.zeros((0, len(names)))
    out = {name: data[:, i] for i, name in enumerate(names)}
    out["vortex_total"] = out["vortex_total"].astype(int)
    return out


def write_snapshot(path, state, geom, N):
    header = {"version": SNAPSHOT_VERSION, "N": int(N),
              "L1": geom.L1, "L2": geom.L2, "n1": geom.n1, "n2": geom.n2,
              "t": float(state.t), "endian": "little"}
    with open(path, "wb") as f:
        f.write((json.dumps(header) + "\n").encode("ascii"))
        for arr in (geom.rho, state.a1, state.a2,
                    np.real(state.phi), np.imag(state.phi)):
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_snapshot(path):
    """Returns (geom, N, FlowState); a0 is left unsolved (None)."""
    with open(path, "rb") as f:
        line = f.readline()
        try:
            header = json.loads(line.decode("ascii"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise FormatError(f"bad snapshot header: {exc}") from exc
        payload = f.read()
    required = {"version", "N", "L1", "L2", "n1", "n2", "t", "endian"}
    missing = required - set(header)
    if missing:
        raise FormatError(f"snapshot header missing keys: {sorted(missing)}")
    if header["version"] != SNAPSHOT_VERSION:
        raise FormatError(f"unsupported snapshot version {header['version']}")
    if header["endian"] != "little":
        raise FormatError(f"unsupported endianness tag {header['endian']!r}")
    n1, n2 = int(header["n1"]), int(header["n2"])
    count = n1 * n2
    expected = 5 * count * 8
    if len(payload) != expected:
        raise FormatError(
            f"snapshot payload has {len(payload)} bytes, expected {expected}")
    flat = np.frombuffer(payload, dtype="<f8")
    fields = [flat[i * count:(i + 1) * count].reshape(n2, n1).astype(float)
              for i in range(5)]
    rho, a1, a2, re_phi, im_phi = fields
    geom = make_geometry(header["L1"], header["L2"], n1, n2, rho)
    state = FlowState(float(header["t"]), a1, a2, re_phi + 1j * im_phi)
    return geom, int(header["N"]), state
