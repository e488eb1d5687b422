"""Serialization: canonical JSON, the dense binary matrix container,
delimited outputs, and the hand-built SVG region figure.

All writers format floats through ``repr`` so that identical inputs give
byte-identical files.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .grid import DomainGrid
from .operators import OperatorMatrix
from .spectral import EigenSystem

__all__ = [
    "dump_json",
    "write_json",
    "save_matrix",
    "load_matrix",
    "save_eigensystem",
    "load_eigensystem",
    "matrix_to_csv",
    "write_spectrum_csv",
    "write_region_csv",
    "write_region_svg",
    "write_solution_csv",
    "read_solution_csv",
    "write_trace_csv",
]

_MAGIC = b"FRACLEM1"


def dump_json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_json(path, payload) -> None:
    Path(path).write_text(dump_json(payload), encoding="utf-8")


# ----------------------------------------------------------------------------
# dense binary container: magic, length-prefixed JSON header, float64 payloads
# ----------------------------------------------------------------------------

def _write_container(path, header: dict, arrays: list[np.ndarray]) -> None:
    head = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(head)))
        fh.write(head)
        for arr in arrays:
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def _read_container(path) -> tuple[dict, bytes]:
    raw = Path(path).read_bytes()
    if raw[: len(_MAGIC)] != _MAGIC:
        raise ValueError(f"{path}: not a recognized binary container")
    (hlen,) = struct.unpack("<I", raw[len(_MAGIC) : len(_MAGIC) + 4])
    start = len(_MAGIC) + 4
    header = json.loads(raw[start : start + hlen].decode("utf-8"))
    return header, raw[start + hlen :]


def save_matrix(op: OperatorMatrix, path) -> None:
    """Row-major float64 entries followed by the mass diagonal."""
    header = {
        "format": "operator",
        "n": op.n,
        "kind": op.kind,
        "s": op.s,
        "grid": op.grid.to_dict() if op.grid is not None else None,
    }
    _write_container(path, header, [op.entries, op.mass])


def load_matrix(path) -> OperatorMatrix:
    header, payload = _read_container(path)
    if header.get("format") != "operator":
        raise ValueError(f"{path}: container does not hold an operator matrix")
    n = int(header["n"])
    data = np.frombuffer(payload, dtype="<f8")
    entries = data[: n * n].reshape(n, n).copy()
    mass = data[n * n : n * n + n].copy()
    grid = DomainGrid.from_dict(header["grid"]) if header.get("grid") else None
    return OperatorMatrix(
        entries=entries, mass=mass, kind=header["kind"], s=header["s"], grid=grid
    )


def save_eigensystem(eig: EigenSystem, path) -> None:
    header = {
        "format": "eigensystem",
        "n": eig.n,
        "kind": "eigensystem",
        "s": None,
        "grid": eig.grid.to_dict() if eig.grid is not None else None,
    }
    _write_container(path, header, [eig.eigenvalues, eig.eigenvectors, eig.mass])


def load_eigensystem(path) -> EigenSystem:
    header, payload = _read_container(path)
    if header.get("format") != "eigensystem":
        raise ValueError(f"{path}: container does not hold an eigensystem")
    n = int(header["n"])
    data = np.frombuffer(payload, dtype="<f8")
    eigenvalues = data[:n].copy()
    eigenvectors = data[n : n + n * n].reshape(n, n).copy()
    mass = data[n + n * n : n + n * n + n].copy()
    grid = DomainGrid.from_dict(header["grid"]) if header.get("grid") else None
    return EigenSystem(
        eigenvalues=eigenvalues, eigenvectors=eigenvectors, mass=mass, grid=grid
    )


def matrix_to_csv(op: OperatorMatrix, path) -> None:
    lines = [",".join(repr(float(x)) for x in row) for row in op.entries]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# ----------------------------------------------------------------------------
# delimited outputs
# ----------------------------------------------------------------------------

def write_spectrum_csv(eigenvalues, path) -> None:
    lines = ["k,lambda"]
    for k, lam in enumerate(eigenvalues, start=1):
        lines.append(f"{k},{float(lam)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_region_csv(region, path) -> None:
    lines = ["p,q,pq0,pq1,corollary,theta_window_nonempty"]
    for p, q, f0, f1, cor, win in region.rows():
        lines.append(f"{p!r},{q!r},{int(f0)},{int(f1)},{int(cor)},{int(win)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_region_svg(region, path, size: int = 480) -> None:
    """Shaded-region figure from geometry primitives only.

    One rectangle per admissible cell: light fill where (pq0) and (pq1)
    hold, dark fill where the stronger regularity region also holds.
    """
    p_lo = float(region.p_values[0])
    p_hi = float(region.p_values[-1])
    q_lo = float(region.q_values[0])
    q_hi = float(region.q_values[-1])
    dp = region.p_values[1] - region.p_values[0] if len(region.p_values) > 1 else 1.0
    dq = region.q_values[1] - region.q_values[0] if len(region.q_values) > 1 else 1.0
    span_p = p_hi - p_lo + dp
    span_q = q_hi - q_lo + dq

    def sx(p):
        return (p - (p_lo - dp / 2)) / span_p * size

    def sy(q):
        return size - (q - (q_lo - dq / 2)) / span_q * size

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="#ffffff"/>',
    ]
    cell_w = dp / span_p * size
    cell_h = dq / span_q * size
    for p, q, f0, f1, cor, win in region.rows():
        if not (f0 and f1):
            continue
        fill = "#c23b22" if cor else "#f2b6a0"
        parts.append(
            f'<rect x="{sx(p) - cell_w / 2:.4f}" y="{sy(q) - cell_h / 2:.4f}" '
            f'width="{cell_w:.4f}" height="{cell_h:.4f}" fill="{fill}"/>'
        )
    parts.append(
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="none" '
        'stroke="#000000" stroke-width="1"/>'
    )
    parts.append(
        f'<text x="{size / 2:.1f}" y="{size - 4}" font-size="12" '
        f'text-anchor="middle">p in [{p_lo - dp / 2:.3g}, {p_hi + dp / 2:.3g}], '
        f'q in [{q_lo - dq / 2:.3g}, {q_hi + dq / 2:.3g}], '
        f'n={region.n}, s={region.s:g}</text>'
    )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n", encoding="utf-8")


def write_solution_csv(grid: DomainGrid, u, v, path) -> None:
    coords = grid.coords()
    if grid.dim == 1:
        lines = ["x,u,v"]
        for x, uu, vv in zip(coords, u, v):
            lines.append(f"{float(x)!r},{float(uu)!r},{float(vv)!r}")
    else:
        lines = ["x1,x2,u,v"]
        for (x1, x2), uu, vv in zip(coords, u, v):
            lines.append(f"{float(x1)!r},{float(x2)!r},{float(uu)!r},{float(vv)!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_solution_csv(path) -> tuple[None, np.ndarray, np.ndarray]:
    """Read a solution table; the grid is not encoded in the CSV, so the
    caller must check lengths against its own grid."""
    text = Path(path).read_text(encoding="utf-8").strip().splitlines()
    header = text[0].split(",")
    try:
        u_col = header.index("u")
        v_col = header.index("v")
    except ValueError as exc:
        raise ValueError(f"{path}: missing u/v columns") from exc
    us, vs = [], []
    for line in text[1:]:
        fields = line.split(",")
        us.append(float(fields[u_col]))
        vs.append(float(fields[v_col]))
    return None, np.asarray(us), np.asarray(vs)


def write_trace_csv(trace, path) -> None:
    lines = ["iteration,energy,grad_norm,z_norm"]
    for i, t in enumerate(trace):
        lines.append(f"{i},{t.energy!r},{t.grad_norm!r},{t.z_norm!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
