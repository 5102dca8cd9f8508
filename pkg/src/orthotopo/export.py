"""Legacy ASCII VTK and CSV writers with byte-stable number formatting."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .energy import HField
from .material import H_NAMES, SLOT_NAMES, OrthotropicProps
from .mesh import Mesh

VTK_TETRA = 10
HISTORY_HEADER = ("iter", "W_total", "compliance", "sH1", "sH2", "sH3", "sH12", "sH13", "sH23",
                  "frozen_count", "repairs")


def _fmt(x: float) -> str:
    # "%" formatting ignores the locale, so the decimal point is always "."
    return "%.9g" % float(x)


def _six(values: np.ndarray) -> np.ndarray:
    """Pad single-slot (isotropic) data to six columns."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.shape[1] == 6:
        return values
    if values.shape[1] == 1:
        return np.repeat(values, 6, axis=1)
    raise ValueError(f"expected 1 or 6 columns, got {values.shape[1]}")


def export_vtk(mesh: Mesh, props: OrthotropicProps, h: HField | np.ndarray, density: np.ndarray,
               path, title: str = "orthotopo state") -> Path:
    """Write points, tetrahedra and per-cell moduli, energy density and H.

    ``density`` is in MPa (= N mm / mm^3) and is written in uJ/mm^3.
    """
    path = Path(path)
    H = _six(h.values if isinstance(h, HField) else h)
    n, ne = mesh.n_nodes, mesh.n_elements
    lines = ["# vtk DataFile Version 3.0", title.replace("\n", " ")[:255], "ASCII",
             "DATASET UNSTRUCTURED_GRID", f"POINTS {n} double"]
    lines += [" ".join(_fmt(c) for c in p) for p in mesh.nodes]
    lines.append(f"CELLS {ne} {5 * ne}")
    lines += ["4 " + " ".join(str(int(v)) for v in cell) for cell in mesh.elements]
    lines.append(f"CELL_TYPES {ne}")
    lines += [str(VTK_TETRA)] * ne
    lines.append(f"CELL_DATA {ne}")

    def scalars(name, col):
        lines.extend([f"SCALARS {name} double 1", "LOOKUP_TABLE default"])
        lines.extend(_fmt(v) for v in col)

    moduli = props.moduli
    for s, name in enumerate(SLOT_NAMES):
        scalars(name, moduli[:, s])
    scalars("energy_density_uJ_per_mm3", np.asarray(density, dtype=float) * 1e3)
    for s, name in enumerate(H_NAMES):
        scalars(name, H[:, s])
    path.write_text("\n".join(lines) + "\n", encoding="ascii")
    return path


def export_history(history, path) -> Path:
    """One CSV row per iteration record."""
    if not history:
        raise ValueError("history is empty")
    path = Path(path)
    with path.open("w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTORY_HEADER)
        for r in history:
            sH = _six(np.atleast_1d(r.s_H)[None, :])[0]
            w.writerow([r.iter, _fmt(r.W_total), _fmt(r.compliance), *(_fmt(v) for v in sH),
                        r.frozen_count, r.repairs])
    return path
