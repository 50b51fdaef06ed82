"""ASCII mesh and field I/O: OFF and OBJ readers, OBJ and CSV writers.

Only triangle faces are accepted; vertex scalar fields are written as
``vertex_id,x,y,z,value`` CSV rows so they can be joined on vertex id.
"""
from __future__ import annotations

import numpy as np

from .surface_mesh import MeshError, TriangleMesh


def read_off(path, validate=True):
    """Read an ASCII OFF file with triangular faces into a TriangleMesh."""
    with open(path, "r", encoding="utf-8") as fh:
        tokens = []
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens or tokens[0] != "OFF":
        raise MeshError(f"{path}: missing OFF header")
    pos = 1
    nv, nf = int(tokens[pos]), int(tokens[pos + 1])
    pos += 3  # skip edge count
    verts = np.array(tokens[pos:pos + 3 * nv], dtype=float).reshape(nv, 3)
    pos += 3 * nv
    faces = []
    for _ in range(nf):
        cnt = int(tokens[pos])
        if cnt != 3:
            raise MeshError(f"{path}: only triangle faces supported, got {cnt}-gon")
        faces.append([int(t) for t in tokens[pos + 1:pos + 4]])
        pos += 1 + cnt
    return TriangleMesh(verts, np.array(faces, dtype=np.int64), validate=validate)


def read_obj(path, validate=True):
    """Read an ASCII OBJ file (v/f records, triangles only) into a TriangleMesh."""
    verts, faces = [], []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            parts = raw.split("#", 1)[0].split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(p) for p in parts[1:4]])
            elif parts[0] == "f":
                if len(parts) != 4:
                    raise MeshError(f"{path}: only triangle faces supported")
                idx = [int(p.split("/", 1)[0]) for p in parts[1:4]]
                faces.append([i - 1 if i > 0 else len(verts) + i for i in idx])
    if not verts or not faces:
        raise MeshError(f"{path}: no usable v/f records")
    return TriangleMesh(np.array(verts), np.array(faces, dtype=np.int64), validate=validate)


def write_obj(mesh, path, comments=()):
    """Write a TriangleMesh as ASCII OBJ (1-based face indices)."""
    with open(path, "w", encoding="utf-8") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        for v in mesh.vertices:
            fh.write(f"v {v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for f in mesh.triangles:
            fh.write(f"f {f[0] + 1} {f[1] + 1} {f[2] + 1}\n")


def write_vertex_csv(vertices, values, path, comments=(), column="value"):
    """Write per-vertex values as ``vertex_id,x,y,z,<columns>`` CSV rows.

    ``values`` may be (n,) for one column or (n, k); multi-component columns
    are named ``<column>_0 .. <column>_{k-1}``.
    """
    vertices = np.asarray(vertices, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
        names = [column]
    else:
        names = [f"{column}_{i}" for i in range(values.shape[1])]
    if len(values) != len(vertices):
        raise ValueError("values and vertices length mismatch")
    with open(path, "w", encoding="utf-8") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        fh.write("vertex_id,x,y,z," + ",".join(names) + "\n")
        for i, (v, row) in enumerate(zip(vertices, values)):
            cols = ",".join(f"{c:.17g}" for c in row)
            fh.write(f"{i},{v[0]:.17g},{v[1]:.17g},{v[2]:.17g},{cols}\n")
