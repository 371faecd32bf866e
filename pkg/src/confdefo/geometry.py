"""Metric and extrinsic measurements of a realization.

Positions are ``(V, n)`` arrays with ``n`` in {2, 3, 4}. Per-corner arrays
are ``(F, 3)`` and indexed like ``mesh.faces``: corner ``c`` of face ``f``
sits at vertex ``faces[f, c]`` and is opposite the face side running from
corner ``c + 1`` to corner ``c + 2``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryEdge,
    DegenerateEdge,
    DegenerateFace,
    TriangleInequalityViolated,
)

#: absolute floor for lengths/areas, relative to the bounding-box diagonal
DEGENERACY_FLOOR = 1e-14


def bbox_diagonal(f):
    f = np.asarray(f, dtype=float)
    return float(np.linalg.norm(f.max(axis=0) - f.min(axis=0)))


def edge_vectors(mesh, f):
    """``f_j - f_i`` for every edge ``(i, j)`` with ``i < j``."""
    f = np.asarray(f, dtype=float)
    return f[mesh.edges[:, 1]] - f[mesh.edges[:, 0]]


def edge_metric(mesh, f):
    """Edge lengths ``|f_j - f_i|`` induced by a realization."""
    lengths = np.linalg.norm(edge_vectors(mesh, f), axis=1)
    floor = DEGENERACY_FLOOR * max(bbox_diagonal(f), 1e-300)
    bad = np.flatnonzero(lengths <= floor)
    if bad.size:
        e = int(bad[0])
        raise DegenerateEdge(f"edge {tuple(mesh.edges[e])} has length {lengths[e]:.3g}")
    return lengths


def _corner_vectors(mesh, f):
    P = np.asarray(f, dtype=float)[mesh.faces]           # (F, 3, n)
    a = np.roll(P, -1, axis=1) - P                        # to next corner
    b = np.roll(P, -2, axis=1) - P                        # to previous corner
    return P, a, b


def corner_cotangents(mesh, f):
    """Cotangent of every corner angle, ``<a, b> / (2 A)``."""
    _, a, b = _corner_vectors(mesh, f)
    dot = np.einsum("fcn,fcn->fc", a, b)
    area2 = np.sqrt(np.maximum(
        np.einsum("fcn,fcn->fc", a, a) * np.einsum("fcn,fcn->fc", b, b) - dot**2, 0.0))
    return dot / area2


@dataclass(frozen=True)
class GeometryCache:
    """Per-face, per-corner and per-edge measurements of one realization.

    ``dihedral`` and ``normals`` are only populated in R^3; ``dihedral`` is
    NaN on boundary edges. Dihedral angles are ``atan2(sin, cos)`` with the
    sine taken along ``e_ij``, ``i < j``; both formulas are invariant under
    edge reversal so the value is per unoriented edge.
    """

    positions: np.ndarray
    lengths: np.ndarray            # (E,)
    edge_vectors: np.ndarray       # (E, n)
    areas: np.ndarray              # (F,)
    angles: np.ndarray             # (F, 3)
    cot: np.ndarray                # (F, 3)
    circumcenters: np.ndarray      # (F, n)
    circumradii: np.ndarray        # (F,)
    normals: np.ndarray | None     # (F, 3)
    dihedral: np.ndarray | None    # (E,)
    plane_distance: np.ndarray | None  # (F,)
    scale: float                   # bounding-box diagonal

    @property
    def dim(self):
        return self.positions.shape[1]


def geometry_cache(mesh, f):
    f = np.asarray(f, dtype=float)
    scale = bbox_diagonal(f)
    dvec = edge_vectors(mesh, f)
    lengths = edge_metric(mesh, f)

    P, a, b = _corner_vectors(mesh, f)
    aa = np.einsum("fcn,fcn->fc", a, a)
    bb = np.einsum("fcn,fcn->fc", b, b)
    ab = np.einsum("fcn,fcn->fc", a, b)
    twice_area = np.sqrt(np.maximum(aa * bb - ab**2, 0.0))   # same for all corners
    areas = 0.5 * twice_area[:, 0]
    bad = np.flatnonzero(areas <= DEGENERACY_FLOOR * scale**2)
    if bad.size:
        raise DegenerateFace(f"face {int(bad[0])} {tuple(mesh.faces[bad[0]])} "
                             f"has area {areas[bad[0]]:.3g}")
    cot = ab / twice_area
    angles = np.arctan2(twice_area, ab)

    # circumcenter: solve the 2x2 Gram system in the face plane at corner 0
    a0, b0 = a[:, 0], b[:, 0]
    g11, g12, g22 = aa[:, 0], ab[:, 0], bb[:, 0]
    det = g11 * g22 - g12**2
    s = 0.5 * (g11 * g22 - g12 * g22) / det
    t = 0.5 * (g11 * g22 - g12 * g11) / det
    centers = P[:, 0] + s[:, None] * a0 + t[:, None] * b0
    radii = np.linalg.norm(centers - P[:, 0], axis=1)

    normals = dihedral = dist = None
    if f.shape[1] == 3:
        cr = np.cross(a0, b0)
        normals = cr / np.linalg.norm(cr, axis=1)[:, None]
        dist = np.einsum("fn,fn->f", normals, P[:, 0])
        dihedral = np.full(mesh.edge_count, np.nan)
        ie = mesh.interior_edges
        NL = normals[mesh.edge_faces[ie, 0]]
        NR = normals[mesh.edge_faces[ie, 1]]
        ehat = dvec[ie] / lengths[ie, None]
        sin = np.einsum("en,en->e", np.cross(NL, NR), ehat)
        cos = np.einsum("en,en->e", NL, NR)
        dihedral[ie] = np.arctan2(sin, cos)

    return GeometryCache(
        positions=f, lengths=lengths, edge_vectors=dvec, areas=areas,
        angles=angles, cot=cot, circumcenters=centers, circumradii=radii,
        normals=normals, dihedral=dihedral, plane_distance=dist, scale=scale,
    )


def _wing_lengths(mesh, lengths, e):
    i, j = mesh.edges[e]
    k, l = mesh.edge_opposite[e]
    L = lambda a, b: lengths[mesh.edge_index(a, b)[0]]
    return L(i, l), L(j, k), L(l, j), L(k, i)


def length_cross_ratios(mesh, lengths):
    """Length cross-ratio of every interior edge, in ``mesh.interior_edges`` order.

    ``lcr_ij = l_il l_jk / (l_lj l_ki)`` with ``{ijk}`` the left and
    ``{ilj}`` the right face of ``e_ij``.
    """
    lengths = np.asarray(lengths, dtype=float)
    ie = mesh.interior_edges
    i, j = mesh.edges[ie, 0], mesh.edges[ie, 1]
    k, l = mesh.edge_opposite[ie, 0], mesh.edge_opposite[ie, 1]
    idx = _pair_lookup(mesh)
    il, jk, lj, ki = idx(i, l), idx(j, k), idx(l, j), idx(k, i)
    return lengths[il] * lengths[jk] / (lengths[lj] * lengths[ki])


def _pair_lookup(mesh):
    n = mesh.vertex_count
    keys = mesh.edges[:, 0] * n + mesh.edges[:, 1]       # sorted already

    def lookup(a, b):
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        return np.searchsorted(keys, lo * n + hi)

    return lookup


def length_cross_ratio(mesh, lengths, i, j):
    """Length cross-ratio of a single edge; raises on boundary edges."""
    e, _ = mesh.edge_index(i, j)
    if mesh.boundary_edges[e]:
        raise BoundaryEdge(f"edge {(i, j)} is on the boundary")
    il, jk, lj, ki = _wing_lengths(mesh, np.asarray(lengths, float), e)
    return il * jk / (lj * ki)


def check_triangle_inequality(mesh, lengths):
    L = np.asarray(lengths, dtype=float)[mesh.face_edges]   # (F, 3)
    slack = L.sum(axis=1)[:, None] - 2 * L
    bad = np.flatnonzero((slack <= 0).any(axis=1))
    if bad.size:
        f = int(bad[0])
        raise TriangleInequalityViolated(
            f"face {f} {tuple(mesh.faces[f])} violates the triangle inequality",
            face=f,
        )


def vertex_scale(mesh, lengths, u):
    """Conformally rescale a metric: ``l_ij * exp((u_i + u_j) / 2)``."""
    u = np.asarray(u, dtype=float)
    out = np.asarray(lengths, float) * np.exp(0.5 * (u[mesh.edges[:, 0]] + u[mesh.edges[:, 1]]))
    check_triangle_inequality(mesh, out)
    return out
