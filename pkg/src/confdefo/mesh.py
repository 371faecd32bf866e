"""Combinatorics of oriented triangulated surfaces.

Edges are indexed by their sorted vertex pair in lexicographic order. An
oriented edge ``e_ij`` is addressed as ``(edge index, sign)`` with
``sign = +1`` when ``i < j``. Per-edge data are stored once, in the
``i < j`` direction: for an edge ``(i, j)`` its *left* face is the face that
traverses ``i -> j`` and its *right* face the one that traverses ``j -> i``.

The dual edge ``e*`` of an oriented edge runs from its right face to its
left face, so dual 1-forms share the same per-edge storage convention.
"""

from functools import cached_property

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .errors import (
    DisconnectedSurface,
    InconsistentOrientation,
    MeshError,
    MeshNotClosed,
    NonManifoldEdge,
    NonManifoldVertex,
    UnknownEdge,
)

__all__ = ["TriMesh", "build_mesh", "genus", "left_right_faces"]


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class TriMesh:
    """Immutable oriented triangle mesh.

    Use :func:`build_mesh` to construct one; the constructor trusts its
    arguments.

    Attributes
    ----------
    vertex_count : int
    faces : (F, 3) int array
        Oriented triples, rotated so that the smallest index comes first.
    edges : (E, 2) int array
        Sorted vertex pairs, lexicographic order.
    edge_faces : (E, 2) int array
        ``[left, right]`` faces of ``e_ij`` with ``i < j``; ``-1`` if absent.
    edge_opposite : (E, 2) int array
        Vertex opposite the edge in the left (``k``) and right (``l``) face.
    face_edges, face_edge_signs : (F, 3) int arrays
        Edge index and orientation sign of the face side running from
        corner ``c`` to corner ``c + 1``.
    """

    def __init__(self, vertex_count, faces, edges, edge_faces, edge_opposite,
                 face_edges, face_edge_signs):
        self.vertex_count = int(vertex_count)
        self.faces = _frozen(faces)
        self.edges = _frozen(edges)
        self.edge_faces = _frozen(edge_faces)
        self.edge_opposite = _frozen(edge_opposite)
        self.face_edges = _frozen(face_edges)
        self.face_edge_signs = _frozen(face_edge_signs)
        self._edge_index = {(int(i), int(j)): e for e, (i, j) in enumerate(edges)}

    def __repr__(self):
        return (f"TriMesh(V={self.vertex_count}, E={self.edge_count}, "
                f"F={self.face_count}, closed={self.is_closed})")

    @property
    def face_count(self):
        return len(self.faces)

    @property
    def edge_count(self):
        return len(self.edges)

    @cached_property
    def boundary_edges(self):
        m = (self.edge_faces < 0).any(axis=1)
        return _frozen(m)

    @cached_property
    def interior_edges(self):
        return _frozen(np.flatnonzero(~self.boundary_edges))

    @cached_property
    def boundary_vertices(self):
        m = np.zeros(self.vertex_count, dtype=bool)
        m[self.edges[self.boundary_edges].ravel()] = True
        return _frozen(m)

    @cached_property
    def interior_vertices(self):
        return _frozen(np.flatnonzero(~self.boundary_vertices))

    @property
    def is_closed(self):
        return not self.boundary_edges.any()

    @property
    def euler_characteristic(self):
        return self.vertex_count - self.edge_count + self.face_count

    def edge_index(self, i, j):
        """Return ``(edge index, sign)`` of the oriented edge ``e_ij``."""
        i, j = int(i), int(j)
        key = (i, j) if i < j else (j, i)
        try:
            e = self._edge_index[key]
        except KeyError:
            raise UnknownEdge(f"no edge between vertices {i} and {j}") from None
        return e, (1 if i < j else -1)

    @cached_property
    def vertex_stars(self):
        """Per-vertex neighbor lists, cyclically ordered by the orientation.

        For a boundary vertex the list starts and ends at its two boundary
        neighbors.
        """
        nxt = [dict() for _ in range(self.vertex_count)]
        for a, b, c in self.faces:
            nxt[a][b] = c
            nxt[b][c] = a
            nxt[c][a] = b
        stars = []
        for v in range(self.vertex_count):
            succ = nxt[v]
            starts = set(succ) - set(succ.values())
            if len(starts) > 1:
                raise NonManifoldVertex(f"vertex {v} has a non-disk neighborhood")
            start = starts.pop() if starts else min(succ)
            ring = [start]
            w = start
            while w in succ:
                w = succ[w]
                if w == start:
                    break
                ring.append(w)
            if len(ring) != len(set(succ) | set(succ.values())):
                raise NonManifoldVertex(f"vertex {v} has a non-disk neighborhood")
            stars.append(_frozen(np.array(ring, dtype=int)))
        return tuple(stars)

    @cached_property
    def vertex_faces(self):
        """Faces around each vertex as ``(face, corner)`` pairs."""
        out = [[] for _ in range(self.vertex_count)]
        for f, tri in enumerate(self.faces):
            for c, v in enumerate(tri):
                out[v].append((f, c))
        return tuple(tuple(x) for x in out)

    # -- incidence matrices (discrete exterior derivative) ------------------

    @cached_property
    def d0(self):
        """Vertex-to-edge coboundary, ``(d0 phi)_e = phi_j - phi_i``."""
        E = self.edge_count
        rows = np.repeat(np.arange(E), 2)
        cols = self.edges.ravel()
        vals = np.tile([-1.0, 1.0], E)
        return sp.csr_matrix((vals, (rows, cols)), shape=(E, self.vertex_count))

    @cached_property
    def d1(self):
        """Edge-to-face coboundary; a face's row sums its oriented sides."""
        F = self.face_count
        rows = np.repeat(np.arange(F), 3)
        return sp.csr_matrix(
            (self.face_edge_signs.ravel().astype(float),
             (rows, self.face_edges.ravel())),
            shape=(F, self.edge_count),
        )


def build_mesh(faces, vertex_count=None, require_connected=False):
    """Validate a list of oriented triangles and derive all incidences.

    Parameters
    ----------
    faces : sequence of int triples
    vertex_count : int, optional
        Defaults to ``max index + 1``. Every vertex must be used by a face.
    require_connected : bool
        Raise :class:`DisconnectedSurface` for multi-component input.
    """
    faces = np.asarray(faces, dtype=np.int64)
    if faces.ndim != 2 or faces.shape[1] != 3 or len(faces) == 0:
        raise MeshError("faces must be a non-empty (F, 3) integer array")
    if faces.min() < 0:
        raise MeshError("negative vertex index")
    if vertex_count is None:
        vertex_count = int(faces.max()) + 1
    if faces.max() >= vertex_count:
        raise MeshError("vertex index out of range")
    if np.any((faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2])
              | (faces[:, 0] == faces[:, 2])):
        raise MeshError("face with repeated vertex")
    used = np.zeros(vertex_count, dtype=bool)
    used[faces.ravel()] = True
    if not used.all():
        raise MeshError(f"vertex {int(np.argmin(used))} is not used by any face")

    # canonical cyclic rotation: smallest index first
    shift = np.argmin(faces, axis=1)
    idx = (shift[:, None] + np.arange(3)[None, :]) % 3
    faces = np.take_along_axis(faces, idx, axis=1)

    F = len(faces)
    tails = faces.ravel()
    heads = faces[:, [1, 2, 0]].ravel()
    lo = np.minimum(tails, heads)
    hi = np.maximum(tails, heads)
    pairs, inverse, counts = np.unique(
        np.stack([lo, hi], axis=1), axis=0, return_inverse=True, return_counts=True
    )
    inverse = inverse.ravel()
    if counts.max() > 2:
        e = int(np.argmax(counts))
        raise NonManifoldEdge(f"edge {tuple(pairs[e])} has {counts[e]} incident faces")

    E = len(pairs)
    signs = np.where(tails < heads, 1, -1)
    face_of = np.repeat(np.arange(F), 3)
    third = faces[:, [2, 0, 1]].ravel()
    edge_faces = np.full((E, 2), -1, dtype=np.int64)
    edge_opp = np.full((E, 2), -1, dtype=np.int64)
    slot = np.where(signs > 0, 0, 1)
    for h in range(3 * F):
        e, s = inverse[h], slot[h]
        if edge_faces[e, s] >= 0:
            raise InconsistentOrientation(
                f"faces {edge_faces[e, s]} and {face_of[h]} both traverse "
                f"edge {tuple(pairs[e])} in the same direction"
            )
        edge_faces[e, s] = face_of[h]
        edge_opp[e, s] = third[h]

    mesh = TriMesh(
        vertex_count, faces, pairs, edge_faces, edge_opp,
        inverse.reshape(F, 3), signs.reshape(F, 3),
    )
    mesh.vertex_stars  # validates vertex neighborhoods
    if require_connected:
        ncomp, _ = connected_components(mesh.d0.T @ mesh.d0, directed=False)
        if ncomp > 1:
            raise DisconnectedSurface(f"surface has {ncomp} components")
    return mesh


def genus(mesh):
    """Genus of a closed connected surface from its Euler characteristic."""
    if not mesh.is_closed:
        raise MeshNotClosed("genus is only defined here for closed meshes")
    ncomp, _ = connected_components(mesh.d0.T @ mesh.d0, directed=False)
    if ncomp > 1:
        raise DisconnectedSurface(f"surface has {ncomp} components")
    chi = mesh.euler_characteristic
    return (2 - chi) // 2


def left_right_faces(mesh, i, j):
    """Left face ``{ijk}`` and right face ``{ilj}`` of ``e_ij`` (``None`` if absent)."""
    e, s = mesh.edge_index(i, j)
    left, right = mesh.edge_faces[e] if s > 0 else mesh.edge_faces[e][::-1]
    return (int(left) if left >= 0 else None, int(right) if right >= 0 else None)
