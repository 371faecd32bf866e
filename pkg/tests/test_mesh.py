import itertools

import numpy as np
import pytest

from confdefo.errors import (
    DisconnectedSurface,
    InconsistentOrientation,
    MeshError,
    MeshNotClosed,
    NonManifoldEdge,
    UnknownEdge,
)
from confdefo.mesh import build_mesh, genus, left_right_faces

from conftest import zoo

TET = [(0, 1, 2), (0, 3, 1), (1, 3, 2), (2, 3, 0)]


def test_tetrahedron_counts():
    m = build_mesh(TET)
    assert (m.vertex_count, m.edge_count, m.face_count) == (4, 6, 4)
    assert m.is_closed and genus(m) == 0


def test_single_triangle_is_all_boundary():
    m = build_mesh([(0, 1, 2)])
    assert m.boundary_edges.sum() == 3
    assert len(m.interior_edges) == 0
    assert not m.is_closed
    with pytest.raises(MeshNotClosed):
        genus(m)


def test_octahedron_incidences_by_brute_force(octahedron):
    m, _ = octahedron
    edges = {tuple(sorted(p)) for t in m.faces for p in itertools.combinations(t, 2)}
    assert m.edge_count == len(edges) == 12
    assert 3 * m.face_count == 2 * m.edge_count


def test_torus_genus():
    m, _ = zoo("torus", 8, 8)
    assert m.euler_characteristic == 0
    assert genus(m) == 1


def test_genus_two():
    m, _ = zoo("holey_slab", 2)
    assert genus(m) == 2


def test_left_right_swap_under_reversal(octahedron):
    m, _ = octahedron
    for i, j in m.edges:
        L, R = left_right_faces(m, i, j)
        assert L is not None and R is not None and L != R
        assert left_right_faces(m, j, i) == (R, L)
        assert (i, j) in _sides(m.faces[L])
        assert (j, i) in _sides(m.faces[R])


def _sides(t):
    return [(t[c], t[(c + 1) % 3]) for c in range(3)]


def test_boundary_edge_has_no_right_face(disk):
    m, _ = disk
    e = int(np.flatnonzero(m.boundary_edges)[0])
    i, j = m.edges[e]
    L, R = left_right_faces(m, i, j)
    assert (L is None) != (R is None)


def test_tetrahedron_left_right_cover_each_face_three_times():
    m = build_mesh(TET)
    count = np.zeros(m.face_count, int)
    for i, j in m.edges:
        for face in left_right_faces(m, i, j):
            count[face] += 1
    assert (count == 3).all()


def test_cyclic_rotation_is_same_face():
    a = build_mesh(TET)
    b = build_mesh([(t[1], t[2], t[0]) for t in TET])
    np.testing.assert_array_equal(a.faces, b.faces)
    np.testing.assert_array_equal(a.edges, b.edges)


def test_deterministic_indexing(octahedron):
    m, _ = octahedron
    again = build_mesh(m.faces.tolist())
    np.testing.assert_array_equal(m.edges, again.edges)
    np.testing.assert_array_equal(m.edge_faces, again.edge_faces)


def test_star_sizes_sum_to_twice_edges(octahedron):
    m, _ = octahedron
    assert sum(len(s) for s in m.vertex_stars) == 2 * m.edge_count


def test_stars_are_cyclic_and_oriented(octahedron):
    m, _ = octahedron
    faces = {tuple(int(x) for x in np.roll(t, -k)) for t in m.faces for k in range(3)}
    for i, star in enumerate(m.vertex_stars):
        for a, b in zip(star, np.roll(star, -1)):
            assert (i, int(a), int(b)) in faces


def test_d1_d0_is_zero(octahedron):
    m, _ = octahedron
    assert abs((m.d1 @ m.d0).toarray()).max() == 0


def test_errors():
    with pytest.raises(NonManifoldEdge):
        build_mesh([(0, 1, 2), (0, 1, 3), (0, 1, 4)])
    with pytest.raises(InconsistentOrientation):
        build_mesh([(0, 1, 2), (0, 1, 3)])
    with pytest.raises(DisconnectedSurface):
        build_mesh([(0, 1, 2), (3, 4, 5)], require_connected=True)
    with pytest.raises(MeshError):
        build_mesh([(0, 0, 1)])
    with pytest.raises(UnknownEdge):
        build_mesh(TET).edge_index(0, 7)
