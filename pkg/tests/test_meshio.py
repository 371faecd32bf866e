import numpy as np
import pytest

from confdefo.errors import NonTriangleFace, ParseError
from confdefo.meshio import (
    format_obj,
    format_off,
    load_mesh,
    load_off,
    parse_obj,
    parse_off,
    save_mesh,
    save_off,
)

from conftest import zoo


def test_off_round_trip_is_bitwise(tmp_path, octahedron):
    m, f = octahedron
    g = f + np.random.default_rng(0).normal(scale=1e-3, size=f.shape)
    save_off(tmp_path / "o.off", m, g)
    m2, g2 = load_off(tmp_path / "o.off")
    assert np.array_equal(g, g2)
    np.testing.assert_array_equal(m.faces, m2.faces)


def test_obj_round_trip(tmp_path, jessen):
    m, f = jessen
    save_mesh(tmp_path / "j.obj", m, f)
    m2, f2 = load_mesh(tmp_path / "j.obj")
    assert np.array_equal(f, f2)
    assert (m2.vertex_count, m2.edge_count, m2.face_count) == (12, 30, 20)


def test_jessen_off_counts(jessen):
    m, f = jessen
    faces, pos = parse_off(format_off(m, f))
    assert pos.shape == (12, 3) and len(faces) == 20


def test_quad_face_rejected():
    text = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n"
    with pytest.raises(NonTriangleFace):
        parse_off(text)


def test_higher_dimension_header():
    m, f = zoo("tetrahedron")
    F = np.hstack([f, np.ones((4, 1))])
    text = format_off(m, F)
    assert text.startswith("OFF nDIM 4")
    _, pos = parse_off(text)
    assert pos.shape == (4, 4)
    _, pos = parse_off("nOFF\n2\n3 1 0\n0 0\n1 0\n0 1\n3 0 1 2\n")
    assert pos.shape == (3, 2)


@pytest.mark.parametrize("text, line", [
    ("", None),
    ("PLY\n", 1),
    ("OFF\n3 1\n0 0 0\n1 0\n", 4),
    ("OFF\n3 1\n0 0 0\n1 0 0\n0 1 0\n3 0 1 x\n", 6),
])
def test_parse_errors_carry_lines(text, line):
    with pytest.raises(ParseError) as info:
        parse_off(text)
    assert info.value.line == line


def test_obj_slash_indices():
    faces, pos = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1/1/1 2/2/2 3/3/3\n")
    assert faces == [[0, 1, 2]]


def test_obj_writer_is_one_based(tetrahedron):
    m, f = tetrahedron
    text = format_obj(m, f)
    assert "f 1 " in text or " 1\n" in text
    faces, pos = parse_obj(text)
    np.testing.assert_array_equal(np.sort(faces, axis=None), np.sort(m.faces, axis=None))
