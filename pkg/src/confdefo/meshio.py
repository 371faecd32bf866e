"""ASCII OFF and OBJ readers/writers for triangle meshes.

Positions with other than 3 components use an OFF header line
``OFF nDIM <n>``; the geomview ``nOFF`` form (dimension on the next line)
is accepted on input too.
"""

from pathlib import Path

import numpy as np

from .errors import NonTriangleFace, ParseError
from .mesh import build_mesh


def _tokens(text):
    """Yield ``(line number, tokens)`` skipping blanks and comments."""
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield n, line.split()


def _fmt(x):
    return repr(float(x))


def parse_off(text):
    lines = _tokens(text)
    try:
        n, head = next(lines)
    except StopIteration:
        raise ParseError("empty file") from None
    dim = 3
    key = head[0]
    rest = head[1:]
    if key == "OFF":
        if rest[:1] == ["nDIM"]:
            if len(rest) < 2:
                raise ParseError("nDIM without a dimension", n)
            dim = _int(rest[1], n)
            rest = rest[2:]
    elif key == "nOFF":
        if not rest:
            n, rest = next(lines, (n, []))
        if not rest:
            raise ParseError("missing dimension after nOFF", n)
        dim = _int(rest[0], n)
        rest = rest[1:]
    else:
        raise ParseError(f"expected OFF header, got {key!r}", n)
    if not rest:
        try:
            n, rest = next(lines)
        except StopIteration:
            raise ParseError("missing counts line", n) from None
    if len(rest) < 2:
        raise ParseError("counts line needs vertex and face counts", n)
    nv, nf = _int(rest[0], n), _int(rest[1], n)

    pos = np.empty((nv, dim))
    for v in range(nv):
        try:
            n, tok = next(lines)
        except StopIteration:
            raise ParseError(f"expected {nv} vertices, got {v}", n) from None
        if len(tok) < dim:
            raise ParseError(f"vertex needs {dim} coordinates", n)
        try:
            pos[v] = [float(t) for t in tok[:dim]]
        except ValueError:
            raise ParseError(f"bad coordinate in {tok!r}", n) from None
    faces = []
    for _ in range(nf):
        try:
            n, tok = next(lines)
        except StopIteration:
            raise ParseError(f"expected {nf} faces, got {len(faces)}", n) from None
        k = _int(tok[0], n)
        if k != 3:
            raise NonTriangleFace(f"face with {k} vertices", n)
        if len(tok) < 4:
            raise ParseError("truncated face", n)
        faces.append([_int(t, n) for t in tok[1:4]])
    return faces, pos


def _int(tok, line):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", line) from None


def format_off(mesh, positions):
    positions = np.asarray(positions, dtype=float)
    dim = positions.shape[1]
    out = ["OFF" if dim == 3 else f"OFF nDIM {dim}",
           f"{mesh.vertex_count} {mesh.face_count} {mesh.edge_count}"]
    out += [" ".join(_fmt(x) for x in p) for p in positions]
    out += ["3 " + " ".join(str(int(v)) for v in tri) for tri in mesh.faces]
    return "\n".join(out) + "\n"


def load_off(path):
    """Read an OFF file into ``(TriMesh, positions)``."""
    faces, pos = parse_off(Path(path).read_text())
    return build_mesh(faces, vertex_count=len(pos)), pos


def save_off(path, mesh, positions):
    Path(path).write_text(format_off(mesh, positions))


def parse_obj(text):
    verts, faces = [], []
    for n, tok in _tokens(text):
        if tok[0] == "v":
            try:
                verts.append([float(t) for t in tok[1:]])
            except ValueError:
                raise ParseError(f"bad vertex {tok!r}", n) from None
        elif tok[0] == "f":
            if len(tok) != 4:
                raise NonTriangleFace(f"face with {len(tok) - 1} vertices", n)
            # "f 1/2/3 ..." keeps only the position index
            faces.append([_int(t.split("/")[0], n) - 1 for t in tok[1:]])
    if not verts:
        raise ParseError("no vertices")
    dims = {len(v) for v in verts}
    if len(dims) != 1:
        raise ParseError("vertices with differing dimensions")
    return faces, np.array(verts)


def format_obj(mesh, positions):
    out = ["v " + " ".join(_fmt(x) for x in p) for p in np.asarray(positions, float)]
    out += ["f " + " ".join(str(int(v) + 1) for v in tri) for tri in mesh.faces]
    return "\n".join(out) + "\n"


def load_obj(path):
    faces, pos = parse_obj(Path(path).read_text())
    return build_mesh(faces, vertex_count=len(pos)), pos


def save_obj(path, mesh, positions):
    Path(path).write_text(format_obj(mesh, positions))


def load_mesh(path):
    """Dispatch on file suffix (``.off`` or ``.obj``)."""
    suffix = Path(path).suffix.lower()
    if suffix == ".obj":
        return load_obj(path)
    return load_off(path)


def save_mesh(path, mesh, positions, fmt=None):
    fmt = fmt or Path(path).suffix.lower().lstrip(".") or "off"
    if fmt == "obj":
        save_obj(path, mesh, positions)
    else:
        save_off(path, mesh, positions)
