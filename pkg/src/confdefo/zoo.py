"""Deterministic generators for named example surfaces.

Named polyhedra are checked after generation against the properties they
are supposed to have (inscribed, right dihedral angles, flexibility), so a
coordinate slip fails loudly instead of silently changing a test's meaning.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRealization, GenerationFailed
from .mesh import build_mesh

NAMES = ("tetrahedron", "octahedron", "icosahedron", "jessen", "bricard",
         "uv_sphere", "planar_disk", "torus", "holey_slab", "perturbed")


@dataclass(frozen=True)
class ZooSpec:
    """What to generate. ``params`` are name-specific integers.

    ``uv_sphere``: ``(n_lon, n_lat)``; ``planar_disk``: ``(rings,)``;
    ``torus``: ``(nu, nv)``; ``holey_slab``: ``(holes,)``;
    ``perturbed``: wraps ``base`` with ``seed`` and ``magnitude``.
    """

    name: str
    params: tuple = ()
    base: "ZooSpec | None" = None
    seed: int = 0
    magnitude: float = 1e-2
    inscribed: bool = False


def _outward(faces, pos):
    """Flip faces of a star-shaped closed surface so normals point away from 0."""
    faces = np.array(faces)
    P = pos[faces]
    n = np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0])
    flip = np.einsum("fn,fn->f", n, P.mean(axis=1)) < 0
    faces[flip] = faces[flip][:, [0, 2, 1]]
    return faces


def tetrahedron():
    pos = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], float) / np.sqrt(3)
    faces = [[0, 1, 2], [0, 3, 1], [1, 3, 2], [2, 3, 0]]
    return build_mesh(_outward(faces, pos)), pos


_OCTA_FACES = [[0, 2, 4], [2, 1, 4], [1, 3, 4], [3, 0, 4],
               [2, 0, 5], [1, 2, 5], [3, 1, 5], [0, 3, 5]]


def octahedron():
    pos = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], float)
    return build_mesh(_OCTA_FACES), pos


def _icosahedron_raw(tau):
    pos = []
    for s1 in (1, -1):
        for s2 in (1, -1):
            pos += [[0, s1, s2 * tau], [s2 * tau, 0, s1], [s1, s2 * tau, 0]]
    pos = np.array(pos, float)
    # faces of the regular icosahedron: triples of mutually nearest vertices
    phi = (1 + np.sqrt(5)) / 2
    reg = np.array([[0, p[1], p[2] / tau * phi] if p[0] == 0 else
                    [p[0] / tau * phi, 0, p[2]] if p[1] == 0 else
                    [p[0], p[1] / tau * phi, 0] for p in pos])
    d = np.linalg.norm(reg[:, None] - reg[None], axis=2)
    adj = np.isclose(d, 2.0)
    faces = [(a, b, c) for a in range(12) for b in range(a + 1, 12) for c in range(b + 1, 12)
             if adj[a, b] and adj[b, c] and adj[a, c]]
    return pos, _outward(faces, reg)


def icosahedron():
    phi = (1 + np.sqrt(5)) / 2
    pos, faces = _icosahedron_raw(phi)
    pos = pos / np.linalg.norm(pos, axis=1)[:, None]
    return build_mesh(faces), pos


def _flip(faces, a, b):
    """Replace edge ab by the other diagonal of its two triangles."""
    faces = [tuple(t) for t in faces]
    left = right = None
    for t in faces:
        for c in range(3):
            if (t[c], t[(c + 1) % 3]) == (a, b):
                left = (t, t[(c + 2) % 3])
            elif (t[c], t[(c + 1) % 3]) == (b, a):
                right = (t, t[(c + 2) % 3])
    (tl, c), (tr, d) = left, right
    faces.remove(tl)
    faces.remove(tr)
    return faces + [(a, d, c), (d, b, c)]


def jessen():
    """Jessen's orthogonal icosahedron.

    Icosahedron combinatorics on the (0, +-1, +-2) cyclic orbit, with the
    six edges joining (0, 1, s) to (0, -1, s) (and cyclic images) flipped.
    """
    pos, faces = _icosahedron_raw(2.0)
    faces = [tuple(t) for t in faces]
    # pairs differing only in the sign of their unit coordinate
    diff = pos[:, None] - pos[None]
    short = [(a, b) for a in range(12) for b in range(a + 1, 12)
             if np.count_nonzero(diff[a, b]) == 1 and np.abs(diff[a, b]).max() == 2]
    for a, b in short:
        oriented = next((x, y) for t in faces for x, y in zip(t, t[1:] + t[:1])
                        if {x, y} == {a, b})
        faces = _flip(faces, *oriented)
    mesh = build_mesh(faces)
    _check_jessen(mesh, pos)
    return mesh, pos


def _check_jessen(mesh, pos):
    from .geometry import geometry_cache

    if mesh.edge_count != 30 or not np.allclose(np.linalg.norm(pos, axis=1), np.sqrt(5)):
        raise GenerationFailed("jessen: wrong combinatorics or not inscribed")
    g = geometry_cache(mesh, pos)
    if not np.allclose(np.abs(g.dihedral), np.pi / 2, atol=1e-12):
        raise GenerationFailed("jessen: dihedral angles are not right angles")


def bricard(seed=0, max_tries=50):
    """Line-symmetric (type 1) Bricard octahedron with vertices on the unit sphere.

    Three seeded random unit vectors ``A, B, C`` and their half-turns about
    the z-axis form the three opposite-vertex pairs. Every vertex is on the
    unit sphere by construction; flexibility is checked numerically.
    """
    from .conformal import isometric_space

    rng = np.random.default_rng(seed)
    mesh = build_mesh(_OCTA_FACES)
    for _ in range(max_tries):
        abc = rng.normal(size=(3, 3))
        abc /= np.linalg.norm(abc, axis=1)[:, None]
        half = abc * np.array([-1, -1, 1])
        pos = np.array([abc[0], half[0], abc[1], half[1], abc[2], half[2]])
        try:
            if isometric_space(mesh, pos).nullity >= 7 and _well_shaped(mesh, pos):
                return mesh, pos
        except DegenerateRealization:
            continue
    raise GenerationFailed("bricard: no admissible configuration found")


def _well_shaped(mesh, pos, min_angle=0.15):
    from .geometry import geometry_cache

    g = geometry_cache(mesh, pos)
    return g.angles.min() > min_angle


def uv_sphere(n_lon=8, n_lat=6):
    """Latitude/longitude sphere with two poles, inscribed in the unit sphere."""
    if n_lon < 3 or n_lat < 2:
        raise GenerationFailed("uv_sphere needs n_lon >= 3 and n_lat >= 2")
    pos = [[0.0, 0.0, 1.0]]
    for r in range(1, n_lat):
        theta = np.pi * r / n_lat
        for c in range(n_lon):
            phi = 2 * np.pi * c / n_lon
            pos.append([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    pos.append([0.0, 0.0, -1.0])
    pos = np.array(pos)
    south = len(pos) - 1
    ring = lambda r, c: 1 + (r - 1) * n_lon + c % n_lon
    faces = [[0, ring(1, c), ring(1, c + 1)] for c in range(n_lon)]
    for r in range(1, n_lat - 1):
        for c in range(n_lon):
            a, b = ring(r, c), ring(r, c + 1)
            a2, b2 = ring(r + 1, c), ring(r + 1, c + 1)
            faces += [[a, a2, b2], [a, b2, b]]
    faces += [[south, ring(n_lat - 1, c + 1), ring(n_lat - 1, c)] for c in range(n_lon)]
    return build_mesh(_outward(faces, pos)), pos


def planar_disk(rings=2):
    """Hexagonal patch of the triangular lattice in the plane z = 0."""
    if rings < 1:
        raise GenerationFailed("planar_disk needs at least one ring")
    ax = {}
    for q in range(-rings, rings + 1):
        for r in range(max(-rings, -q - rings), min(rings, -q + rings) + 1):
            ax[(q, r)] = len(ax)
    pos = np.array([[q + 0.5 * r, np.sqrt(3) / 2 * r, 0.0] for q, r in ax])
    faces = []
    for (q, r), v in ax.items():
        for a, b in (((q + 1, r), (q, r + 1)), ((q, r + 1), (q - 1, r + 1))):
            if a in ax and b in ax:
                faces.append([v, ax[a], ax[b]])
    return build_mesh(faces), pos


def torus(nu=8, nv=8, R=2.0, r=1.0):
    """Torus of revolution sampled on an ``nu x nv`` grid, quads split along a diagonal."""
    if nu < 3 or nv < 3:
        raise GenerationFailed("torus needs nu, nv >= 3")
    idx = lambda i, j: (i % nu) * nv + j % nv
    pos = np.empty((nu * nv, 3))
    for i in range(nu):
        for j in range(nv):
            a, b = 2 * np.pi * i / nu, 2 * np.pi * j / nv
            pos[idx(i, j)] = [(R + r * np.cos(b)) * np.cos(a), (R + r * np.cos(b)) * np.sin(a),
                              r * np.sin(b)]
    faces = []
    for i in range(nu):
        for j in range(nv):
            faces += [[idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)],
                      [idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]]
    return build_mesh(faces), pos


def holey_slab(holes=2):
    """Boundary of a one-cube-thick slab of unit cubes with ``holes`` square holes.

    Genus equals ``holes``; square sides are split into two triangles.
    """
    if holes < 1:
        raise GenerationFailed("holey_slab needs at least one hole")
    nx, ny = 2 * holes + 1, 3
    cubes = {(x, y, 0) for x in range(nx) for y in range(ny)}
    cubes -= {(2 * h + 1, 1, 0) for h in range(holes)}
    verts, faces = {}, []

    def vid(p):
        return verts.setdefault(p, len(verts))

    dirs = [((1, 0, 0), (0, 1, 0), (0, 0, 1)), ((-1, 0, 0), (0, 0, 1), (0, 1, 0)),
            ((0, 1, 0), (0, 0, 1), (1, 0, 0)), ((0, -1, 0), (1, 0, 0), (0, 0, 1)),
            ((0, 0, 1), (1, 0, 0), (0, 1, 0)), ((0, 0, -1), (0, 1, 0), (1, 0, 0))]
    for c in sorted(cubes):
        for n, s, t in dirs:
            if tuple(np.add(c, n)) in cubes:
                continue
            # outward quad on the cube side facing n, counter-clockwise seen from outside
            base = np.add(c, np.maximum(n, 0))
            q = [tuple(base), tuple(base + s), tuple(base + np.add(s, t)), tuple(base + t)]
            a, b, cc, d = (vid(p) for p in q)
            faces += [[a, b, cc], [a, cc, d]]
    pos = np.array(sorted(verts, key=verts.get), float)
    return build_mesh(faces), pos


def perturbed(base_mesh, base_pos, seed=0, magnitude=1e-2, inscribed=False):
    """Seeded random perturbation of a realization, optionally re-inscribed."""
    rng = np.random.default_rng(seed)
    pos = base_pos + magnitude * rng.standard_normal(base_pos.shape)
    if inscribed:
        pos /= np.linalg.norm(pos, axis=1)[:, None]
    return base_mesh, pos


_BUILDERS = {
    "tetrahedron": tetrahedron,
    "octahedron": octahedron,
    "icosahedron": icosahedron,
    "jessen": jessen,
    "uv_sphere": uv_sphere,
    "planar_disk": planar_disk,
    "torus": torus,
    "holey_slab": holey_slab,
}


def generate(spec):
    """Build ``(TriMesh, positions)`` for a :class:`ZooSpec` (or a bare name)."""
    if isinstance(spec, str):
        spec = ZooSpec(spec)
    if spec.name == "perturbed":
        if spec.base is None:
            raise GenerationFailed("perturbed needs a base spec")
        m, p = generate(spec.base)
        return perturbed(m, p, spec.seed, spec.magnitude, spec.inscribed)
    if spec.name == "bricard":
        return bricard(seed=spec.seed)
    try:
        builder = _BUILDERS[spec.name]
    except KeyError:
        raise GenerationFailed(f"unknown zoo name {spec.name!r}") from None
    return builder(*spec.params)
