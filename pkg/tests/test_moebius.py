import numpy as np
import pytest

from confdefo.conformal import conformal_space, isometric_space, rigidity_matrix, scale_factor_of
from confdefo.errors import NotIsometric, NotOnSphere, SingularVertex
from confdefo.geometry import edge_metric, length_cross_ratios
from confdefo.mesh import build_mesh
from confdefo.moebius import (
    Compose,
    Dilation,
    Inversion,
    StereographicLift,
    Translation,
    correspondence_check,
    lift,
    pushforward,
    tangent_projection,
)

from conftest import random_conformal, zoo

MAPS = [
    Inversion(),
    Translation((0.5, -1.0, 2.0)),
    Dilation(3.0),
    Compose((Translation((0.2, 0.1, 0.0)), Inversion(), Dilation(0.5))),
]


@pytest.fixture(scope="module")
def shifted():
    m, f = zoo("perturbed", base="icosahedron", seed=9, magnitude=0.05)
    return m, f + np.array([0.25, -0.1, 0.3])


@pytest.mark.parametrize("phi", MAPS, ids=lambda p: type(p).__name__)
def test_pushforward_stays_conformal(shifted, phi, rng):
    m, f = shifted
    fdot = random_conformal(m, f, rng)
    u, _ = scale_factor_of(m, f, fdot)
    F, W = pushforward(phi, f, fdot)
    u2, res = scale_factor_of(m, F, W)
    assert np.abs(res).max() < 1e-10 * np.abs(W).max()
    np.testing.assert_allclose(u2, phi.scale_factor(f, fdot, u), atol=1e-9)


def test_inversion_scale_factor_formula(shifted, rng):
    m, f = shifted
    fdot = random_conformal(m, f, rng)
    u, _ = scale_factor_of(m, f, fdot)
    W = Inversion().pushforward(f, fdot)
    expected = u - 2 * np.einsum("vn,vn->v", fdot, f) / np.einsum("vn,vn->v", f, f)
    np.testing.assert_allclose(scale_factor_of(m, Inversion().apply(f), W)[0], expected, atol=1e-9)
    # the radial field flips its scale factor under inversion
    np.testing.assert_allclose(scale_factor_of(m, Inversion().apply(f), Inversion().pushforward(f, f))[0], -1, atol=1e-12)


def test_inversion_is_involution(shifted, rng):
    m, f = shifted
    inv = Inversion()
    v = rng.normal(size=f.shape)
    np.testing.assert_allclose(inv.apply(inv.apply(f)), f, atol=1e-14)
    np.testing.assert_allclose(inv.pushforward(inv.apply(f), inv.pushforward(f, v)), v, atol=1e-13)


def test_pushforward_matches_finite_difference(shifted, rng):
    m, f = shifted
    v = rng.normal(size=f.shape)
    eps = 1e-6
    for phi in MAPS + [StereographicLift()]:
        fd = (phi.apply(f + eps * v) - phi.apply(f - eps * v)) / (2 * eps)
        np.testing.assert_allclose(phi.pushforward(f, v), fd, atol=1e-7)


def test_inversion_singular():
    with pytest.raises(SingularVertex):
        Inversion().apply(np.zeros((3, 3)))


@pytest.mark.parametrize("phi", MAPS + [StereographicLift()], ids=lambda p: type(p).__name__)
def test_lcr_invariance(shifted, phi):
    m, f = shifted
    a = length_cross_ratios(m, edge_metric(m, f))
    b = length_cross_ratios(m, edge_metric(m, phi.apply(f)))
    np.testing.assert_allclose(a, b, rtol=1e-10)


def test_stereographic_lift_of_grid_is_on_sphere():
    n = 5
    xs = np.linspace(-1, 1, n)
    pts = np.array([(x, y) for y in xs for x in xs])
    F = StereographicLift().apply(pts)
    assert F.shape == (25, 3)
    np.testing.assert_allclose(np.linalg.norm(F, axis=1), 1, atol=1e-15)


def test_tangent_projection_of_rotation(octahedron):
    m, f = octahedron
    w = np.array([0.1, 0.7, -0.2])
    v = np.cross(w, f)
    vt, u = tangent_projection(m, f, v)
    np.testing.assert_allclose(u, -np.einsum("vn,vn->v", v, f), atol=1e-15)
    assert np.abs(np.einsum("vn,vn->v", vt, f)).max() < 1e-15
    u2, res = scale_factor_of(m, f, vt)
    np.testing.assert_allclose(u2, u, atol=1e-14)


def test_tangent_projection_zero_and_round_trip(octahedron, rng):
    m, f = octahedron
    vt, u = tangent_projection(m, f, np.zeros_like(f))
    assert not vt.any() and not u.any()
    iso = isometric_space(m, f).basis
    v = (iso @ rng.normal(size=iso.shape[1])).reshape(f.shape)
    vt, u = tangent_projection(m, f, v)
    np.testing.assert_allclose(lift(f, vt, u), v, atol=1e-12)
    # projecting a lifted tangent conformal field gives it back
    u2, _ = scale_factor_of(m, f, vt)
    vt2, u3 = tangent_projection(m, f, lift(f, vt, u2))
    np.testing.assert_allclose(vt2, vt, atol=1e-12)
    np.testing.assert_allclose(u3, u2, atol=1e-12)


def test_tangent_projection_preconditions(octahedron, rng):
    m, f = octahedron
    with pytest.raises(NotOnSphere):
        tangent_projection(m, 2 * f, np.zeros_like(f))
    with pytest.raises(NotIsometric):
        tangent_projection(m, f, rng.normal(size=f.shape))


@pytest.mark.parametrize("name", ["tetrahedron", "octahedron"])
def test_correspondence_spheres(name):
    m, f = zoo(name)
    r = correspondence_check(m, f)
    assert r.equal and r.bijection_residual < 1e-9
    if name == "tetrahedron":
        assert r.conformal_dim == 10


def test_correspondence_planar_grid():
    n = 5
    pts = np.array([(x, y) for y in range(n) for x in range(n)], float) / (n - 1) - 0.5
    faces = []
    for y in range(n - 1):
        for x in range(n - 1):
            a = y * n + x
            faces += [(a, a + 1, a + n + 1), (a, a + n + 1, a + n)]
    m = build_mesh(faces)
    r = correspondence_check(m, pts)
    assert r.equal and r.bijection_residual < 1e-9
    assert r.conformal_dim == conformal_space(m, pts).dimension
