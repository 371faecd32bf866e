import numpy as np
import pytest

from confdefo.conformal import deformation_rates, nontrivial_flexes, recover_Z, rates
from confdefo.dirac import (
    dirac_adjoint_apply,
    dirac_apply,
    dirac_matrix,
    dual_solve,
    edge_frames,
    from_frames,
    inscribed_closed_form,
    kernel,
    laplacian_factorization,
    solve_dirac,
    solve_from_rho,
    trivial_kernel,
)
from confdefo.errors import KernelTooLarge, MeshNotClosed, NotConformal, NotSphere, RhoSumNonzero
from confdefo.geometry import geometry_cache

from conftest import random_conformal, zoo


def _rand(mesh, rng):
    V, F, E = mesh.vertex_count, mesh.face_count, len(mesh.interior_edges)
    return rng.normal(size=V), rng.normal(size=(F, 3)), rng.normal(size=V), rng.normal(size=(E, 2))


def test_frames_orthonormal_and_perpendicular(bumpy_octahedron):
    m, f = bumpy_octahedron
    B = edge_frames(m, f)
    np.testing.assert_allclose(np.einsum("emn,eln->eml", B, B), np.broadcast_to(np.eye(2), (12, 2, 2)), atol=1e-14)
    d = geometry_cache(m, f).edge_vectors
    assert np.abs(np.einsum("emn,en->em", B, d)).max() < 1e-14


def test_similarities_in_kernel(bumpy_octahedron):
    m, f = bumpy_octahedron
    rho, U = dirac_apply(m, f, np.full(6, 2.5), np.zeros((8, 3)))
    assert np.abs(rho).max() < 1e-14 and np.abs(U).max() < 1e-14
    rho, U = dirac_apply(m, f, np.zeros(6), np.tile([1.0, -2, 0.5], (8, 1)))
    assert np.abs(rho).max() < 1e-14 and np.abs(U).max() < 1e-14
    Dm = dirac_matrix(m, f)
    assert np.abs(Dm @ trivial_kernel(m)).max() < 1e-14


def test_image_sums_vanish(octahedron, rng):
    m, f = octahedron
    u, Z, _, _ = _rand(m, rng)
    rho, U = dirac_apply(m, f, u, Z, frames=False)
    assert abs(rho.sum()) < 1e-13
    assert np.abs(U.sum(axis=0)).max() < 1e-13


def test_matrix_matches_formula(bumpy_octahedron, rng):
    m, f = bumpy_octahedron
    Dm = dirac_matrix(m, f)
    assert Dm.shape == (6 + 24, 6 + 24)
    u, Z, _, _ = _rand(m, rng)
    rho, U = dirac_apply(m, f, u, Z)
    np.testing.assert_allclose(Dm @ np.concatenate([u, Z.ravel()]), np.concatenate([rho, U.ravel()]), atol=1e-13)


def test_adjoint_matrix_is_transpose(bumpy_octahedron):
    m, f = bumpy_octahedron
    Dm = dirac_matrix(m, f).toarray()
    V, E = m.vertex_count, m.edge_count
    cols = []
    for k in range(Dm.shape[0]):
        y = np.eye(Dm.shape[0])[k]
        rt, Y = dirac_adjoint_apply(m, f, y[:V], y[V:].reshape(E, 2))
        cols.append(np.concatenate([rt, Y.ravel()]))
    np.testing.assert_allclose(np.array(cols), Dm, atol=1e-14)


def test_adjoint_kills_constants(bumpy_octahedron):
    m, f = bumpy_octahedron
    B = edge_frames(m, f)
    w = np.array([0.3, -0.4, 1.1])
    W = np.einsum("emn,n->em", B, w)          # perpendicular part of w
    rt, Y = dirac_adjoint_apply(m, f, np.full(6, 1.7), W)
    assert np.abs(rt).max() < 1e-13 and np.abs(Y).max() < 1e-13


def test_adjoint_requires_closed(disk):
    m, f = disk
    with pytest.raises(MeshNotClosed):
        dirac_adjoint_apply(m, f, np.zeros(m.vertex_count), np.zeros((len(m.interior_edges), 2)))


def test_boundary_mesh_rows(disk, rng):
    m, f = disk
    Dm = dirac_matrix(m, f)
    assert Dm.shape == (len(m.interior_vertices) + 2 * len(m.interior_edges), m.vertex_count + 3 * m.face_count)
    rho, _ = dirac_apply(m, f, rng.normal(size=m.vertex_count), rng.normal(size=(m.face_count, 3)))
    assert np.isnan(rho[m.boundary_vertices]).all()


def test_factorization_closed_form(rng):
    for name in ("octahedron", "icosahedron"):
        m, f = zoo("perturbed", base=name, seed=5, magnitude=0.05)
        a = rng.normal(size=m.vertex_count)
        (rho, U), (rho_f, U_f) = laplacian_factorization(m, f, a)
        np.testing.assert_allclose(rho, rho_f, atol=1e-12)
        np.testing.assert_allclose(U, U_f, atol=1e-12)


def test_deformation_is_dirac_kernel_plus_rho(bumpy_octahedron, rng):
    # (u, Z) of a conformal deformation satisfies D(u, Z) = (rho, 0)
    m, f = bumpy_octahedron
    fdot = random_conformal(m, f, rng)
    u, Z, r = deformation_rates(m, f, fdot)
    rho, U = dirac_apply(m, f, u, Z)
    np.testing.assert_allclose(rho, r.rho, atol=1e-12)
    assert np.abs(U).max() < 1e-12


@pytest.mark.parametrize("name, dim, status", [
    ("octahedron", 4, "trivial"),
    ("icosahedron", 4, "trivial"),
    ("jessen", 5, "nontrivial"),
])
def test_kernel(name, dim, status):
    m, f = zoo(name)
    k = kernel(m, f)
    assert k.dim == dim and k.status == status
    np.testing.assert_allclose(k.basis[:, :4], trivial_kernel(m), atol=0)
    assert np.abs(dirac_matrix(m, f) @ k.basis).max() < 1e-12
    assert len(k.window) == 5


def test_kernel_of_flexible_mesh_contains_flex(jessen):
    # an isometric flex with zero rho gives (0, Z) in the kernel
    m, f = jessen
    v = nontrivial_flexes(m, f)[:, 0].reshape(f.shape)
    Z = recover_Z(m, f, v, np.zeros(12))
    rho, U = dirac_apply(m, f, np.zeros(12), Z)
    assert np.abs(rho).max() < 1e-12 and np.abs(U).max() < 1e-12


def test_solve_from_rho(octahedron, rng):
    m, f = octahedron
    sol = solve_from_rho(m, f, np.array([1.0, -1, 0, 0, 0, 0]))
    assert sol.rho_roundtrip_error < 1e-8
    assert abs(sol.u.mean()) < 1e-14 and np.abs(sol.Z.mean(axis=0)).max() < 1e-14
    np.testing.assert_array_equal(sol.fdot[0], 0)
    zero = solve_from_rho(m, f, np.zeros(6))
    assert np.abs(zero.fdot).max() < 1e-14


def test_solve_from_rho_errors(octahedron, jessen, disk, bumpy_torus):
    m, f = octahedron
    with pytest.raises(RhoSumNonzero):
        solve_from_rho(m, f, np.eye(6)[0])
    with pytest.raises(KernelTooLarge) as info:
        solve_from_rho(*jessen, np.zeros(12))
    assert info.value.dim == 5
    with pytest.raises(MeshNotClosed):
        solve_from_rho(*disk, np.zeros(disk[0].vertex_count))
    with pytest.raises(NotSphere):
        solve_from_rho(*bumpy_torus, np.zeros(bumpy_torus[0].vertex_count))


def test_image_characterization(bumpy_octahedron, rng):
    m, f = bumpy_octahedron
    Dm = dirac_matrix(m, f).toarray()
    rho = rng.normal(size=6)
    rho -= rho.mean()
    U3 = rng.normal(size=(12, 3))
    d = geometry_cache(m, f).edge_vectors
    U3 -= (np.einsum("en,en->e", U3, d) / np.einsum("en,en->e", d, d))[:, None] * d
    # make the sum of U vanish while staying perpendicular to each edge
    B = edge_frames(m, f)
    P = np.einsum("emn,eml->enl", B, B)                     # projectors onto edge normals
    S = P.sum(axis=0)
    U3 -= np.einsum("enl,l->en", P, np.linalg.solve(S, U3.sum(axis=0)))
    assert np.abs(U3.sum(axis=0)).max() < 1e-12
    U = np.einsum("emn,en->em", B, U3)
    u, Z, res = solve_dirac(m, f, rho, U)
    assert np.linalg.norm(res) < 1e-10
    u, Z, res = solve_dirac(m, f, rho + np.eye(6)[0], U)
    assert np.linalg.norm(res) > 0.1


def test_dual_solve(bumpy_octahedron, rng):
    m, f = bumpy_octahedron
    fdot = random_conformal(m, f, rng)
    u, W = dual_solve(m, f, fdot)
    rt, Y = dirac_adjoint_apply(m, f, u, W)
    _, _, r = deformation_rates(m, f, fdot)
    assert np.abs(Y).max() < 1e-12
    np.testing.assert_allclose(rt, r.rho, atol=1e-10)
    # fdot_j - fdot_i = sigma d + d x W on every edge
    W3 = from_frames(edge_frames(m, f), W)
    d = f[m.edges[:, 1]] - f[m.edges[:, 0]]
    s = 0.5 * (u[m.edges[:, 0]] + u[m.edges[:, 1]])
    np.testing.assert_allclose(fdot[m.edges[:, 1]] - fdot[m.edges[:, 0]], s[:, None] * d + np.cross(d, W3), atol=1e-12)


def test_dual_solve_rotation(octahedron):
    m, f = octahedron
    w = np.array([0.2, 0.5, -0.3])
    u, W = dual_solve(m, f, np.cross(f, w))
    assert np.abs(u).max() < 1e-14
    rt, Y = dirac_adjoint_apply(m, f, u, W)
    assert np.abs(rt).max() < 1e-14 and np.abs(Y).max() < 1e-14


def test_dual_solve_jessen_flex(jessen):
    m, f = jessen
    v = nontrivial_flexes(m, f)[:, 0].reshape(f.shape)
    u, W = dual_solve(m, f, v)
    rt, Y = dirac_adjoint_apply(m, f, np.zeros(12), W)
    assert np.abs(rt).max() < 1e-12 and np.abs(Y).max() < 1e-12


def test_dual_solve_rejects_nonconformal(octahedron, rng):
    m, f = octahedron
    with pytest.raises(NotConformal):
        dual_solve(m, f, rng.normal(size=f.shape))


def test_inscribed_closed_form(rng):
    m, f = zoo("perturbed", base=("uv_sphere"), seed=2, magnitude=0.05, inscribed=True)
    u = rng.normal(size=m.vertex_count)
    Z = recover_Z(m, f, u[:, None] * f, u)
    rho, Zc = inscribed_closed_form(m, f, u)
    np.testing.assert_allclose(Z, Zc, atol=1e-10)
    np.testing.assert_allclose(rates(m, f, u, Z).rho, rho, atol=1e-9)
