"""Randomised invariants checked with hypothesis."""

import numpy as np
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from conftest import random_conformal, zoo
from confdefo.conformal import deformation_rates, is_conformal, scale_factor_of, solve_from_u
from confdefo.dirac import dirac_adjoint_apply, dirac_apply, solve_from_rho
from confdefo.geometry import edge_metric, geometry_cache, length_cross_ratios
from confdefo.meshio import format_off, parse_off
from confdefo.moebius import Compose, Dilation, Inversion, Translation

SETTINGS = settings(max_examples=25, deadline=None)
finite = st.floats(-1, 1, allow_nan=False, allow_infinity=False)
MESHES = st.sampled_from(["octahedron", "icosahedron", "jessen", "tetrahedron"])


def _lcr(mesh, f):
    return length_cross_ratios(mesh, edge_metric(mesh, f))


@SETTINGS
@given(name=MESHES, u=arrays(float, 12, elements=st.floats(-0.5, 0.5)))
def test_lcr_invariant_under_vertex_scaling(name, u):
    m, f = zoo(name)
    L = edge_metric(m, f)
    u = u[:m.vertex_count]
    scaled = L * np.exp(0.5 * (u[m.edges[:, 0]] + u[m.edges[:, 1]]))
    np.testing.assert_allclose(length_cross_ratios(m, scaled), length_cross_ratios(m, L),
                               rtol=1e-12)


@SETTINGS
@given(name=MESHES, shift=arrays(float, 3, elements=st.floats(2.5, 4)),
       lam=st.floats(0.2, 5))
def test_lcr_invariant_under_moebius(name, shift, lam):
    m, f = zoo(name)
    phi = Compose((Translation(tuple(shift)), Inversion(), Dilation(lam)))
    np.testing.assert_allclose(_lcr(m, phi.apply(f)), _lcr(m, f), rtol=1e-9)


@SETTINGS
@given(name=MESHES, seed=st.integers(0, 2**32 - 1))
def test_dirac_adjointness(name, seed):
    m, f = zoo(name)
    rng = np.random.default_rng(seed)
    u, Z = rng.standard_normal(m.vertex_count), rng.standard_normal((m.face_count, 3))
    a = rng.standard_normal(m.vertex_count)
    W = rng.standard_normal((len(m.interior_edges), 2))
    rho, U = dirac_apply(m, f, u, Z)
    a_, Y = dirac_adjoint_apply(m, f, a, W)
    lhs, rhs = a @ rho + np.sum(W * U), u @ a_ + np.sum(Z * Y)
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


@SETTINGS
@given(name=MESHES, noise=arrays(float, (12, 3), elements=finite))
def test_off_round_trip(name, noise):
    m, f = zoo(name)
    g = f + 0.1 * noise[:m.vertex_count]
    faces, g2 = parse_off(format_off(m, g))
    np.testing.assert_array_equal(faces, m.faces)
    np.testing.assert_array_equal(g2, g)


@SETTINGS
@given(seed=st.integers(0, 2**32 - 1), a=st.floats(-3, 3), b=st.floats(-3, 3))
def test_solve_from_u_is_linear(seed, a, b):
    m, f = zoo("octahedron")
    rng = np.random.default_rng(seed)
    u1, u2 = rng.standard_normal((2, m.vertex_count))
    x = solve_from_u(m, f, a * u1 + b * u2)
    y = a * solve_from_u(m, f, u1) + b * solve_from_u(m, f, u2)
    np.testing.assert_allclose(x, y, atol=1e-11 * max(1, abs(a) + abs(b)))
    assert is_conformal(m, f, x)


@SETTINGS
@given(name=MESHES, seed=st.integers(0, 2**32 - 1))
def test_schlafli_random(name, seed):
    m, f = zoo(name)
    fdot = random_conformal(m, f, np.random.default_rng(seed))
    _, _, r = deformation_rates(m, f, fdot)
    scale = np.nansum(np.abs(r.alpha_dot) * geometry_cache(m, f).lengths)
    assert abs(r.schlafli_sum()) <= 1e-9 * max(scale, 1e-300)


@SETTINGS
@given(seed=st.integers(0, 2**32 - 1))
def test_rho_round_trip(seed):
    m, f = zoo("icosahedron")
    rho = np.random.default_rng(seed).standard_normal(m.vertex_count)
    rho -= rho.mean()
    sol = solve_from_rho(m, f, rho)
    _, _, r = deformation_rates(m, f, sol.fdot)
    np.testing.assert_allclose(r.rho, rho, atol=1e-9 * np.abs(rho).max())
    u, _ = scale_factor_of(m, f, sol.fdot)
    np.testing.assert_allclose(u - u.mean(), sol.u - sol.u.mean(), atol=1e-9)
