"""Discrete Dirac operator ``D: (u, Z) -> (rho, U)`` and its adjoint.

``u`` lives on vertices, ``Z`` on faces (R^3), ``rho`` on interior vertices
and ``U`` on interior edges in the plane perpendicular to the edge. Edge
normal vectors are stored as two coordinates in a per-edge orthonormal
frame: the left face normal (already perpendicular to the edge) and
``edge direction x left normal``. With these frames the matrix of the
adjoint is the plain transpose of the matrix of ``D``.

Domain vectors are flattened as ``[u (V), Z (3F)]`` and range vectors as
``[rho (V_int), U (2 E_int)]``.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .conformal import (
    _opposite_cot,
    build_eta,
    cotan_laplacian,
    integrate_one_form,
    recover_Z,
    rates,
    scale_factor_of,
    velocity_scale,
)
from .errors import KernelTooLarge, MeshNotClosed, NotConformal, NotSphere, RhoSumNonzero
from .geometry import geometry_cache
from .mesh import genus
from .numerics import RANK_TOL, default_tol, lstsq, nullspace

#: kernel classification thresholds, relative to the largest singular value
KERNEL_ZERO = 1e-10
KERNEL_GAP = 1e-6


def edge_frames(mesh, f, geometry=None):
    """``(E_int, 2, 3)`` orthonormal frames of the edge-normal planes."""
    g = geometry or geometry_cache(mesh, f)
    ie = mesh.interior_edges
    b1 = g.normals[mesh.edge_faces[ie, 0]]
    ehat = g.edge_vectors[ie] / g.lengths[ie, None]
    b2 = np.cross(ehat, b1)
    return np.stack([b1, b2], axis=1)


def to_frames(frames, W):
    """Project ``(E_int, 3)`` edge vectors into frame coordinates."""
    return np.einsum("emn,en->em", frames, W)


def from_frames(frames, w):
    return np.einsum("emn,em->en", frames, w)


def _circumcenter_jump(mesh, g):
    ie = mesh.interior_edges
    return g.circumcenters[mesh.edge_faces[ie, 0]] - g.circumcenters[mesh.edge_faces[ie, 1]]


def _split(mesh, x):
    V = mesh.vertex_count
    return x[:V], x[V:].reshape(-1, 3)


def dirac_apply(mesh, f, u, Z, geometry=None, frames=True):
    """Evaluate ``(rho, U) = D(u, Z)``.

    ``rho`` is returned for every vertex (NaN at boundary vertices); ``U``
    per interior edge, in frame coordinates unless ``frames=False``.
    """
    f, u, Z = np.asarray(f, float), np.asarray(u, float), np.asarray(Z, float)
    g = geometry or geometry_cache(mesh, f)
    ie = mesh.interior_edges
    d = g.edge_vectors[ie]
    dZ = Z[mesh.edge_faces[ie, 0]] - Z[mesh.edge_faces[ie, 1]]
    t = 0.5 * np.einsum("en,en->e", d, dZ)
    rho = np.zeros(mesh.vertex_count)
    np.add.at(rho, mesh.edges[ie, 0], t)
    np.add.at(rho, mesh.edges[ie, 1], t)
    rho[mesh.boundary_vertices] = np.nan
    du = u[mesh.edges[ie, 1]] - u[mesh.edges[ie, 0]]
    U = -np.cross(d, dZ) + _circumcenter_jump(mesh, g) * du[:, None]
    if frames:
        U = to_frames(edge_frames(mesh, f, g), U)
    return rho, U


def dirac_adjoint_apply(mesh, f, alpha, W, geometry=None):
    """Evaluate ``(rho~, Y) = D*(alpha, W)`` from its explicit formula.

    ``W`` is given in frame coordinates ``(E_int, 2)``. Closed meshes only.
    """
    if not mesh.is_closed:
        raise MeshNotClosed("the adjoint is only defined on closed meshes")
    f, alpha = np.asarray(f, float), np.asarray(alpha, float)
    g = geometry or geometry_cache(mesh, f)
    W3 = from_frames(edge_frames(mesh, f, g), np.asarray(W, float))
    ie = mesh.interior_edges                      # all edges on a closed mesh
    t = np.einsum("en,en->e", _circumcenter_jump(mesh, g), W3)
    rho = np.zeros(mesh.vertex_count)
    np.add.at(rho, mesh.edges[ie, 0], -t)
    np.add.at(rho, mesh.edges[ie, 1], t)

    Wfull = np.zeros((mesh.edge_count, 3))
    Wfull[ie] = W3
    P = f[mesh.faces]
    D = np.roll(P, -1, axis=1) - P                # side c: corner c -> c+1
    A = alpha[mesh.faces]
    avg = 0.5 * (A + np.roll(A, -1, axis=1))
    Y = (np.cross(D, Wfull[mesh.face_edges]) + avg[..., None] * D).sum(axis=1)
    return rho, Y


def dirac_matrix(mesh, f, geometry=None):
    """Sparse matrix of ``D`` in flattened coordinates."""
    f = np.asarray(f, float)
    g = geometry or geometry_cache(mesh, f)
    V, F = mesh.vertex_count, mesh.face_count
    ie = mesh.interior_edges
    iv = mesh.interior_vertices
    row_of_vertex = np.full(V, -1)
    row_of_vertex[iv] = np.arange(len(iv))
    nE = len(ie)
    d = g.edge_vectors[ie]
    L, R = mesh.edge_faces[ie, 0], mesh.edge_faces[ie, 1]
    a, b = mesh.edges[ie, 0], mesh.edges[ie, 1]
    rows, cols, vals = [], [], []

    def put(r, c, v):
        rows.append(np.asarray(r).ravel())
        cols.append(np.asarray(c).ravel())
        vals.append(np.asarray(v, float).ravel())

    xyz = np.arange(3)
    for end in (a, b):
        keep = row_of_vertex[end] >= 0
        r = np.repeat(row_of_vertex[end][keep], 3)
        put(r, (V + 3 * L[keep, None] + xyz).ravel(), 0.5 * d[keep])
        put(r, (V + 3 * R[keep, None] + xyz).ravel(), -0.5 * d[keep])

    frames = edge_frames(mesh, f, g)
    jump = _circumcenter_jump(mesh, g)
    base = len(iv)
    for m in range(2):
        r = base + 2 * np.arange(nE) + m
        zc = np.cross(d, frames[:, m])             # <b, -d x Z> = <Z, d x b>
        put(np.repeat(r, 3), (V + 3 * L[:, None] + xyz).ravel(), zc)
        put(np.repeat(r, 3), (V + 3 * R[:, None] + xyz).ravel(), -zc)
        cu = np.einsum("en,en->e", jump, frames[:, m])
        put(r, b, cu)
        put(r, a, -cu)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(base + 2 * nE, V + 3 * F),
    )


def trivial_kernel(mesh):
    """Orthonormal uniform-scaling and constant-rotation directions, ``(V+3F, 4)``."""
    V, F = mesh.vertex_count, mesh.face_count
    K = np.zeros((V + 3 * F, 4))
    K[:V, 0] = 1 / np.sqrt(V)
    for l in range(3):
        K[V + l::3, l + 1] = 1 / np.sqrt(F)
    return K


@dataclass
class DiracKernel:
    """Nullity of ``D`` with an auditable singular-value window.

    ``status`` is ``"trivial"`` (exactly the 4 similarity directions),
    ``"nontrivial"`` (a fifth singular value is numerically zero) or
    ``"indeterminate"`` (the fifth lies between the two thresholds).
    """

    dim: int
    basis: np.ndarray
    smallest: np.ndarray        # relative, ascending
    window: list
    status: str

    def as_dict(self):
        return {"dim_ker": self.dim, "status": self.status,
                "sv_window": self.window,
                "smallest_relative": [float(s) for s in self.smallest[:6]]}


def kernel(mesh, f, tol=RANK_TOL):
    if not mesh.is_closed:
        raise MeshNotClosed("kernel analysis needs a closed mesh")
    f = np.asarray(f, float)
    ns = nullspace(dirac_matrix(mesh, f).toarray(), tol)
    rel = ns.spectrum[::-1] / ns.sigma_max
    if ns.nullity < 4:
        status = "indeterminate"
    elif rel[:4].max() < KERNEL_ZERO and rel[4] > KERNEL_GAP:
        status = "trivial"
    elif rel[4] < KERNEL_ZERO:
        status = "nontrivial"
    else:
        status = "indeterminate"
    T = trivial_kernel(mesh)
    B = ns.basis
    if ns.nullity >= 4:
        P = B - T @ (T.T @ B)
        q, s, _ = np.linalg.svd(P, full_matrices=False)
        B = np.hstack([T, q[:, :ns.nullity - 4]])
    return DiracKernel(ns.nullity, B, rel, ns.window, status)


def _require_trivial_kernel(mesh, f):
    ker = kernel(mesh, f)
    if ker.status != "trivial":
        raise KernelTooLarge(
            f"dim Ker D = {ker.dim} ({ker.status}); smallest relative singular "
            f"values {ker.smallest[:6].tolist()}",
            dim=ker.dim, window=ker.window, status=ker.status,
        )
    return ker


def check_rho_sum(rho, tol=None):
    rho = np.asarray(rho, float)
    total = float(rho.sum())
    if abs(total) > default_tol(tol) * max(np.abs(rho).sum(), 1.0):
        raise RhoSumNonzero(f"sum of rho is {total:.6g}, must vanish")


@dataclass
class DeformationFromRho:
    u: np.ndarray
    Z: np.ndarray
    fdot: np.ndarray
    rho_roundtrip_error: float
    kernel: DiracKernel


def solve_dirac(mesh, f, rhs_rho, rhs_U=None):
    """Minimum-norm least-squares ``(u, Z)`` with ``D(u, Z) = (rho, U)``."""
    Dm = dirac_matrix(mesh, f).toarray()
    iv = mesh.interior_vertices
    U = np.zeros(2 * len(mesh.interior_edges)) if rhs_U is None else np.ravel(rhs_U)
    x, res = lstsq(Dm, np.concatenate([np.asarray(rhs_rho, float)[iv], U]))
    u, Z = _split(mesh, x)
    return u, Z, res


def solve_from_rho(mesh, f, rho, tol=None, root=0):
    """Conformal deformation of a sphere with prescribed ``rho``.

    The solution of ``D(u, Z) = (rho, 0)`` orthogonal to the kernel has
    mean-zero ``u`` and ``Z``; the velocity field is pinned at ``root``.
    """
    f = np.asarray(f, float)
    rho = np.asarray(rho, float)
    if not mesh.is_closed:
        raise MeshNotClosed("solve_from_rho needs a closed mesh")
    if genus(mesh) != 0:
        raise NotSphere("genus > 0: use homology.high_genus_solve")
    check_rho_sum(rho, tol)
    ker = _require_trivial_kernel(mesh, f)
    u, Z, _ = solve_dirac(mesh, f, rho)
    eta = build_eta(mesh, f, u, Z, tol=1e-8)
    fdot = integrate_one_form(mesh, eta, root=root, tol=1e-8)
    err = 0.0
    if np.abs(fdot).max() > 0:
        u2, _ = scale_factor_of(mesh, f, fdot)
        Z2 = recover_Z(mesh, f, fdot, u2, tol=1e-8)
        err = float(np.abs(rates(mesh, f, u2, Z2).rho - rho).max())
    return DeformationFromRho(u, Z, fdot, err, ker)


def dual_solve(mesh, f, fdot, tol=None):
    """Scale factor and edge-normal field ``W`` of a conformal deformation.

    ``fdot_j - fdot_i = (u_i+u_j)/2 (f_j-f_i) + (f_j-f_i) x W_ij`` with
    ``W_ij`` perpendicular to the edge; returned in frame coordinates.
    """
    f, fdot = np.asarray(f, float), np.asarray(fdot, float)
    u, res = scale_factor_of(mesh, f, fdot)
    scale = max(velocity_scale(mesh, f, fdot), 1e-300)
    if np.abs(res).max(initial=0.0) > default_tol(tol) * scale:
        raise NotConformal(f"velocity field is not conformal (residual {np.abs(res).max():.3g})")
    g = geometry_cache(mesh, f)
    d = g.edge_vectors
    dd = fdot[mesh.edges[:, 1]] - fdot[mesh.edges[:, 0]]
    sigma = 0.5 * (u[mesh.edges[:, 0]] + u[mesh.edges[:, 1]])
    r = dd - sigma[:, None] * d
    W3 = np.cross(r, d) / (g.lengths**2)[:, None]
    ie = mesh.interior_edges
    return u, to_frames(edge_frames(mesh, f, g), W3[ie])


def laplacian_factorization(mesh, f, alpha):
    """``D (1/A) D*(alpha, 0)`` next to its cotangent/normal-jump closed form.

    ``1/A`` divides the face component by the face area. The closed form is
    ``rho_i = -1/2 sum_j (cot k + cot l)(alpha_j - alpha_i)`` and
    ``U_ij = (alpha_j - alpha_i)(N_R - N_L)``.
    Returns ``((rho, U), (rho_formula, U_formula))`` with ``U`` as 3-vectors.
    """
    f, alpha = np.asarray(f, float), np.asarray(alpha, float)
    g = geometry_cache(mesh, f)
    zero_w = np.zeros((len(mesh.interior_edges), 2))
    rt, Y = dirac_adjoint_apply(mesh, f, alpha, zero_w, geometry=g)
    rho, U = dirac_apply(mesh, f, rt, Y / g.areas[:, None], geometry=g, frames=False)

    ie = mesh.interior_edges
    rho_f = -0.5 * cotan_laplacian(mesh, f, alpha, geometry=g)
    da = alpha[mesh.edges[ie, 1]] - alpha[mesh.edges[ie, 0]]
    U_f = da[:, None] * (g.normals[mesh.edge_faces[ie, 1]] - g.normals[mesh.edge_faces[ie, 0]])
    return (rho, U), (rho_f, U_f)


def inscribed_closed_form(mesh, f, u):
    """``(rho, Z)`` of ``fdot = u f`` on a mesh inscribed in the unit sphere.

    With ``h`` the signed distance from the origin to a face plane (the
    cosine of the face's angular circumradius),
    ``rho_i = -sum_j (u_j - u_i)(h_L cot_L + h_R cot_R) / 2`` and
    ``Z_ijk = -h / (2A) (u_i (f_k-f_j) + u_j (f_i-f_k) + u_k (f_j-f_i))``.
    """
    f, u = np.asarray(f, float), np.asarray(u, float)
    g = geometry_cache(mesh, f)
    h = g.plane_distance
    ie = mesh.interior_edges
    cl, cr = _opposite_cot(mesh, g, ie)
    w = 0.5 * (h[mesh.edge_faces[ie, 0]] * cl + h[mesh.edge_faces[ie, 1]] * cr)
    a, b = mesh.edges[ie, 0], mesh.edges[ie, 1]
    du = u[b] - u[a]
    rho = np.zeros(mesh.vertex_count)
    np.add.at(rho, a, -w * du)
    np.add.at(rho, b, w * du)
    rho[mesh.boundary_vertices] = np.nan

    P, U = f[mesh.faces], u[mesh.faces]
    S = (U[..., None] * (np.roll(P, -2, axis=1) - np.roll(P, -1, axis=1))).sum(axis=1)
    Z = -(h / (2 * g.areas))[:, None] * S
    return rho, Z
