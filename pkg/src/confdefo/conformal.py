"""Infinitesimal conformal and isometric deformations.

A velocity field ``fdot`` is conformal with scale factor ``u`` when on
every edge ``<fdot_j - fdot_i, f_j - f_i> = (u_i + u_j)/2 |f_j - f_i|^2``.
For such a field each face carries a rotation vector ``Z`` with

    fdot_j - fdot_i = (u_i+u_j)/2 (f_j-f_i)
                      + (f_j-f_i) x (Z_ijk + cot(jki)/2 (u_j-u_i) N_ijk)

for each side ``ij`` of the face ``{ijk}``. Everything here works with
flattened ``(V * n,)`` velocity vectors in nullspace bases and ``(V, n)``
arrays elsewhere.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order

from .errors import (
    Eq2Violated,
    FormNotClosed,
    MeshNotClosed,
    NotConformal,
    NotExact,
    Unrealizable,
)
from .geometry import geometry_cache
from .mesh import genus
from .numerics import RANK_TOL, Nullspace, default_tol, lstsq, nullspace


# --- matrices -----------------------------------------------------------

def rigidity_matrix(mesh, f):
    """``(E, V*n)`` matrix of ``fdot -> <fdot_j - fdot_i, f_j - f_i>``."""
    f = np.asarray(f, dtype=float)
    V, n = f.shape
    E = mesh.edge_count
    d = f[mesh.edges[:, 1]] - f[mesh.edges[:, 0]]
    rows = np.repeat(np.arange(E), 2 * n)
    cols = np.concatenate([
        mesh.edges[:, 0, None] * n + np.arange(n),
        mesh.edges[:, 1, None] * n + np.arange(n),
    ], axis=1).ravel()
    vals = np.concatenate([-d, d], axis=1).ravel()
    return sp.csr_matrix((vals, (rows, cols)), shape=(E, V * n))


def edge_average_matrix(mesh):
    """``(E, V)`` matrix of ``u -> (u_i + u_j) / 2``."""
    E = mesh.edge_count
    rows = np.repeat(np.arange(E), 2)
    return sp.csr_matrix((np.full(2 * E, 0.5), (rows, mesh.edges.ravel())),
                         shape=(E, mesh.vertex_count))


def lcr_constraint_matrix(mesh, f):
    """Linearized ``d/dt log lcr_ij`` for every interior edge, as ``(E_int, V*n)``."""
    f = np.asarray(f, dtype=float)
    d = f[mesh.edges[:, 1]] - f[mesh.edges[:, 0]]
    sq = np.einsum("en,en->e", d, d)
    dlog = sp.diags(1.0 / sq) @ rigidity_matrix(mesh, f)      # d/dt log l_e (x1/2 dropped)
    ie = mesh.interior_edges
    i, j = mesh.edges[ie, 0], mesh.edges[ie, 1]
    k, l = mesh.edge_opposite[ie, 0], mesh.edge_opposite[ie, 1]
    look = {tuple(e): n for n, e in enumerate(mesh.edges.tolist())}
    idx = lambda a, b: np.array([look[(min(x, y), max(x, y))] for x, y in zip(a, b)])
    rows = np.repeat(np.arange(len(ie)), 4)
    cols = np.stack([idx(i, l), idx(j, k), idx(l, j), idx(k, i)], axis=1).ravel()
    vals = np.tile([1.0, 1.0, -1.0, -1.0], len(ie))
    C = sp.csr_matrix((vals, (rows, cols)), shape=(len(ie), mesh.edge_count))
    return C @ dlog


def augmented_conformal_matrix(mesh, f):
    """Edge equations in the unknowns ``(fdot, u)``, shape ``(E, V*n + V)``."""
    f = np.asarray(f, dtype=float)
    d = f[mesh.edges[:, 1]] - f[mesh.edges[:, 0]]
    sq = np.einsum("en,en->e", d, d)
    return sp.hstack([rigidity_matrix(mesh, f),
                      -sp.diags(sq) @ edge_average_matrix(mesh)]).tocsr()


def eliminated_conformal_matrix(mesh, f):
    """Edge equations with the scale factor projected out (dense)."""
    f = np.asarray(f, dtype=float)
    d = f[mesh.edges[:, 1]] - f[mesh.edges[:, 0]]
    sq = np.einsum("en,en->e", d, d)
    M = edge_average_matrix(mesh).toarray()
    Q, _ = np.linalg.qr(M)
    S = (sp.diags(1.0 / sq) @ rigidity_matrix(mesh, f)).toarray()
    return S - Q @ (Q.T @ S)


def euclidean_motions(f):
    """Orthonormal basis (columns) of infinitesimal Euclidean motions of ``f``."""
    f = np.asarray(f, dtype=float)
    V, n = f.shape
    g = f - f.mean(axis=0)
    cols = []
    for a in range(n):
        t = np.zeros((V, n))
        t[:, a] = 1.0
        cols.append(t.ravel())
    for a in range(n):
        for b in range(a + 1, n):
            r = np.zeros((V, n))
            r[:, a], r[:, b] = -g[:, b], g[:, a]
            cols.append(r.ravel())
    A = np.array(cols).T
    u, s, _ = np.linalg.svd(A, full_matrices=False)
    return u[:, s > 1e-12 * s[0]]


# --- spaces -------------------------------------------------------------

def isometric_space(mesh, f, tol=RANK_TOL):
    """Nullspace of the rigidity matrix; nullity 6 in R^3 means infinitesimally rigid."""
    return nullspace(rigidity_matrix(mesh, f).toarray(), tol)


def nontrivial_flexes(mesh, f, tol=RANK_TOL):
    """Orthonormal isometric deformations orthogonal to Euclidean motions, ``(V*n, k)``."""
    ns = isometric_space(mesh, f, tol)
    motions = euclidean_motions(f)
    motions = motions[:, :min(motions.shape[1], ns.nullity)]
    return _complement(ns.basis, motions)


def _complement(span, sub):
    P = span - sub @ (sub.T @ span)
    u, s, _ = np.linalg.svd(P, full_matrices=False)
    k = span.shape[1] - np.linalg.matrix_rank(sub.T @ span, tol=1e-8)
    return u[:, :k]


@dataclass
class ConformalSpace:
    """Infinitesimal conformal deformations of one realization.

    ``lower_bound`` is ``|V| + 6 - 6g`` for closed surfaces in R^3 and
    ``None`` otherwise; ``isothermic`` is the strict-inequality test and is
    likewise ``None`` when no bound applies.
    """

    nullspace: Nullspace
    lower_bound: int | None
    cross_check: dict

    @property
    def basis(self):
        return self.nullspace.basis

    @property
    def dimension(self):
        return self.nullspace.nullity

    @property
    def isothermic(self):
        if self.lower_bound is None:
            return None
        return self.dimension > self.lower_bound

    @property
    def consistent(self):
        return all(v == self.dimension for v in self.cross_check.values())

    def as_dict(self):
        return {
            "dimension": self.dimension,
            "lower_bound": self.lower_bound,
            "isothermic": self.isothermic,
            "cross_check": dict(self.cross_check),
            **{k: v for k, v in self.nullspace.as_dict().items() if k != "nullity"},
        }


def conformal_space(mesh, f, tol=RANK_TOL, cross_check=True):
    """Nullspace of the linearized length-cross-ratio constraints.

    With ``cross_check`` the dimension is recomputed from the augmented
    ``(fdot, u)`` system and from the system with ``u`` eliminated.
    """
    f = np.asarray(f, dtype=float)
    geometry_cache(mesh, f)          # raises on degenerate input
    ns = nullspace(lcr_constraint_matrix(mesh, f).toarray(), tol)
    bound = None
    if mesh.is_closed and f.shape[1] == 3:
        bound = mesh.vertex_count + 6 - 6 * genus(mesh)
    checks = {}
    if cross_check:
        checks["augmented"] = nullspace(augmented_conformal_matrix(mesh, f).toarray(), tol).nullity
        checks["eliminated"] = nullspace(eliminated_conformal_matrix(mesh, f), tol).nullity
    return ConformalSpace(ns, bound, checks)


# --- scale factors ------------------------------------------------------

def velocity_scale(mesh, f, fdot):
    """Largest relative edge velocity ``|fdot_j - fdot_i| / |f_j - f_i|``."""
    f, fdot = np.asarray(f, float), np.asarray(fdot, float)
    d = f[mesh.edges[:, 1]] - f[mesh.edges[:, 0]]
    dd = fdot[mesh.edges[:, 1]] - fdot[mesh.edges[:, 0]]
    top = np.abs(dd).max(initial=0.0)
    if top == 0:
        return 0.0
    # rescale first so the squared norms cannot underflow
    return float(top * np.max(np.linalg.norm(dd / top, axis=1) / np.linalg.norm(d, axis=1)))


def scale_factor_of(mesh, f, fdot):
    """Least-squares scale factor of a velocity field and its per-edge residual.

    The residual is ``(u_i+u_j)/2 - <fdot_j-fdot_i, f_j-f_i> / |f_j-f_i|^2``;
    it vanishes exactly when ``fdot`` is conformal.
    """
    f, fdot = np.asarray(f, float), np.asarray(fdot, float)
    d = f[mesh.edges[:, 1]] - f[mesh.edges[:, 0]]
    dd = fdot[mesh.edges[:, 1]] - fdot[mesh.edges[:, 0]]
    s = np.einsum("en,en->e", dd, d) / np.einsum("en,en->e", d, d)
    u, res = lstsq(edge_average_matrix(mesh).toarray(), s)
    return u, res


def is_conformal(mesh, f, fdot, tol=None):
    _, res = scale_factor_of(mesh, f, fdot)
    scale = velocity_scale(mesh, f, fdot)
    return bool(np.max(np.abs(res), initial=0.0) <= default_tol(tol) * max(scale, 1e-300))


def solve_from_u(mesh, f, u, tol=None):
    """Deformation with prescribed scale factor, Euclidean motions gauged out.

    Returns the minimum-norm solution of the edge equations, which is
    orthogonal to translations and to rotations about the centroid.

    Raises
    ------
    Unrealizable
        When the least-squares residual exceeds ``tol`` relative to the
        right-hand side; the error lists the pairings ``sum(rho_bar * u)``
        against every non-trivial isometric flex.
    """
    f = np.asarray(f, float)
    u = np.asarray(u, float)
    R = rigidity_matrix(mesh, f).toarray()
    d = f[mesh.edges[:, 1]] - f[mesh.edges[:, 0]]
    b = 0.5 * (u[mesh.edges[:, 0]] + u[mesh.edges[:, 1]]) * np.einsum("en,en->e", d, d)
    x, res = lstsq(R, b)
    bnorm = np.linalg.norm(b)
    rel = np.linalg.norm(res) / bnorm if bnorm > 0 else 0.0
    if rel > default_tol(tol):
        pairings = [float(r @ u) for r in flex_rhos(mesh, f)]
        raise Unrealizable(
            f"scale factor not realizable: relative residual {rel:.3g}, "
            f"flex pairings {pairings}",
            residual=rel, pairings=pairings,
        )
    return x.reshape(f.shape)


# --- rotation field and rates ---------------------------------------------

def _skew(v):
    z = np.zeros(v.shape[:-1])
    return np.stack([
        np.stack([z, -v[..., 2], v[..., 1]], -1),
        np.stack([v[..., 2], z, -v[..., 0]], -1),
        np.stack([-v[..., 1], v[..., 0], z], -1),
    ], -2)


def _face_sides(mesh, f, g, u):
    """Per face side ``c`` (corner c -> c+1): edge vector and its normal term."""
    P = f[mesh.faces]
    D = np.roll(P, -1, axis=1) - P                       # (F, 3, 3)
    U = u[mesh.faces]
    du = np.roll(U, -1, axis=1) - U                      # u_j - u_i
    cot_opp = np.roll(g.cot, -2, axis=1)                 # angle at corner c+2
    normal_term = (0.5 * cot_opp * du)[..., None] * g.normals[:, None, :]
    return D, normal_term


def recover_Z(mesh, f, fdot, u=None, tol=None, geometry=None):
    """Face rotation field of a conformal deformation (one 3x3 solve per face).

    Raises
    ------
    NotConformal
        If the three side equations of some face cannot be met.
    Eq2Violated
        If the recovered field fails the interior-edge compatibility check.
    """
    f, fdot = np.asarray(f, float), np.asarray(fdot, float)
    tol = default_tol(tol)
    if u is None:
        u, _ = scale_factor_of(mesh, f, fdot)
    u = np.asarray(u, float)
    g = geometry or geometry_cache(mesh, f)
    D, nterm = _face_sides(mesh, f, g, u)
    Fd = fdot[mesh.faces]
    dF = np.roll(Fd, -1, axis=1) - Fd
    U = u[mesh.faces]
    sigma = 0.5 * (U + np.roll(U, -1, axis=1))
    r = dF - sigma[..., None] * D - np.cross(D, nterm)     # = D x Z
    K = _skew(D)                                            # K @ Z = D x Z
    lhs = np.einsum("fcji,fcjk->fik", K, K)
    rhs = np.einsum("fcji,fcj->fi", K, r)
    Z = np.linalg.solve(lhs, rhs[..., None])[..., 0]
    miss = np.abs(np.cross(D, Z[:, None, :]) - r).max()
    scale = max(velocity_scale(mesh, f, fdot), 1e-300) * g.lengths.max()
    if miss > tol * scale:
        raise NotConformal(f"no face rotation field fits (max side residual {miss:.3g})")
    eq2 = eq2_residual(mesh, f, u, Z, geometry=g)
    if eq2.size and np.abs(eq2).max() > tol * scale:
        raise Eq2Violated(f"edge compatibility residual {np.abs(eq2).max():.3g}")
    return Z


def eq2_residual(mesh, f, u, Z, geometry=None):
    """``(f_j-f_i) x ((Z_L - Z_R) + (u_j-u_i)(cot_k/2 N_L + cot_l/2 N_R))`` per interior edge."""
    f, u, Z = np.asarray(f, float), np.asarray(u, float), np.asarray(Z, float)
    g = geometry or geometry_cache(mesh, f)
    ie = mesh.interior_edges
    L, R = mesh.edge_faces[ie, 0], mesh.edge_faces[ie, 1]
    cl, cr = _opposite_cot(mesh, g, ie)
    du = u[mesh.edges[ie, 1]] - u[mesh.edges[ie, 0]]
    w = (Z[L] - Z[R]) + du[:, None] * (0.5 * cl[:, None] * g.normals[L]
                                       + 0.5 * cr[:, None] * g.normals[R])
    return np.cross(g.edge_vectors[ie], w)


def _opposite_cot(mesh, g, edges):
    """Cotangents of the angles opposite ``edges`` in their left and right faces."""
    out = []
    for side in (0, 1):
        fa = mesh.edge_faces[edges, side]
        opp = mesh.edge_opposite[edges, side]
        corner = np.argmax(mesh.faces[fa] == opp[:, None], axis=1)
        out.append(g.cot[fa, corner])
    return out


@dataclass
class RateReport:
    """First-order rates of a conformal deformation.

    ``alpha_dot`` is per edge (NaN on the boundary), ``beta_dot`` per face
    corner, ``rho`` per vertex (NaN at boundary vertices).
    """

    alpha_dot: np.ndarray
    beta_dot: np.ndarray
    rho: np.ndarray

    def schlafli_sum(self):
        return float(np.nansum(self.rho))


def rates(mesh, f, u, Z, geometry=None):
    f, u, Z = np.asarray(f, float), np.asarray(u, float), np.asarray(Z, float)
    g = geometry or geometry_cache(mesh, f)
    ie = mesh.interior_edges
    L, R = mesh.edge_faces[ie, 0], mesh.edge_faces[ie, 1]
    alpha_dot = np.full(mesh.edge_count, np.nan)
    alpha_dot[ie] = np.einsum("en,en->e", g.edge_vectors[ie], Z[L] - Z[R]) / g.lengths[ie]

    U = u[mesh.faces]
    du_next = np.roll(U, -1, axis=1) - U        # u_j - u_i, j = next corner
    du_prev = np.roll(U, -2, axis=1) - U        # u_k - u_i, k = previous corner
    cot_prev = np.roll(g.cot, -2, axis=1)       # angle at k
    cot_next = np.roll(g.cot, -1, axis=1)       # angle at j
    beta_dot = 0.5 * (du_next * cot_prev + du_prev * cot_next)

    contrib = alpha_dot * g.lengths
    rho = np.zeros(mesh.vertex_count)
    np.add.at(rho, mesh.edges[ie, 0], 0.5 * contrib[ie])
    np.add.at(rho, mesh.edges[ie, 1], 0.5 * contrib[ie])
    rho[mesh.boundary_vertices] = np.nan
    return RateReport(alpha_dot, beta_dot, rho)


def deformation_rates(mesh, f, fdot, tol=None):
    """Scale factor, rotation field and rates of a conformal velocity field."""
    u, _ = scale_factor_of(mesh, f, fdot)
    Z = recover_Z(mesh, f, fdot, u, tol=tol)
    return u, Z, rates(mesh, f, u, Z)


def angular_velocity_residual(mesh, f, report, u, geometry=None):
    """Per interior vertex: ``sum_j adot_ij e_ij/|e_ij| - sum_faces bdot_i N``.

    Returns ``(residual vectors (V_int, 3), relative max)``; the relative
    value divides by the largest rate magnitude involved.
    """
    f, u = np.asarray(f, float), np.asarray(u, float)
    g = geometry or geometry_cache(mesh, f)
    V = mesh.vertex_count
    lhs = np.zeros((V, 3))
    ie = mesh.interior_edges
    ehat = g.edge_vectors[ie] / g.lengths[ie, None]
    t = report.alpha_dot[ie, None] * ehat
    np.add.at(lhs, mesh.edges[ie, 0], t)
    np.add.at(lhs, mesh.edges[ie, 1], -t)
    rhs = np.zeros((V, 3))
    for c in range(3):
        np.add.at(rhs, mesh.faces[:, c], report.beta_dot[:, c, None] * g.normals)
    iv = mesh.interior_vertices
    res = (lhs - rhs)[iv]
    scale = max(np.nanmax(np.abs(report.alpha_dot), initial=0.0),
                np.abs(report.beta_dot).max(initial=0.0),
                np.abs(u).max(initial=0.0), 1e-300)
    return res, float(np.abs(res).max(initial=0.0) / scale)


def cotan_laplacian(mesh, f, u, geometry=None):
    """``sum_j (cot_k + cot_l)(u_j - u_i)`` at every vertex (boundary edges use one side)."""
    g = geometry or geometry_cache(mesh, f)
    u = np.asarray(u, float)
    out = np.zeros(mesh.vertex_count)
    for c in range(3):
        i = mesh.faces[:, c]
        j = mesh.faces[:, (c + 1) % 3]
        w = g.cot[:, (c + 2) % 3]
        np.add.at(out, i, w * (u[j] - u[i]))
        np.add.at(out, j, w * (u[i] - u[j]))
    return out


# --- 1-forms ------------------------------------------------------------

def build_eta(mesh, f, u, Z, tol=None, geometry=None):
    """The vector-valued edge 1-form a compatible ``(u, Z)`` pair integrates to.

    Stored per edge in the ``i < j`` direction. Left- and right-face
    expressions are compared on interior edges.
    """
    f, u, Z = np.asarray(f, float), np.asarray(u, float), np.asarray(Z, float)
    g = geometry or geometry_cache(mesh, f)
    i, j = mesh.edges[:, 0], mesh.edges[:, 1]
    d = g.edge_vectors
    sigma = 0.5 * (u[i] + u[j])
    ecl = np.zeros(mesh.edge_count)
    ecr = np.zeros(mesh.edge_count)
    has_l = mesh.edge_faces[:, 0] >= 0
    has_r = mesh.edge_faces[:, 1] >= 0
    # opposite-corner cotangents for each available side
    for side, mask, store in ((0, has_l, ecl), (1, has_r, ecr)):
        e = np.flatnonzero(mask)
        fa = mesh.edge_faces[e, side]
        corner = np.argmax(mesh.faces[fa] == mesh.edge_opposite[e, side][:, None], axis=1)
        store[e] = g.cot[fa, corner]
    L = np.where(has_l, mesh.edge_faces[:, 0], 0)
    R = np.where(has_r, mesh.edge_faces[:, 1], 0)
    du = u[j] - u[i]
    wl = Z[L] + (0.5 * ecl * du)[:, None] * g.normals[L]
    wr = Z[R] - (0.5 * ecr * du)[:, None] * g.normals[R]
    eta_l = sigma[:, None] * d + np.cross(d, wl)
    eta_r = sigma[:, None] * d + np.cross(d, wr)
    both = has_l & has_r
    if both.any():
        gap = np.abs(eta_l[both] - eta_r[both]).max()
        scale = max(np.abs(eta_l[both]).max(), np.abs(eta_r[both]).max(), 1e-300)
        if gap > default_tol(tol) * scale:
            raise Eq2Violated(f"left/right edge expressions differ by {gap:.3g}")
    return np.where(has_l[:, None], eta_l, eta_r)


def integrate_one_form(mesh, eta, root=0, tol=None):
    """Potential of an exact edge 1-form: ``x_root = 0`` and ``x_j - x_i = eta(e_ij)``.

    Integrates along a breadth-first spanning tree, then verifies every edge.
    """
    eta = np.asarray(eta, float)
    vec = eta.ndim == 2
    E2 = eta if vec else eta[:, None]
    tol = default_tol(tol)
    scale = max(np.abs(E2).max(initial=0.0), 1e-300)
    face_sums = mesh.d1 @ E2
    worst = np.abs(face_sums).max(initial=0.0)
    if worst > tol * scale:
        raise FormNotClosed(f"1-form is not closed (max face sum {worst:.3g})", worst)
    adj = (mesh.d0.T @ mesh.d0).tocsr()
    order, pred = breadth_first_order(adj, root, directed=False, return_predecessors=True)
    x = np.zeros((mesh.vertex_count, E2.shape[1]))
    for v in order[1:]:
        p = pred[v]
        e, s = mesh.edge_index(p, v)
        x[v] = x[p] + s * E2[e]
    miss = mesh.d0 @ x - E2
    worst = np.abs(miss).max(initial=0.0)
    if worst > tol * scale:
        raise NotExact(f"closed 1-form has non-zero periods (max {worst:.3g})",
                       periods=miss)
    return x if vec else x[:, 0]


# --- isothermic test ----------------------------------------------------

def isothermic_matrix(mesh, f):
    """Rows ``sum_j k_ij |f_j-f_i|^2`` and ``sum_j k_ij (f_j-f_i)`` per interior vertex."""
    f = np.asarray(f, float)
    d = f[mesh.edges[:, 1]] - f[mesh.edges[:, 0]]
    sq = np.einsum("en,en->e", d, d)
    ell = np.sqrt(sq).mean()
    V, E = mesh.vertex_count, mesh.edge_count
    A = np.zeros((V, 4, E))
    e = np.arange(E)
    for end, sgn in ((0, 1.0), (1, -1.0)):
        v = mesh.edges[:, end]
        A[v, 0, e] += sq / ell
        A[v, 1:, e] += sgn * d
    return A[mesh.interior_vertices].reshape(-1, E)


def is_isothermic(mesh, f, tol=RANK_TOL):
    """Whether a non-zero edge function ``k`` solves the isothermic system.

    Returns ``(flag, Nullspace)``.
    """
    ns = nullspace(isothermic_matrix(mesh, f), tol)
    return ns.nullity > 0, ns


# --- flex obstruction ---------------------------------------------------

def flex_rhos(mesh, f, tol=RANK_TOL):
    """Mean-curvature half-density rates of every non-trivial isometric flex."""
    f = np.asarray(f, float)
    out = []
    flexes = nontrivial_flexes(mesh, f, tol)
    zero = np.zeros(mesh.vertex_count)
    for k in range(flexes.shape[1]):
        v = flexes[:, k].reshape(f.shape)
        Z = recover_Z(mesh, f, v, zero, tol=1e-8)
        out.append(rates(mesh, f, zero, Z).rho)
    return out
