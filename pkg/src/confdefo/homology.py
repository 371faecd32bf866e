"""Discrete 1-forms, cohomology representatives and the high-genus solve.

Primal forms are stored per edge in the ``i < j`` direction. A dual form
is stored per edge too: the value on the dual edge crossing ``e_ij`` from
its right face to its left face, so ``omega(e*_ji) = -omega(e*_ij)``.

Closedness: primal forms have vanishing face sums (``d1 eta = 0``), dual
forms vanishing vertex sums (``d0^T omega = 0``). Exact dual forms are
``d1^T h`` for a face function ``h``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import breadth_first_order, minimum_spanning_tree

from .conformal import build_eta, integrate_one_form
from .dirac import _require_trivial_kernel, check_rho_sum, edge_frames, solve_dirac, to_frames
from .errors import MeshNotClosed, PairingFailed
from .geometry import geometry_cache
from .mesh import genus
from .numerics import default_tol, lstsq, nullspace


def _cols(form):
    form = np.asarray(form, float)
    return form if form.ndim == 2 else form[:, None]


def _scale(form):
    return max(np.abs(form).max(initial=0.0), 1e-300)


def is_closed(mesh, eta, tol=None):
    """Primal closedness: ``(flag, max |face sum|)``."""
    v = float(np.abs(mesh.d1 @ _cols(eta)).max(initial=0.0))
    return v <= default_tol(tol) * _scale(eta), v


def is_exact(mesh, eta, tol=None):
    """Primal exactness: ``(flag, residual of the best potential)``."""
    E = _cols(eta)
    x, _ = lstsq(mesh.d0.toarray(), E)
    v = float(np.abs(mesh.d0 @ x - E).max(initial=0.0))
    return v <= default_tol(tol) * _scale(eta), v


def is_dual_closed(mesh, omega, tol=None):
    """Dual closedness: ``(flag, max |vertex sum|)``."""
    v = float(np.abs(mesh.d0.T @ _cols(omega)).max(initial=0.0))
    return v <= default_tol(tol) * _scale(omega), v


def is_dual_exact(mesh, omega, tol=None):
    E = _cols(omega)
    x, _ = lstsq(mesh.d1.T.toarray(), E)
    v = float(np.abs(mesh.d1.T @ x - E).max(initial=0.0))
    return v <= default_tol(tol) * _scale(omega), v


def pairing(omega, eta):
    """``sum_e omega(e*) eta(e)``; ``omega`` may hold several forms as columns."""
    return np.asarray(omega, float).T @ np.asarray(eta, float)


def _require_closed(mesh):
    if not mesh.is_closed:
        raise MeshNotClosed("cohomology computations need a closed mesh")


def cohomology_basis(mesh, dual=True):
    """Orthonormal ``(E, 2g)`` representatives of closed modulo exact forms.

    Both the dual and primal versions are the nullspace of the stacked
    ``[d0^T; d1]``; the ``dual`` flag only documents intent.
    """
    _require_closed(mesh)
    A = np.vstack([mesh.d0.T.toarray(), mesh.d1.toarray()])
    return nullspace(A).basis


def obstruction_basis(mesh):
    """``2g`` closed dual 1-forms whose pairings detect non-exact primal forms."""
    _require_closed(mesh)
    B = cohomology_basis(mesh, dual=True)
    g = genus(mesh)
    if B.shape[1] != 2 * g:
        raise ArithmeticError(f"cohomology rank {B.shape[1]} != 2g = {2 * g}")
    return B


# --- generator loops (independent oracle) -------------------------------

@dataclass
class Generators:
    """Tree-cotree decomposition: one non-tree, non-cotree edge per generator."""

    tree_edges: np.ndarray
    cotree_edges: np.ndarray
    generator_edges: np.ndarray
    root: int = 0
    loops: list = field(default_factory=list)


def tree_cotree(mesh, root=0):
    _require_closed(mesh)
    V, E, F = mesh.vertex_count, mesh.edge_count, mesh.face_count
    adj = (mesh.d0.T @ mesh.d0).tocsr()
    order, pred = breadth_first_order(adj, root, directed=False, return_predecessors=True)
    tree = np.zeros(E, bool)
    for v in order[1:]:
        tree[mesh.edge_index(pred[v], v)[0]] = True

    # dual spanning tree over faces using only non-tree edges
    rest = np.flatnonzero(~tree)
    L, R = mesh.edge_faces[rest, 0], mesh.edge_faces[rest, 1]
    import scipy.sparse as sp
    W = sp.coo_matrix((rest + 1.0, (L, R)), shape=(F, F)).tocsr()
    T = minimum_spanning_tree(W + W.T).tocoo()
    cotree = np.zeros(E, bool)
    cotree[(T.data - 1).astype(int)] = True

    gens = np.flatnonzero(~tree & ~cotree)
    loops = []
    for e in gens:
        a, b = mesh.edges[e]
        loops.append(_tree_path(pred, b, a, mesh) + [(int(e), 1)])
    return Generators(np.flatnonzero(tree), np.flatnonzero(cotree), gens, root, loops)


def _tree_path(pred, start, stop, mesh):
    """Edges with orientation signs walking ``start -> stop`` through the tree."""
    up = lambda v: [v] + (up(pred[v]) if pred[v] >= 0 else [])
    ps, pt = up(int(start)), up(int(stop))
    common = next(v for v in ps if v in set(pt))
    walk = ps[:ps.index(common) + 1] + pt[:pt.index(common)][::-1]
    return [mesh.edge_index(p, q) for p, q in zip(walk[:-1], walk[1:])]


def periods(mesh, eta, generators=None):
    """Integrals of a closed primal form around every generator loop, ``(2g, k)``."""
    gens = generators or tree_cotree(mesh)
    E = _cols(eta)
    out = np.array([[0.0] * E.shape[1]] * len(gens.loops))
    for n, loop in enumerate(gens.loops):
        for e, s in loop:
            out[n] += s * E[e]
    return out


# --- high-genus solve ---------------------------------------------------

def obstruction_data(mesh, f, omega):
    """Right-hand sides ``(alpha_kl, W_kl)`` for one dual form and ``l = 1,2,3``.

    ``alpha_kl,i = 1/2 sum_j omega(e*_ij) <e_l, f_j - f_i>`` and
    ``W_kl,ij = omega(e*_ij) e_l x (f_j - f_i)``, ``W`` in edge frames.
    """
    f = np.asarray(f, float)
    g = geometry_cache(mesh, f)
    d = g.edge_vectors
    a, b = mesh.edges[:, 0], mesh.edges[:, 1]
    frames = edge_frames(mesh, f, g)
    out = []
    for l in range(3):
        el = np.eye(3)[l]
        t = omega * d[:, l]
        alpha = np.zeros(mesh.vertex_count)
        np.add.at(alpha, a, 0.5 * t)          # omega(e*_ab) <e_l, f_b - f_a>
        np.add.at(alpha, b, 0.5 * t)          # both signs flip from b's side
        W3 = omega[:, None] * np.cross(el, d)
        out.append((alpha, to_frames(frames, W3)))
    return out


@dataclass
class HighGenusResult:
    u: np.ndarray
    Z: np.ndarray
    eta: np.ndarray
    pairings: np.ndarray            # (2g, 3)
    periods: np.ndarray             # (2g, 3), tree-cotree oracle
    exact: bool
    fdot: np.ndarray | None
    u_kl: np.ndarray                # (2g, 3, V)

    def as_dict(self):
        return {"genus": len(self.pairings) // 2,
                "pairing_values": self.pairings.ravel().tolist(),
                "exact": self.exact}


def high_genus_solve(mesh, f, rho, tol=None, strict=True, root=0):
    """Conformal deformation of a higher-genus surface with prescribed ``rho``.

    Solves ``D(u, Z) = (rho, 0)`` and decides exactness of the resulting
    1-form from the ``6g`` pairings ``sum_i rho_i u_kl,i``.

    Raises
    ------
    PairingFailed
        If some pairing is non-zero and ``strict`` is set; otherwise the
        result carries ``exact=False`` and ``fdot=None``.
    """
    f, rho = np.asarray(f, float), np.asarray(rho, float)
    _require_closed(mesh)
    check_rho_sum(rho, tol)
    _require_trivial_kernel(mesh, f)
    tol = default_tol(tol)
    omegas = obstruction_basis(mesh)
    u_kl = np.zeros((omegas.shape[1], 3, mesh.vertex_count))
    for k in range(omegas.shape[1]):
        for l, (alpha, W) in enumerate(obstruction_data(mesh, f, omegas[:, k])):
            uk, _, res = solve_dirac(mesh, f, alpha, W)
            u_kl[k, l] = uk - uk.mean()
    P = np.einsum("klv,v->kl", u_kl, rho)

    u, Z, _ = solve_dirac(mesh, f, rho)
    eta = build_eta(mesh, f, u, Z, tol=1e-8)
    per = periods(mesh, eta)
    bound = tol * max(np.linalg.norm(rho), 1e-300) * max(np.abs(u_kl).max(initial=0.0), 1.0)
    exact = bool(np.abs(P).max(initial=0.0) <= bound)
    fdot = integrate_one_form(mesh, eta, root=root, tol=1e-8) if exact else None
    if not exact and strict:
        raise PairingFailed(f"{np.count_nonzero(np.abs(P) > bound)} of {P.size} "
                            f"pairings are non-zero (max {np.abs(P).max():.3g})",
                            values=P.ravel().tolist())
    return HighGenusResult(u, Z, eta, P, per, exact, fdot, u_kl)
