"""Möbius maps, their differentials and the stereographic correspondence.

Every map acts on ``(V, n)`` position arrays and pushes velocity fields
forward through its differential. A conformal deformation stays conformal
under every map here; :func:`correspondence_check` verifies that conformal
deformations in R^n match isometric deformations of the stereographic lift
in R^(n+1).
"""

from dataclasses import dataclass

import numpy as np

from .conformal import conformal_space, isometric_space, rigidity_matrix, scale_factor_of
from .errors import NotIsometric, NotOnSphere, SingularVertex
from .numerics import RANK_TOL, default_tol

#: vertices closer than this to a singular point are rejected
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class Inversion:
    """``f -> -f / |f|^2`` about the origin."""

    def apply(self, f):
        f = np.asarray(f, float)
        r2 = _sq(f)
        if (r2 <= SINGULAR_TOL**2).any():
            raise SingularVertex(f"vertex {int(np.argmin(r2))} sits at the inversion centre")
        return -f / r2[:, None]

    def pushforward(self, f, fdot):
        f, fdot = np.asarray(f, float), np.asarray(fdot, float)
        self.apply(f)
        r2 = _sq(f)
        dot = np.einsum("vn,vn->v", fdot, f)
        return -fdot / r2[:, None] + (2 * dot / r2**2)[:, None] * f

    def scale_factor(self, f, fdot, u):
        """Scale factor of the pushed-forward deformation, ``u - 2<fdot,f>/|f|^2``."""
        f, fdot = np.asarray(f, float), np.asarray(fdot, float)
        return np.asarray(u, float) - 2 * np.einsum("vn,vn->v", fdot, f) / _sq(f)


@dataclass(frozen=True)
class Translation:
    vector: tuple

    def apply(self, f):
        return np.asarray(f, float) + np.asarray(self.vector, float)

    def pushforward(self, f, fdot):
        return np.asarray(fdot, float).copy()

    def scale_factor(self, f, fdot, u):
        return np.asarray(u, float).copy()


@dataclass(frozen=True)
class Dilation:
    factor: float

    def apply(self, f):
        return self.factor * np.asarray(f, float)

    def pushforward(self, f, fdot):
        return self.factor * np.asarray(fdot, float)

    def scale_factor(self, f, fdot, u):
        return np.asarray(u, float).copy()


@dataclass(frozen=True)
class StereographicLift:
    """``x -> (2x, |x|^2 - 1) / (|x|^2 + 1)`` from R^n onto the unit sphere in R^(n+1).

    The north pole ``(0, ..., 0, 1)`` is the image of infinity.
    """

    def apply(self, f):
        f = np.asarray(f, float)
        s = 1 + _sq(f)
        return np.hstack([2 * f, (s - 2)[:, None]]) / s[:, None]

    def pushforward(self, f, fdot):
        f, v = np.asarray(f, float), np.asarray(fdot, float)
        s = 1 + _sq(f)
        xv = np.einsum("vn,vn->v", f, v)
        top = 2 * v / s[:, None] - (4 * xv / s**2)[:, None] * f
        return np.hstack([top, (4 * xv / s**2)[:, None]])

    def scale_factor(self, f, fdot, u):
        """``u - 2<x, xdot>/(1+|x|^2)``, the log-rate of the conformal factor added."""
        f, v = np.asarray(f, float), np.asarray(fdot, float)
        return np.asarray(u, float) - 2 * np.einsum("vn,vn->v", f, v) / (1 + _sq(f))


@dataclass(frozen=True)
class Compose:
    """``maps[-1] o ... o maps[0]``."""

    maps: tuple

    def apply(self, f):
        for m in self.maps:
            f = m.apply(f)
        return f

    def pushforward(self, f, fdot):
        for m in self.maps:
            f, fdot = m.apply(f), m.pushforward(f, fdot)
        return fdot

    def scale_factor(self, f, fdot, u):
        for m in self.maps:
            f, fdot, u = m.apply(f), m.pushforward(f, fdot), m.scale_factor(f, fdot, u)
        return u


def _sq(f):
    return np.einsum("vn,vn->v", f, f)


def apply(map_, f):
    return map_.apply(f)


def pushforward(map_, f, fdot):
    """``(Phi(f), dPhi(fdot))``."""
    return map_.apply(f), map_.pushforward(f, fdot)


# --- sphere <-> tangent fields ------------------------------------------

def _require_sphere(f, tol):
    dev = np.abs(np.sqrt(_sq(f)) - 1)
    if dev.max(initial=0.0) > tol:
        raise NotOnSphere(f"vertex {int(np.argmax(dev))} is off the unit sphere by {dev.max():.3g}")


def tangent_projection(mesh, f, v, tol=None, check=True):
    """Project an isometric deformation of an inscribed mesh onto the sphere.

    Returns ``(v_T, u)`` with ``v_T = v - <v,f> f`` and scale factor
    ``u = -<v,f>``.
    """
    f, v = np.asarray(f, float), np.asarray(v, float)
    tol = default_tol(tol)
    _require_sphere(f, 1e-9)
    if check:
        res = rigidity_matrix(mesh, f) @ v.ravel()
        scale = max(np.abs(v).max(initial=0.0), 1e-300) * max(np.abs(f).max(), 1.0)
        if np.abs(res).max(initial=0.0) > tol * scale:
            raise NotIsometric(f"rigidity residual {np.abs(res).max():.3g}")
    dot = np.einsum("vn,vn->v", v, f)
    return v - dot[:, None] * f, -dot


def lift(f, w, u):
    """Inverse of :func:`tangent_projection`: ``v = w - u f``."""
    f = np.asarray(f, float)
    return np.asarray(w, float) - np.asarray(u, float)[:, None] * f


@dataclass
class CorrespondenceReport:
    conformal_dim: int
    isometric_dim: int
    bijection_residual: float
    conformal_window: list
    isometric_window: list

    @property
    def equal(self):
        return self.conformal_dim == self.isometric_dim

    def as_dict(self):
        return {"conformal_dim": self.conformal_dim, "isometric_dim": self.isometric_dim,
                "equal": self.equal, "bijection_residual": self.bijection_residual}


def correspondence_check(mesh, f, tol=RANK_TOL):
    """Compare conformal deformations of ``f`` with isometric ones of its lift.

    Each conformal basis field is pushed to the sphere, lifted with its scale
    factor and tested against the rigidity matrix of the lifted mesh; the
    largest relative rigidity residual is reported.
    """
    f = np.asarray(f, float)
    phi = StereographicLift()
    F = phi.apply(f)
    cs = conformal_space(mesh, f, tol, cross_check=False)
    iso = isometric_space(mesh, F, tol)
    R = rigidity_matrix(mesh, F)
    worst = 0.0
    images = []
    for k in range(cs.dimension):
        fdot = cs.basis[:, k].reshape(f.shape)
        w = phi.pushforward(f, fdot)
        u, _ = scale_factor_of(mesh, F, w)
        v = lift(F, w, u)
        images.append(v.ravel())
        worst = max(worst, float(np.abs(R @ v.ravel()).max() / max(np.abs(v).max(), 1e-300)))
    if images:
        # the images must be independent for the map to be injective
        s = np.linalg.svd(np.array(images).T, compute_uv=False)
        if s[-1] <= tol * s[0]:
            worst = max(worst, np.inf)
    return CorrespondenceReport(cs.dimension, iso.nullity, worst,
                                cs.nullspace.window, iso.window)
