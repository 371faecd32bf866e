"""Exception hierarchy.

Every exception carries a stable machine-readable ``code`` that the CLI
emits in its JSON reports.
"""


class ConfDefoError(Exception):
    code = "error"


# --- mesh combinatorics -------------------------------------------------

class MeshError(ConfDefoError, ValueError):
    code = "mesh_error"


class NonManifoldEdge(MeshError):
    code = "non_manifold_edge"


class NonManifoldVertex(MeshError):
    code = "non_manifold_vertex"


class InconsistentOrientation(MeshError):
    code = "inconsistent_orientation"


class DisconnectedSurface(MeshError):
    code = "disconnected_surface"


class UnknownEdge(MeshError, KeyError):
    code = "unknown_edge"


class NotClosed(ConfDefoError):
    code = "not_closed"


class MeshNotClosed(NotClosed):
    """The mesh has boundary edges but the operation needs a closed surface."""

    code = "mesh_not_closed"


class FormNotClosed(NotClosed):
    """A 1-form has a non-vanishing face (or vertex) sum."""

    code = "form_not_closed"

    def __init__(self, msg, max_violation=None):
        super().__init__(msg)
        self.max_violation = max_violation


class NotSphere(ConfDefoError):
    code = "not_sphere"


# --- file io ------------------------------------------------------------

class ParseError(ConfDefoError, ValueError):
    code = "parse_error"

    def __init__(self, msg, line=None):
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)
        self.line = line


class NonTriangleFace(ParseError):
    code = "non_triangle_face"


# --- geometry -----------------------------------------------------------

class DegenerateRealization(ConfDefoError, ValueError):
    code = "degenerate_realization"


class DegenerateEdge(DegenerateRealization):
    code = "degenerate_edge"


class DegenerateFace(DegenerateRealization):
    code = "degenerate_face"


class BoundaryEdge(ConfDefoError, ValueError):
    code = "boundary_edge"


class TriangleInequalityViolated(ConfDefoError, ValueError):
    code = "triangle_inequality_violated"

    def __init__(self, msg, face=None):
        super().__init__(msg)
        self.face = face


# --- deformations -------------------------------------------------------

class NotConformal(ConfDefoError):
    code = "not_conformal"


class Eq2Violated(ConfDefoError):
    """Left and right face expressions of an edge disagree."""

    code = "eq2_violated"


class NotExact(ConfDefoError):
    code = "not_exact"

    def __init__(self, msg, periods=None):
        super().__init__(msg)
        self.periods = periods


class Unrealizable(ConfDefoError):
    """No deformation has the requested scale factor."""

    code = "unrealizable"

    def __init__(self, msg, residual=None, pairings=None):
        super().__init__(msg)
        self.residual = residual
        self.pairings = pairings


class RhoSumNonzero(ConfDefoError, ValueError):
    code = "rho_sum_nonzero"


class KernelTooLarge(ConfDefoError):
    code = "kernel_too_large"

    def __init__(self, msg, dim=None, window=None, status=None):
        super().__init__(msg)
        self.dim = dim
        self.window = window
        self.status = status


class PairingFailed(ConfDefoError):
    code = "pairing_failed"

    def __init__(self, msg, values=None):
        super().__init__(msg)
        self.values = values


# --- moebius ------------------------------------------------------------

class SingularVertex(ConfDefoError, ValueError):
    code = "singular_vertex"


class NotOnSphere(ConfDefoError, ValueError):
    code = "not_on_sphere"


class NotIsometric(ConfDefoError, ValueError):
    code = "not_isometric"


# --- zoo ----------------------------------------------------------------

class GenerationFailed(ConfDefoError):
    code = "generation_failed"
