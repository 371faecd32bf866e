"""Infinitesimal conformal deformations of triangulated surfaces."""

from .errors import ConfDefoError
from .mesh import TriMesh, build_mesh, genus
from .zoo import ZooSpec, generate

__version__ = "0.1.0"

__all__ = ["ConfDefoError", "TriMesh", "build_mesh", "genus", "ZooSpec", "generate"]
