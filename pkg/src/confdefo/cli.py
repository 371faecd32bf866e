"""Command-line front end.

Every subcommand prints a deterministic JSON report on stdout. Exit codes:
0 success, 1 a check failed or a deformation is obstructed, 2 bad input.
A mesh argument is a path to an OFF/OBJ file or ``zoo:<name>[:a,b,...]``.
"""

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import conformal, dirac, homology, moebius
from .errors import ConfDefoError, PairingFailed, Unrealizable
from .geometry import edge_metric, geometry_cache, length_cross_ratios
from .mesh import genus
from .meshio import format_off, load_mesh, save_mesh
from .numerics import RANK_TOL, default_tol
from .zoo import ZooSpec, generate, perturbed

SCHEMA_VERSION = 1

#: obstructions found on valid input; they exit with 1, not 2
_OBSTRUCTIONS = (Unrealizable, PairingFailed)


class InputError(ConfDefoError):
    code = "input_error"


# --- inputs -------------------------------------------------------------

def load(spec, seed=0, perturb=None):
    if spec.startswith("zoo:"):
        parts = spec.split(":")
        params = ()
        if len(parts) > 2 and parts[2]:
            try:
                params = tuple(int(p) for p in parts[2].split(","))
            except ValueError:
                raise InputError(f"bad zoo parameters {parts[2]!r}") from None
        mesh, f = generate(ZooSpec(parts[1], params, seed=seed))
    else:
        if not Path(spec).exists():
            raise InputError(f"no such file: {spec}")
        mesh, f = load_mesh(spec)
    if perturb:
        mesh, f = perturbed(mesh, f, seed=seed, magnitude=perturb)
    return mesh, f


def _looks_numeric(text):
    try:
        [float(t) for t in text.split(",")]
    except ValueError:
        return False
    return True


def parse_vector(text, n, what):
    """Comma list or JSON file (list, or object keyed by vertex index)."""
    if text is None:
        raise InputError(f"--{what} is required")
    path = Path(text)
    if _looks_numeric(text):
        values = [float(t) for t in text.split(",")]
    elif path.suffix == ".json" or (path.exists() and not path.is_dir()):
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read {what} file: {exc}") from None
        if isinstance(data, dict):
            missing = [i for i in range(n) if str(i) not in data]
            if missing:
                raise InputError(f"{what} file lacks vertices {missing[:10]}")
            extra = set(data) - {str(i) for i in range(n)}
            if extra:
                raise InputError(f"{what} file has unknown keys {sorted(extra)[:10]}")
            values = [data[str(i)] for i in range(n)]
        else:
            values = data
    else:
        try:
            values = [float(t) for t in text.split(",")]
        except ValueError:
            raise InputError(f"cannot parse {what} list {text!r}") from None
    try:
        vec = np.asarray(values, dtype=float)
    except (TypeError, ValueError):
        raise InputError(f"{what} entries must be numbers") from None
    if vec.shape != (n,):
        raise InputError(f"{what} needs {n} entries, got {vec.size}")
    if not np.isfinite(vec).all():
        raise InputError(f"{what} has non-finite entries")
    return vec


def digest(mesh, f):
    return hashlib.sha256(format_off(mesh, f).encode()).hexdigest()


# --- reports ------------------------------------------------------------

class Report:
    def __init__(self, command, args):
        self.doc = {
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "input": {"mesh": getattr(args, "mesh", None)},
            "tolerances": {"tol": default_tol(args.tol), "rank_tol": RANK_TOL},
            "results": {},
            "checks": [],
        }

    def result(self, **kw):
        self.doc["results"].update(kw)

    def check(self, name, value, threshold, ok=None):
        ok = bool(value <= threshold) if ok is None else bool(ok)
        self.doc["checks"].append(
            {"name": name, "value": value, "threshold": threshold, "pass": ok})
        return ok

    @property
    def passed(self):
        return all(c["pass"] for c in self.doc["checks"])

    def dumps(self):
        return json.dumps(_plain(self.doc), sort_keys=True, indent=2) + "\n"


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else repr(x)
    return x


def _write_mesh(args, mesh, positions):
    if args.out and args.format in ("off", "obj"):
        save_mesh(args.out, mesh, positions, fmt=args.format)
        return str(args.out)
    return None


# --- subcommands --------------------------------------------------------

def cmd_info(args, rep, mesh, f):
    g = geometry_cache(mesh, f)
    rep.result(vertices=mesh.vertex_count, edges=mesh.edge_count, faces=mesh.face_count,
               closed=mesh.is_closed, euler_characteristic=mesh.euler_characteristic,
               genus=genus(mesh) if mesh.is_closed else None,
               boundary_edges=int(mesh.boundary_edges.sum()), dimension=f.shape[1],
               total_area=float(g.areas.sum()), scale=g.scale)


def cmd_lcr(args, rep, mesh, f):
    ie = mesh.interior_edges
    values = length_cross_ratios(mesh, edge_metric(mesh, f))
    rep.result(edges=mesh.edges[ie], lcr=values)


def cmd_rigidity(args, rep, mesh, f):
    ns = conformal.isometric_space(mesh, f)
    trivial = conformal.euclidean_motions(f).shape[1]
    rep.result(isometric_nullity=ns.nullity, trivial=trivial,
               nontrivial=ns.nullity - trivial, sv_window=ns.window)


def cmd_conformal_dim(args, rep, mesh, f):
    cs = conformal.conformal_space(mesh, f)
    rep.result(**cs.as_dict())
    rep.check("cross_check_consistent", 0.0, 0.0, ok=cs.consistent)


def cmd_deform_u(args, rep, mesh, f):
    u = parse_vector(args.u, mesh.vertex_count, "u")
    fdot = conformal.solve_from_u(mesh, f, u, tol=args.tol)
    u2, res = conformal.scale_factor_of(mesh, f, fdot)
    err = float(np.abs(u2 - u).max())
    rep.result(u_roundtrip_error=err, epsilon=args.epsilon,
               conformality_residual=float(np.abs(res).max()))
    rep.check("u_roundtrip", err, 1e-8)
    rep.result(written=_write_mesh(args, mesh, f + args.epsilon * fdot))


def cmd_deform_rho(args, rep, mesh, f):
    rho = parse_vector(args.rho, mesh.vertex_count, "rho")
    if mesh.is_closed and genus(mesh) > 0:
        res = homology.high_genus_solve(mesh, f, rho, tol=args.tol)
        rep.result(**res.as_dict())
        fdot = res.fdot
    else:
        sol = dirac.solve_from_rho(mesh, f, rho, tol=args.tol)
        rep.result(dim_ker=sol.kernel.dim, sv_window=sol.kernel.window,
                   rho_roundtrip_error=sol.rho_roundtrip_error)
        rep.check("rho_roundtrip", sol.rho_roundtrip_error, 1e-8)
        fdot = sol.fdot
    rep.result(epsilon=args.epsilon, written=_write_mesh(args, mesh, f + args.epsilon * fdot))


def cmd_kernel(args, rep, mesh, f):
    k = dirac.kernel(mesh, f)
    rep.result(**k.as_dict())


def cmd_isothermic(args, rep, mesh, f):
    flag, ns = conformal.is_isothermic(mesh, f)
    rep.result(isothermic=flag, nullity=ns.nullity, sv_window=ns.window)
    if mesh.is_closed and f.shape[1] == 3:
        cs = conformal.conformal_space(mesh, f, cross_check=False)
        rep.result(conformal_dim=cs.dimension, lower_bound=cs.lower_bound)
        rep.check("dimension_test_agrees", 0.0, 0.0, ok=cs.isothermic == flag)


def cmd_stereo_lift(args, rep, mesh, f):
    F = moebius.StereographicLift().apply(f)
    rep.result(dimension=F.shape[1],
               max_radius_error=float(np.abs(np.linalg.norm(F, axis=1) - 1).max()))
    if args.correspondence:
        rep.result(**moebius.correspondence_check(mesh, f).as_dict())
    rep.result(written=_write_mesh(args, mesh, F))


def cmd_check(args, rep, mesh, f):
    """Battery of identities on one closed realization in R^3."""
    rng = np.random.default_rng(args.seed)
    cs = conformal.conformal_space(mesh, f)
    rep.check("conformal_cross_check", 0.0, 0.0, ok=cs.consistent)
    iso_flag, _ = conformal.is_isothermic(mesh, f)
    if cs.isothermic is not None:
        rep.check("isothermic_tests_agree", 0.0, 0.0, ok=cs.isothermic == iso_flag)
    fdot = (cs.basis @ rng.standard_normal(cs.dimension)).reshape(f.shape)
    u, Z, rr = conformal.deformation_rates(mesh, f, fdot)
    g = geometry_cache(mesh, f)
    scale = float(np.nansum(np.abs(rr.alpha_dot) * g.lengths)) or 1.0
    rep.check("schlafli", abs(rr.schlafli_sum()) / scale, 1e-9)
    _, rel = conformal.angular_velocity_residual(mesh, f, rr, u)
    rep.check("angular_velocity", rel, 1e-9)
    if mesh.is_closed:
        k = dirac.kernel(mesh, f)
        rep.result(dim_ker=k.dim, kernel_status=k.status, sv_window=k.window)
        rep.check("kernel_contains_similarities", 0.0, 0.0, ok=k.dim >= 4)
        Dm = dirac.dirac_matrix(mesh, f)
        x = rng.standard_normal(Dm.shape[1])
        y = rng.standard_normal(Dm.shape[0])
        V = mesh.vertex_count
        rt, Y = dirac.dirac_adjoint_apply(mesh, f, y[:V], y[V:].reshape(-1, 2))
        gap = abs(y @ (Dm @ x) - x @ np.concatenate([rt, Y.ravel()]))
        rep.check("adjointness", gap / (np.linalg.norm(x) * np.linalg.norm(y)), 1e-12)
        rho_d = dirac.dirac_apply(mesh, f, u, Z)
        rep.check("dirac_of_deformation", float(np.abs(rho_d[0] - rr.rho).max()
                                                + np.abs(rho_d[1]).max()) / scale, 1e-9)
    rep.result(conformal_dim=cs.dimension, isothermic=iso_flag)


def cmd_zoo(args, rep, mesh, f):
    rep.result(vertices=mesh.vertex_count, faces=mesh.face_count,
               written=_write_mesh(args, mesh, f))


COMMANDS = {
    "info": cmd_info, "lcr": cmd_lcr, "rigidity": cmd_rigidity,
    "conformal-dim": cmd_conformal_dim, "deform-u": cmd_deform_u,
    "deform-rho": cmd_deform_rho, "kernel": cmd_kernel, "isothermic": cmd_isothermic,
    "stereo-lift": cmd_stereo_lift, "check": cmd_check, "zoo": cmd_zoo,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None,
                        help="relative tolerance (default: $CONFDEFO_TOL or 1e-10)")
    common.add_argument("--epsilon", type=float, default=1e-2,
                        help="step for written deformed meshes f + eps*fdot")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--perturb", type=float, default=None,
                        help="randomly perturb the input vertices by this magnitude")
    common.add_argument("--out", type=Path, default=None)
    common.add_argument("--format", choices=("off", "obj", "json"), default="off")

    p = argparse.ArgumentParser(prog="confdefo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "zoo":
            sp.add_argument("name", help="zoo entry, optionally name:a,b")
        else:
            sp.add_argument("mesh")
        if name == "deform-u":
            sp.add_argument("--u", help="comma list or JSON file")
        if name == "deform-rho":
            sp.add_argument("--rho", help="comma list or JSON file")
        if name == "stereo-lift":
            sp.add_argument("--correspondence", action="store_true",
                            help="also compare conformal and lifted isometric spaces")
    return p


def run(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "zoo":
        args.mesh = "zoo:" + args.name
    rep = Report(args.command, args)
    code = 0
    try:
        if args.tol is not None and not args.tol > 0:
            raise InputError("--tol must be positive")
        mesh, f = load(args.mesh, seed=args.seed, perturb=args.perturb)
        rep.doc["input"]["sha256"] = digest(mesh, f)
        COMMANDS[args.command](args, rep, mesh, f)
        code = 0 if rep.passed else 1
    except _OBSTRUCTIONS as exc:
        rep.doc["error"] = {"code": exc.code, "message": str(exc)}
        vals = getattr(exc, "pairings", None) or getattr(exc, "values", None)
        if vals is not None:
            rep.doc["error"]["values"] = vals
        code = 1
    except ConfDefoError as exc:
        rep.doc["error"] = {"code": exc.code, "message": str(exc)}
        code = 2
    except (OSError, ValueError) as exc:
        rep.doc["error"] = {"code": "input_error", "message": str(exc)}
        code = 2
    text = rep.dumps()
    if args.out and args.format == "json":
        Path(args.out).write_text(text)
    stdout.write(text)
    if "error" in rep.doc:
        print(f"confdefo: {rep.doc['error']['code']}: {rep.doc['error']['message']}",
              file=sys.stderr)
    return code


def main():
    sys.exit(run())
