"""Tabulate rigidity, conformal dimension, Dirac kernel and isothermicity over the zoo."""

import argparse
import json
from dataclasses import asdict, dataclass, field

from confdefo.conformal import conformal_space, is_isothermic, isometric_space
from confdefo.dirac import kernel
from confdefo.errors import GenerationFailed
from confdefo.mesh import genus
from confdefo.zoo import ZooSpec, generate


@dataclass
class SurveyConfig:
    meshes: list = field(default_factory=lambda: [
        ZooSpec("tetrahedron"), ZooSpec("octahedron"), ZooSpec("icosahedron"),
        ZooSpec("jessen"), ZooSpec("bricard"), ZooSpec("uv_sphere", (8, 6)),
        ZooSpec("perturbed", base=ZooSpec("octahedron"), seed=0, magnitude=0.05),
        ZooSpec("perturbed", base=ZooSpec("icosahedron"), seed=0, magnitude=0.05),
        ZooSpec("torus", (8, 8)),
        ZooSpec("perturbed", base=ZooSpec("torus", (8, 8)), seed=1, magnitude=0.05),
        ZooSpec("holey_slab", (2,)),
    ])


def label(spec):
    if spec.name == "perturbed":
        return f"perturbed({label(spec.base)}, seed={spec.seed})"
    return spec.name + (str(spec.params) if spec.params else "")


def survey(cfg):
    rows = []
    for spec in cfg.meshes:
        try:
            m, f = generate(spec)
        except GenerationFailed as exc:
            rows.append({"mesh": label(spec), "error": str(exc)})
            continue
        k = kernel(m, f)
        rows.append({
            "mesh": label(spec), "V": m.vertex_count, "genus": genus(m),
            "isometric_nullity": isometric_space(m, f).nullity,
            "conformal_dim": conformal_space(m, f, cross_check=False).dimension,
            "dim_ker_D": k.dim, "kernel_status": k.status,
            "isothermic": is_isothermic(m, f)[0],
        })
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--json", action="store_true", help="print JSON instead of a table")
    args = ap.parse_args()
    rows = survey(SurveyConfig())
    if args.json:
        print(json.dumps({"config": [asdict(s) for s in SurveyConfig().meshes], "rows": rows},
                         indent=2, default=str))
        return
    cols = ["mesh", "V", "genus", "isometric_nullity", "conformal_dim", "dim_ker_D",
            "kernel_status", "isothermic"]
    print("  ".join(f"{c:>17}" if c != "mesh" else f"{c:<34}" for c in cols))
    for r in rows:
        if "error" in r:
            print(f"{r['mesh']:<34}  {r['error']}")
            continue
        print("  ".join(f"{str(r[c]):>17}" if c != "mesh" else f"{r[c]:<34}" for c in cols))


if __name__ == "__main__":
    main()
