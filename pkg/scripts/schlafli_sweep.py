"""Schläfli and angular-velocity residuals over many random conformal deformations."""

import argparse
from dataclasses import dataclass

import numpy as np

from confdefo.conformal import angular_velocity_residual, conformal_space, deformation_rates
from confdefo.geometry import geometry_cache
from confdefo.zoo import ZooSpec, generate


@dataclass
class SweepConfig:
    samples: int = 50
    seed: int = 0
    meshes: tuple = ("octahedron", "icosahedron", "jessen", "bricard")


def sweep(cfg):
    rng = np.random.default_rng(cfg.seed)
    out = {}
    for name in cfg.meshes:
        m, f = generate(ZooSpec(name))
        cs = conformal_space(m, f, cross_check=False)
        lengths = geometry_cache(m, f).lengths
        sch, ave = [], []
        for _ in range(cfg.samples):
            fdot = (cs.basis @ rng.standard_normal(cs.dimension)).reshape(f.shape)
            u, _, r = deformation_rates(m, f, fdot)
            sch.append(abs(r.schlafli_sum()) / np.nansum(np.abs(r.alpha_dot) * lengths))
            ave.append(angular_velocity_residual(m, f, r, u)[1])
        out[name] = (max(sch), max(ave))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=SweepConfig.samples)
    ap.add_argument("--seed", type=int, default=SweepConfig.seed)
    args = ap.parse_args()
    res = sweep(SweepConfig(samples=args.samples, seed=args.seed))
    print(f"{'mesh':<14}{'max schlafli':>16}{'max ang. vel.':>16}")
    for name, (s, a) in res.items():
        print(f"{name:<14}{s:>16.2e}{a:>16.2e}")


if __name__ == "__main__":
    main()
