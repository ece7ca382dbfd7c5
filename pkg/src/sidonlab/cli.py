"""``lab`` command line interface.

Exit codes: 0 on completion, 2 on configuration errors, 3 on I/O errors.
Failing checks are report content and do not change the exit code.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import generators as gen
from .chaos import mela_lp
from .experiments import PRESETS, ExperimentConfig, emit_report, run_preset
from .orlicz import psi2_norm, subgaussian_constant
from .sidon import randomly_sidon_constant, sidon_constant, tensor_sidon_constant
from .spaces import FunctionSystem, dump_system, load_system
from .tensornorms import ChaosMap, decompose_t_r

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


def _ints(text):
    return [int(x) for x in text.split(",") if x.strip()]


def _gen(args):
    fam = args.family
    if fam == "lacunary":
        ex = _ints(args.exponents) if args.exponents else [2 ** k for k in range(args.N)]
        sys_ = gen.make_lacunary(ex, args.grid_m or 4 * max(ex))
    elif fam == "walsh":
        m = args.N
        sys_ = gen.make_rademacher(m) if not args.subsets else gen.make_walsh(
            m, [_ints(s) for s in args.subsets.split(";")])
    elif fam == "haar":
        sys_ = gen.make_haar_unitary_system(args.dims, args.samples, args.seed)
    elif fam == "gaussian":
        sys_ = gen.make_gaussian_system(args.N, args.samples, args.seed, args.complex)
    else:  # character
        sys_ = gen.character_samples(args.dims, args.samples, args.seed)
    dump_system(sys_, args.out)
    return {"family": fam, "out": str(args.out)}


def _psi2(args):
    sys_ = load_system(args.file)
    out = {}
    if isinstance(sys_, FunctionSystem):
        out["row_psi2"] = [psi2_norm(r, sys_.space.weights).norm for r in sys_.values]
    sg = subgaussian_constant(sys_, restarts=args.restarts, rng=args.seed)
    out.update(constant_C=sg.constant_C, constant_sigma=sg.constant_sigma)
    return out


def _sidon(args):
    sys_ = load_system(args.file)
    rng = np.random.default_rng(args.seed)
    if args.tensor > 1:
        est = tensor_sidon_constant(sys_, args.tensor, mode=args.mode, coefficients=args.coefficients, rng=rng)
    else:
        est = sidon_constant(sys_, mode=args.mode, coefficients=args.coefficients, rng=rng)
    return est.to_dict()


def _random_sidon(args):
    sys_ = load_system(args.file)
    est = randomly_sidon_constant(sys_, samples=args.samples, randomizer=args.randomizer, seed=args.seed)
    return {"value": est.value, "std_error": est.std_error, "mc_samples": est.mc_samples,
            "randomizer": est.randomizer, "rs3_ratio": est.rs3_ratio}


def _decompose(args):
    rng = np.random.default_rng(args.seed)
    x1 = rng.standard_normal((args.samples, args.nvars))
    x2 = rng.standard_normal((args.samples, args.nvars))
    u1 = ChaosMap.evaluation(x1, args.nvars, args.degree)
    u2 = ChaosMap.evaluation(x2, args.nvars, args.degree)
    d = decompose_t_r(u1, u2, args.delta, rng=args.seed)
    return {"identity_exact": d.identity_exact, "wedge_t": d.wedge_t, "wedge_target": d.wedge_target,
            "vee_r": d.vee_r.value, "vee_target": d.vee_target, "gamma2_r": d.gamma2_r.value,
            "gamma2_r_certified": d.gamma2_r_upper}


def _mela(args):
    return mela_lp(args.delta).to_dict()


def _exp(args):
    cfg = ExperimentConfig(args.preset, seed=args.seed, out_path=str(args.out))
    rep = run_preset(cfg)
    emit_report(rep, args.out, "json", include_timing=args.timing)
    if args.csv:
        emit_report(rep, Path(args.out).with_suffix(".csv"), "csv")
    failed = [c.name for c in rep.checks if not c.passed]
    return {"preset": args.preset, "checks": len(rep.checks), "failed": failed}


def build_parser():
    p = argparse.ArgumentParser(prog="lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a system and save it as JSON")
    g.add_argument("family", choices=["lacunary", "walsh", "haar", "gaussian", "character"])
    g.add_argument("--N", type=int, default=4)
    g.add_argument("--exponents", help="comma separated, lacunary only")
    g.add_argument("--subsets", help="walsh subsets, e.g. '1;2;1,2'")
    g.add_argument("--grid-m", type=int)
    g.add_argument("--dims", type=int, default=4)
    g.add_argument("--samples", type=int, default=1000)
    g.add_argument("--complex", action="store_true")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_gen)

    s = sub.add_parser("psi2", help="row psi2 norms and subGaussian constants")
    s.add_argument("file")
    s.add_argument("--restarts", type=int, default=8)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=_psi2)

    s = sub.add_parser("sidon", help="Sidon constant bracket")
    s.add_argument("file")
    s.add_argument("--tensor", type=int, default=1)
    s.add_argument("--mode", choices=["exact", "sampled"], default=None)
    s.add_argument("--coefficients", choices=["complex", "real"], default="complex")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=_sidon)

    s = sub.add_parser("random-sidon", help="randomly Sidon constant")
    s.add_argument("file")
    s.add_argument("--samples", type=int, default=2000)
    s.add_argument("--randomizer", default="gaussian-complex")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=_random_sidon)

    s = sub.add_parser("decompose", help="t + r decomposition of a chaos kernel")
    s.add_argument("--delta", type=float, default=0.3)
    s.add_argument("--nvars", type=int, default=4)
    s.add_argument("--degree", type=int, default=5)
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=_decompose)

    s = sub.add_parser("mela", help="Mela measure LP")
    s.add_argument("--delta", type=float, required=True)
    s.set_defaults(func=_mela)

    s = sub.add_parser("exp", help="run an experiment preset")
    s.add_argument("preset", choices=sorted(PRESETS))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--csv", action="store_true", help="also write checks as CSV next to the JSON")
    s.add_argument("--timing", action="store_true", help="include wall-clock time in the JSON")
    s.set_defaults(func=_exp)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    if getattr(args, "mode", "unset") is None:
        args.mode = "sampled" if args.tensor > 1 else "exact"
    try:
        out = args.func(args)
    except OSError as e:
        print(f"lab: I/O error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, json.JSONDecodeError) as e:
        print(f"lab: configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(out, default=float))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
