"""Command-line interface: ``polyclust run|sweep|separate|synth``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .config import PRESETS, MpcConfig
from .dataset import load_csv
from .errors import ConfigError, InfeasibleError
from .geometry import default_epsilon
from .model import export
from .runner import parse_k_range, run, sweep
from .separation import separate
from . import synth as synth_mod

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 2, 3

log = logging.getLogger("polyclust")


def _epsilon(text: str):
    if text == "auto":
        return "auto"
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or 'auto', got {text!r}") from None


def _model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--data", required=True, help="input CSV with a header row")
    p.add_argument("--schema", help="optional YAML/JSON column schema")
    p.add_argument("--k-max", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--m", dest="M", type=int)
    p.add_argument("--beta", type=int)
    p.add_argument("--epsilon", type=_epsilon)
    p.add_argument("--n-min", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--cd-objective", choices=("silhouette", "kmeans"))
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output directory")


_FIELDS = ("K_max", "lam", "M", "beta", "epsilon", "n_min", "n_max", "restarts", "seed",
           "cd_objective", "workers")


def build_config(args) -> MpcConfig:
    """Preset first, then any explicitly given flag on top."""
    overrides = {f: getattr(args, f) for f in _FIELDS if getattr(args, f, None) is not None}
    if getattr(args, "k", None) is not None:
        overrides["K"] = args.k
    if args.preset:
        return MpcConfig.preset(args.preset, **overrides)
    return MpcConfig(**overrides)


def _load(args):
    try:
        return load_csv(args.data, schema=args.schema)
    except FileNotFoundError as e:
        raise ConfigError(f"cannot read {e.filename}") from None
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _summary(result) -> dict:
    m = result.model
    return {"silhouette": m.silhouette, "loss": m.loss, "representation_error": m.rep_error,
            "K_init": result.K_init, "K_final": m.K, "seed_used": result.seed_used,
            "epsilon": m.epsilon, "wall_time": result.wall_time}


def _write_run_info(out: Path, info: dict) -> None:
    # timings live here so model.json stays byte-stable
    (out / "run.json").write_text(json.dumps(info, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_run(args) -> int:
    ds = _load(args)
    cfg = build_config(args).validate(ds.n)
    result = run(cfg, ds)
    info = _summary(result)
    if args.out:
        out = Path(args.out)
        export(result.model, out, ds)
        _write_run_info(out, info)
    print(json.dumps(info, sort_keys=True))
    return EXIT_OK


def cmd_sweep(args) -> int:
    ds = _load(args)
    try:
        ks = parse_k_range(args.k_range)
    except ValueError as e:
        raise ConfigError(f"bad --k-range: {e}") from None
    cfg = build_config(args).with_(K=ks[0], k_sweep=ks)
    for k in ks:
        k_max = k if cfg.K_max is None else max(k, cfg.K_max)
        cfg.with_(K=k, K_max=k_max, k_sweep=None).validate(ds.n)
    res = sweep(cfg, ds)
    table = res.table()
    if args.out:
        out = Path(args.out)
        export(res.best.model, out, ds)
        with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=list(table[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(table)
        _write_run_info(out, {**_summary(res.best), "per_k": table})
    for row in table:
        print(f"k={row['k']:<3d} silhouette={row['silhouette']:.6f} K_final={row['K_final']} "
              f"seed={row['seed']}")
    print(json.dumps(_summary(res.best), sort_keys=True))
    return EXIT_OK


def _read_points(path) -> np.ndarray:
    try:
        X = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except OSError:
        raise ConfigError(f"cannot read {path}") from None
    except ValueError as e:
        raise ConfigError(f"{path}: {e}") from None
    return X


def cmd_separate(args) -> int:
    left, right = _read_points(args.left), _read_points(args.right)
    if left.shape[1] != right.shape[1]:
        raise ConfigError("left and right files have different numbers of columns")
    M, beta = PRESETS[args.preset].values() if args.preset else (1, 1)
    M = args.M if args.M is not None else M
    beta = args.beta if args.beta is not None else beta
    eps = args.epsilon if args.epsilon is not None else "auto"
    if eps == "auto":
        eps = default_epsilon(np.vstack([left, right]), M, beta)
    try:
        res = separate(left, right, M, beta, eps)
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e)) from None
    h = res.hyperplane
    print(json.dumps({"w": list(h.w), "b": h.b, "epsilon": h.epsilon,
                      "objective": res.objective, "perfect": res.perfect}, sort_keys=True))
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.kind == "xor":
        X, labels = synth_mod.xor_diagonal(args.n, seed=args.seed)
    else:
        try:
            X, labels = synth_mod.blobs(args.blobs, args.n, args.sep, args.seed, args.dim)
        except ValueError as e:
            raise ConfigError(str(e)) from None
    synth_mod.write_csv(args.out, X)
    if args.truth:
        np.savetxt(args.truth, labels, fmt="%d", header="cluster", comments="")
    print(f"wrote {len(X)} points to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyclust", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="cluster a dataset with a fixed initial k")
    p.add_argument("--k", type=int, default=2)
    _model_args(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="best model over a range of initial k")
    p.add_argument("--k-range", required=True, help="LO..HI, a single k, or a comma list")
    _model_args(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("separate", help="solve one separating-hyperplane problem")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--m", dest="M", type=int)
    p.add_argument("--beta", type=int)
    p.add_argument("--epsilon", type=_epsilon)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("synth", help="write a synthetic dataset")
    p.add_argument("--kind", choices=("blobs", "xor"), default="blobs")
    p.add_argument("--blobs", type=int, default=2)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--sep", type=float, default=10.0)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--truth", help="also write ground-truth labels here")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InfeasibleError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
