"""Command-line interface.

    samap gen cd2d --m 64 --out data/cd2d
    samap gen shifted --m 30 --shifts 0,10,20 --out data/shifted
    samap run --seq data/cd2d/sequence.txt --recipe target --recipe col:0.8@level1 --out results
    samap closure-check source.mtx target.mtx
    samap exactmap-study --seq data/shifted/sequence.txt --drop-tol 1e-2 --drop-tol 1e-4 --out results
    samap sparsify --matrix A.mtx --recipe lfil:5@level1 --out pattern.mtx

Exit status: 0 on success, 1 for configuration/input errors, 2 for
numerical failures.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import logging
import sys
from pathlib import Path

from .errors import ConfigError, NumericalError
from .experiment import DEFAULT_RECIPES, ExperimentConfig, run_closure_check, run_exactmap_study, run_experiment
from .mmio import read_matrix_market, write_matrix_market, write_sequence
from .patterns import parse_recipe
from .problems import Cd2dConfig, ShiftedConfig, generate_cd2d_sequence, generate_shifted_sequence
from .sparse import DEFAULT_DENSE_CAP, check_sequence

log = logging.getLogger("samap")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace("\n", ",").split(",") if x.strip()]


def _coerce(cls, key, raw):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    if key not in fields:
        raise ConfigError(f"unknown {cls.__name__} key {key!r}")
    default = fields[key].default
    if default is dataclasses.MISSING:
        default = fields[key].default_factory()
    try:
        if isinstance(default, list):
            return _floats(raw)
        if isinstance(default, bool):
            return raw.lower() in ("1", "true", "yes", "on")
        return type(default)(raw)
    except ValueError:
        raise ConfigError(f"bad value {raw!r} for {cls.__name__}.{key}") from None


def _read_ini(path):
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parser


def build_config(cls, ini_path=None, section=None, **overrides):
    """Dataclass ``cls`` from an optional ``key = value`` section plus flag overrides."""
    values = {}
    if ini_path is not None:
        parser = _read_ini(ini_path)
        if parser.has_section(section):
            for key, raw in parser.items(section):
                values[key] = _coerce(cls, key, raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return cls(**values)


def _cmd_gen(args) -> int:
    if args.problem == "cd2d":
        cfg = build_config(Cd2dConfig, args.config, "cd2d", m=args.m, eta=args.eta, gamma=args.gamma,
                           newton_tol=args.newton_tol, max_newton=args.max_newton)
        seq = generate_cd2d_sequence(cfg)
    else:
        shifts = _floats(args.shifts) if args.shifts else None
        cfg = build_config(ShiftedConfig, args.config, "shifted", m=args.m, shifts=shifts, mass_kind=args.mass)
        seq = generate_shifted_sequence(cfg)
    verdict = check_sequence(seq)
    manifest = write_sequence(seq, args.out)
    print(f"wrote {len(seq)} matrices (n={seq.n}) and {manifest}; nested patterns: {verdict}")
    return EXIT_OK


def _experiment_config(args, with_recipes=True) -> ExperimentConfig:
    source = args.seq
    target = args.target
    recipes = args.recipe if with_recipes else None
    out = args.out
    dense_cap = args.dense_cap
    drop_tols = getattr(args, "drop_tol", None)
    if args.config is not None:
        parser = _read_ini(args.config)
        run = parser["run"] if parser.has_section("run") else {}
        if source is None:
            if "seq" in run:
                source = Path(run["seq"])
            elif parser.has_section("cd2d"):
                source = build_config(Cd2dConfig, args.config, "cd2d")
            elif parser.has_section("shifted"):
                source = build_config(ShiftedConfig, args.config, "shifted")
        if target is None and "target" in run:
            target = int(run["target"])
        if not recipes and "recipes" in run:
            recipes = [r.strip() for r in run["recipes"].replace("\n", ",").split(",") if r.strip()]
        if out is None and "out" in run:
            out = Path(run["out"])
        if dense_cap is None and "dense_cap" in run:
            dense_cap = int(run["dense_cap"])
        if not drop_tols and "drop_tols" in run:
            drop_tols = _floats(run["drop_tols"])
    if source is None:
        raise ConfigError("no sequence given: use --seq <manifest> or a config file")
    kwargs = dict(
        sequence_source=source,
        target_index=0 if target is None else target,
        output_dir=out,
        dense_cap=DEFAULT_DENSE_CAP if dense_cap is None else dense_cap,
    )
    if with_recipes:
        kwargs["recipes"] = recipes or list(DEFAULT_RECIPES)
    if drop_tols:
        kwargs["drop_tols"] = drop_tols
    return ExperimentConfig(**kwargs)


def _cmd_run(args) -> int:
    cfg = _experiment_config(args)
    rows = run_experiment(cfg)
    width = max(len(r.recipe_label) for r in rows) if rows else 6
    print(f"{'k':>4}  {'recipe':<{width}}  {'nnz_pattern':>11}  {'nnz_map':>9}  {'rel_residual':>12}")
    for r in rows:
        print(f"{r.k:>4}  {r.recipe_label:<{width}}  {r.nnz_pattern:>11}  {r.nnz_map:>9}  {r.relative_residual:>12.4e}")
    if cfg.output_dir is not None:
        print(f"wrote {cfg.output_dir / 'run.csv'}")
    return EXIT_OK


def _cmd_closure(args) -> int:
    verdict = run_closure_check(args.source, args.target, drop_tol=args.drop_tol)
    print(verdict.summary())
    return EXIT_OK


def _cmd_study(args) -> int:
    cfg = _experiment_config(args, with_recipes=False)
    rows = run_exactmap_study(cfg)
    print(f"{'k':>4}  {'drop_tol':>10}  {'nnz':>10}")
    for k, tol, nnz in rows:
        print(f"{k:>4}  {tol:>10.3g}  {nnz:>10}")
    if cfg.output_dir is not None:
        print(f"wrote {cfg.output_dir / 'exactmap.csv'}")
    return EXIT_OK


def _cmd_sparsify(args) -> int:
    A = read_matrix_market(args.matrix)
    A_0 = read_matrix_market(args.target_matrix) if args.target_matrix else A
    if A_0.shape != A.shape:
        raise ConfigError(f"target shape {A_0.shape} differs from matrix shape {A.shape}")
    recipe = parse_recipe(args.recipe)
    P = recipe.build(A, A_0)
    if args.out:
        write_matrix_market(P, args.out, comment=f"pattern {recipe.label} of {args.matrix}")
    print(f"{recipe.label}: n={P.nrows} nnz={P.nnz}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="samap", description="Sparse approximate maps for sequences of linear systems")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a matrix sequence")
    gsub = gen.add_subparsers(dest="problem", required=True)
    cd = gsub.add_parser("cd2d", help="Newton Jacobians of nonlinear convection-diffusion")
    cd.add_argument("--m", type=int, help="interior grid points per side (n = m^2)")
    cd.add_argument("--eta", type=float)
    cd.add_argument("--gamma", type=float)
    cd.add_argument("--newton-tol", type=float)
    cd.add_argument("--max-newton", type=int)
    sh = gsub.add_parser("shifted", help="shifted Laplacian systems K + sigma_k M")
    sh.add_argument("--m", type=int)
    sh.add_argument("--shifts", help="comma-separated shifts")
    sh.add_argument("--mass", choices=("diagonal", "tridiagonal"))
    for g in (cd, sh):
        g.add_argument("--config", type=Path, help="INI file with a [cd2d] or [shifted] section")
        g.add_argument("--out", type=Path, required=True)
        g.set_defaults(func=_cmd_gen)

    def add_seq_args(q):
        q.add_argument("--seq", type=Path, help="sequence manifest")
        q.add_argument("--config", type=Path, help="INI file ([run] plus optional [cd2d]/[shifted])")
        q.add_argument("--target", type=int, help="target index (default 0)")
        q.add_argument("--out", type=Path)
        q.add_argument("--dense-cap", type=int)

    run = sub.add_parser("run", help="compute maps for every recipe and write run.csv")
    add_seq_args(run)
    run.add_argument("--recipe", action="append", default=[],
                     help="pattern recipe, repeatable (e.g. target, col:0.8@level1, lfil:5@level2)")
    run.set_defaults(func=_cmd_run)

    cc = sub.add_parser("closure-check", help="compare exact-map support with the transitive closure")
    cc.add_argument("source", type=Path)
    cc.add_argument("target", type=Path)
    cc.add_argument("--drop-tol", type=float, default=1e-12)
    cc.set_defaults(func=_cmd_closure)

    st = sub.add_parser("exactmap-study", help="nnz of thresholded exact maps")
    add_seq_args(st)
    st.add_argument("--drop-tol", type=float, action="append", default=[])
    st.set_defaults(func=_cmd_study)

    spz = sub.add_parser("sparsify", help="write the pattern produced by one recipe")
    spz.add_argument("--matrix", type=Path, required=True)
    spz.add_argument("--target-matrix", type=Path, help="A_0 for 'target' recipes (default: --matrix)")
    spz.add_argument("--recipe", required=True)
    spz.add_argument("--out", type=Path)
    spz.set_defaults(func=_cmd_sparsify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"samap: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"samap: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
