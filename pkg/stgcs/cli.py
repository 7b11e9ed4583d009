"""`stgcs` command line: plan, gen, bench, validate, emit-svg.

Exit codes: 0 success, 2 planning failure (or invalid solution), 3 invalid input.
"""

import argparse
import sys
from typing import List, Optional

from .src.bench_io import (
    InstanceFile, gen_instances, load_instance, load_solution, read_instance_file,
    run_bench, save_instance, save_solution, aggregate_rows, SUMMARY_COLUMNS,
)
from .src.constants import EPSILON, TIME_BUDGET_S, get_default_data_dir
from .src.core import File
from .src.errors import ContractError, CrowdingError, LoadError, UnsupportedDimensionError
from .src.gcsprog import SolveParams
from .src.maps import MAP_NAMES, get_map
from .src.mrmp import PLANNERS, plan, validate
from .utils import BenchConfig, enable_progress, logger, set_verbosity

EXIT_OK = 0
EXIT_PLAN_FAILED = 2
EXIT_INVALID_INPUT = 3


def _n_range(value: str) -> List[int]:
    """`3`, `1-6` or `1,2,5`."""
    try:
        if '-' in value:
            lo, hi = value.split('-', 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(v) for v in value.split(',')]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f'Invalid robot range {value!r}') from e


def _add_solver_args(p: argparse.ArgumentParser):
    p.add_argument('--solver', choices=['heuristic', 'exhaustive'], default=None, help='Single-robot solve mode.')
    p.add_argument('--seed', type=int, default=None, help='Random seed for rounding, RP and instance sampling.')
    p.add_argument('--budget-s', type=float, default=None, help=f'Wall-clock budget per run (default {TIME_BUDGET_S:g}).')
    p.add_argument('--eps', type=float, default=None, help=f'Minimum dwell per convex set (default {EPSILON:g}).')
    p.add_argument('--path-budget', type=int, default=None, help='Rounded paths per solve (default ceil(1e3 ln|E|)).')


def _solve_params(args) -> SolveParams:
    return SolveParams(
        epsilon=args.eps if args.eps is not None else EPSILON,
        path_budget=args.path_budget,
        rng_seed=args.seed or 0,
        mode=args.solver or 'heuristic',
    )


def _budget(args) -> float:
    return args.budget_s if args.budget_s is not None else TIME_BUDGET_S


def _instance_file(args) -> InstanceFile:
    if args.instance:
        return read_instance_file(args.instance)
    entry = get_map(args.map)
    if not entry.robots:
        raise ContractError(f'Map {args.map!r} has no default robots; pass --instance')
    return InstanceFile.from_map(entry)


def cmd_plan(args) -> int:
    inst = _instance_file(args).to_instance(_solve_params(args), _budget(args))
    result = plan(inst, args.method)
    print(File.jsondumps(result.to_report()))
    if not result.success:
        return EXIT_PLAN_FAILED
    if args.out:
        save_solution(result.solution, args.out)
    if args.svg:
        from .src.render import emit_svg
        emit_svg(result.solution, inst, args.svg)
    return EXIT_OK


def cmd_gen(args) -> int:
    out_dir = args.out or File.join(get_default_data_dir(), 'instances')
    seed = args.seed or 0
    for idx, inst in enumerate(gen_instances(args.map, args.n, args.count, seed)):
        save_instance(inst, File.join(out_dir, f'{args.map}_n{args.n}_{idx:02d}.json'))
    logger.info(f'Wrote {args.count} instances to {out_dir}')
    return EXIT_OK


def cmd_bench(args) -> int:
    config = BenchConfig.load_config(args.config) if args.config else BenchConfig()
    config.override(
        maps=args.maps, n_range=args.n_range, methods=args.methods, count=args.count, seed=args.seed,
        budget_s=args.budget_s, solver=args.solver, epsilon=args.eps, path_budget=args.path_budget,
        workers=args.workers, out_dir=args.out,
    )
    rows = run_bench(config)
    for row in aggregate_rows(rows):
        print(','.join(str(row[k]) for k in SUMMARY_COLUMNS))
    return EXIT_OK


def cmd_validate(args) -> int:
    inst = load_instance(args.instance)
    report = validate(load_solution(args.solution), inst)
    print(File.jsondumps(report.to_dict()))
    return EXIT_OK if report.ok else EXIT_PLAN_FAILED


def cmd_emit_svg(args) -> int:
    from .src.render import emit_svg
    inst = load_instance(args.instance)
    emit_svg(load_solution(args.solution), inst, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='stgcs', description='Space-time graphs of convex sets for multi-robot planning.')
    parser.add_argument('--verbose', '-v', action='store_true', help='Debug logging.')
    parser.add_argument('--progress', action='store_true', help='Show progress bars.')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('plan', help='Plan one instance.')
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument('--instance', help='Instance JSON file.')
    src.add_argument('--map', choices=MAP_NAMES, help='Catalog map with its default robots.')
    p.add_argument('--method', choices=sorted(PLANNERS), default='pbs')
    _add_solver_args(p)
    p.add_argument('--out', help='Write the solution JSON here.')
    p.add_argument('--svg', help='Also render the solution to this SVG file.')
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser('gen', help='Generate random instances.')
    p.add_argument('--map', choices=MAP_NAMES, required=True)
    p.add_argument('--n', type=int, required=True, help='Number of robots.')
    p.add_argument('--count', type=int, default=12)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--out', help='Output directory (default $STGCS_DATA_DIR/instances).')
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser('bench', help='Run a benchmark matrix.')
    p.add_argument('--config', help='YAML bench configuration; flags override it.')
    p.add_argument('--maps', nargs='+', choices=MAP_NAMES, default=None)
    p.add_argument('--n-range', type=_n_range, default=None, help='Robot counts, e.g. 1-6.')
    p.add_argument('--methods', nargs='+', choices=sorted(PLANNERS), default=None)
    p.add_argument('--count', type=int, default=None, help='Instances per cell.')
    p.add_argument('--workers', type=int, default=None)
    p.add_argument('--out', help='Directory for bench.csv, summary.csv and bench.yaml.')
    _add_solver_args(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser('validate', help='Check a solution against its instance.')
    p.add_argument('--instance', required=True)
    p.add_argument('--solution', required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser('emit-svg', help='Render a 2D solution.')
    p.add_argument('--instance', required=True)
    p.add_argument('--solution', required=True)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_emit_svg)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.verbose:
        set_verbosity('debug')
    if args.progress:
        enable_progress()
    try:
        return args.func(args)
    except (LoadError, ContractError, CrowdingError, UnsupportedDimensionError) as e:
        logger.error(str(e))
        return EXIT_INVALID_INPUT


if __name__ == '__main__':
    sys.exit(main())
