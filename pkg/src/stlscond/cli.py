"""Command-line front end.

Subcommands: gen, solve, cond, bench-time, bench-ratio.  Exit codes are
stable: 0 success, 2 usage error, 3 I/O failure, 4 non-unique problem,
5 degenerate quantity (zero residual or zero solution).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import exact
from .bench import (
    PceConfig,
    PowerConfig,
    SceConfig,
    run_power_spread,
    run_ratio_bench,
    run_timing_bench,
    write_bench_csv,
    write_ratio_csv,
)
from .errors import (
    NongenericProblemError,
    NotPositiveDefiniteError,
    ProblemFormatError,
    SampleTooLargeError,
    ZeroResidualError,
    ZeroSolutionError,
)
from .estimate import pce, power_method, sce
from .generate import GeneratorSpec, generate
from .problem import load_problem, problem_to_dict, solve_stls

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_NONGENERIC = 4
EXIT_DEGENERATE = 5

COND_METHODS = ("kron", "f1", "f2", "power", "pce", "sce")


def _common_options(sub):
    sub.add_argument("--seed", type=int, default=0, help="root random seed")
    sub.add_argument("--format", choices=("json", "csv"), default="json",
                     help="output format where applicable")
    sub.add_argument("--out", default=None, help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stlscond",
        description="Scaled total least squares: solve, condition numbers, benchmarks.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p_gen = subs.add_parser("gen", help="generate a synthetic problem file")
    p_gen.add_argument("--m", type=int, required=True)
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--lambda", dest="lam", type=float, required=True)
    p_gen.add_argument("--ep", type=float, required=True,
                       help="spectral gap parameter in (0, 1)")
    _common_options(p_gen)
    p_gen.set_defaults(func=cmd_gen)

    p_solve = subs.add_parser("solve", help="solve a problem file")
    p_solve.add_argument("--in", dest="input", required=True, help="problem JSON path")
    _common_options(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_cond = subs.add_parser("cond", help="condition number of a problem file")
    p_cond.add_argument("--in", dest="input", required=True, help="problem JSON path")
    p_cond.add_argument("--method", choices=COND_METHODS + ("all",), default="f2")
    _estimator_options(p_cond)
    _common_options(p_cond)
    p_cond.set_defaults(func=cmd_cond)

    p_bt = subs.add_parser("bench-time", help="wall-time benchmark over a grid "
                           "(large cells such as 1000x700 are supported but slow)")
    p_bt.add_argument("--sizes", required=True,
                      help="comma-separated m x n cells, e.g. 200x150,100x70")
    p_bt.add_argument("--lambdas", required=True, help="comma-separated scales")
    p_bt.add_argument("--ep", required=True, help="comma-separated gap parameters")
    p_bt.add_argument("--trials", type=int, default=1)
    p_bt.add_argument("--methods", default="kron,f2",
                      help="comma-separated subset of kron,f1,f2,power,pce,sce")
    p_bt.add_argument("--threads", type=int, default=None,
                      help="worker threads (default: STLSCOND_THREADS or cores)")
    _estimator_options(p_bt)
    _common_options(p_bt)
    p_bt.set_defaults(func=cmd_bench_time)

    p_br = subs.add_parser("bench-ratio", help="estimator/exact accuracy ratios")
    p_br.add_argument("--sizes", required=True)
    p_br.add_argument("--lambdas", required=True)
    p_br.add_argument("--ep", required=True)
    p_br.add_argument("--trials", type=int, default=1)
    p_br.add_argument("--threads", type=int, default=None)
    p_br.add_argument("--vary-initial", type=int, default=0, metavar="N",
                      help="instead of ratios, run the power method from N initial "
                           "vectors on each of --trials problem groups (single cell); "
                           "emits timing-schema rows")
    _estimator_options(p_br)
    _common_options(p_br)
    p_br.set_defaults(func=cmd_bench_ratio)

    return parser


def _estimator_options(sub):
    sub.add_argument("--power-tol", type=float, default=None)
    sub.add_argument("--power-max-iter", type=int, default=None)
    sub.add_argument("--pce-eps", type=float, default=None)
    sub.add_argument("--pce-theta", type=float, default=None)
    sub.add_argument("--sce-k", type=int, default=None)
    sub.add_argument("--config", default=None,
                     help="JSON file with {power: {tol, max_iter}, pce: {eps, theta}, "
                          "sce: {k}, seed}; CLI flags override it")


def _estimator_configs(args, n: int | None = None):
    """Defaults, overridden by --config file values, overridden by flags.

    The default sample size is clamped to the problem dimension when known;
    an explicit user value is passed through (and may be rejected later).
    """
    power = {"tol": 1e-8, "max_iter": 500}
    pce_c = {"eps": 1e-3, "theta": 1e-2}
    sce_c = {}
    seed = args.seed
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        power.update(doc.get("power", {}))
        pce_c.update(doc.get("pce", {}))
        sce_c.update(doc.get("sce", {}))
        seed = doc.get("seed", seed)
    if args.power_tol is not None:
        power["tol"] = args.power_tol
    if args.power_max_iter is not None:
        power["max_iter"] = args.power_max_iter
    if args.pce_eps is not None:
        pce_c["eps"] = args.pce_eps
    if args.pce_theta is not None:
        pce_c["theta"] = args.pce_theta
    if args.sce_k is not None:
        sce_c["k"] = args.sce_k
    if "k" not in sce_c:
        sce_c["k"] = 3 if n is None else min(3, n)
    return (
        PowerConfig(tol=power["tol"], max_iter=power["max_iter"], seed=seed),
        PceConfig(eps=pce_c["eps"], theta=pce_c["theta"], seed=seed),
        SceConfig(k=sce_c["k"], seed=seed),
    )


def _open_out(args):
    if args.out is None:
        return sys.stdout, False
    return open(args.out, "w", encoding="utf-8"), True


def _emit(args, text: str) -> None:
    fh, close = _open_out(args)
    try:
        fh.write(text)
        if not text.endswith("\n"):
            fh.write("\n")
    finally:
        if close:
            fh.close()


def cmd_gen(args) -> int:
    spec = GeneratorSpec(m=args.m, n=args.n, lam=args.lam, e_p=args.ep, seed=args.seed)
    gp = generate(spec)
    doc = problem_to_dict(gp.problem, provenance=gp.provenance(spec))
    _emit(args, json.dumps(doc, sort_keys=True))
    return EXIT_OK


def cmd_solve(args) -> int:
    p = load_problem(args.input)
    sol = solve_stls(p)
    doc = {
        "x": [float(v) for v in sol.x],
        "residual_norm": float(sum(v * v for v in sol.r) ** 0.5),
        "sigma_np1": sol.sigma_np1,
        "sigma_hat_n": sol.sigma_hat_n,
        "genericity_gap": sol.genericity_gap,
        "ill_posed": sol.ill_posed,
    }
    if args.format == "csv":
        lines = ["field,value"]
        for key, val in doc.items():
            if key == "x":
                lines.extend(f"x[{i}],{v!r}" for i, v in enumerate(val))
            else:
                lines.append(f"{key},{val!r}")
        _emit(args, "\n".join(lines))
    else:
        _emit(args, json.dumps(doc, sort_keys=True))
    return EXIT_OK


def _cond_one(problem, sol, method, power_cfg, pce_cfg, sce_cfg):
    if method == "kron":
        return exact.kappa_kron(sol, problem.A)
    if method == "f1":
        return exact.kappa_f1(sol, problem.A)
    if method == "f2":
        return exact.kappa_f2(sol, problem.A)
    if method == "power":
        return power_method(sol, problem.A, power_cfg)
    if method == "pce":
        return pce(sol, problem.A, pce_cfg)
    if method == "sce":
        return sce(sol, problem.A, sce_cfg)
    raise ValueError(f"unknown method {method!r}")


def cmd_cond(args) -> int:
    p = load_problem(args.input)
    power_cfg, pce_cfg, sce_cfg = _estimator_configs(args, n=p.n)
    sol = solve_stls(p)
    methods = list(COND_METHODS) if args.method == "all" else [args.method]
    reports = []
    zero_solution = False
    for method in methods:
        rep = _cond_one(p, sol, method, power_cfg, pce_cfg, sce_cfg)
        try:
            rep.relative = exact.relative_from_absolute(p, sol, rep.absolute)
        except ZeroSolutionError:
            zero_solution = True
            diag = dict(rep.diagnostics or {})
            diag["relative_error"] = "ZeroSolution"
            rep.diagnostics = diag
        reports.append(rep)
    if args.method == "all":
        by_tag = {rep.method: rep.absolute for rep in reports}
        exa = by_tag["F2"]
        ratios = {
            "ratio1": by_tag["POWER"] / exa,
            "ratio2": by_tag["PCE"] / exa,
            "ratio3": by_tag["SCE"] / exa,
        }
        if args.format == "csv":
            lines = ["method,absolute,relative"]
            for rep in reports:
                rel = "" if rep.relative is None else repr(rep.relative)
                lines.append(f"{rep.method},{rep.absolute!r},{rel}")
            for name in ("ratio1", "ratio2", "ratio3"):
                lines.append(f"{name},{ratios[name]!r},")
            _emit(args, "\n".join(lines))
        else:
            doc = {"reports": [rep.to_dict() for rep in reports], "ratios": ratios}
            _emit(args, json.dumps(doc, sort_keys=True))
    else:
        rep = reports[0]
        if args.format == "csv":
            rel = "" if rep.relative is None else repr(rep.relative)
            _emit(args, "method,absolute,relative\n"
                  f"{rep.method},{rep.absolute!r},{rel}")
        else:
            _emit(args, rep.to_json())
    return EXIT_DEGENERATE if zero_solution else EXIT_OK


def _parse_sizes(text):
    sizes = []
    for chunk in text.split(","):
        chunk = chunk.strip().lower()
        try:
            m_str, n_str = chunk.split("x")
            sizes.append((int(m_str), int(n_str)))
        except ValueError as exc:
            raise ValueError(f"bad size cell {chunk!r}; expected MxN") from exc
    return sizes


def _parse_floats(text):
    return [float(chunk) for chunk in text.split(",")]


def cmd_bench_time(args) -> int:
    sizes = _parse_sizes(args.sizes)
    methods = [mth.strip() for mth in args.methods.split(",")]
    power_cfg, pce_cfg, sce_cfg = _estimator_configs(args)
    records, summaries = run_timing_bench(
        sizes, _parse_floats(args.lambdas), _parse_floats(args.ep),
        trials=args.trials, methods=methods, seed=args.seed,
        threads=args.threads,
        power_cfg=power_cfg, pce_cfg=pce_cfg, sce_cfg=sce_cfg,
    )
    fh, close = _open_out(args)
    try:
        write_bench_csv(records, fh)
    finally:
        if close:
            fh.close()
    for s in summaries:
        print(
            f"# cell m={s['m']} n={s['n']} lambda={s['lambda']} e_p={s['e_p']} "
            f"method={s['method']}: mean={s['mean_wall_time']:.6f}s "
            f"var={s['var_wall_time']:.3e} failures={s['failures']}/{s['trials']}",
            file=sys.stderr,
        )
    return EXIT_OK


def cmd_bench_ratio(args) -> int:
    sizes = _parse_sizes(args.sizes)
    lambdas = _parse_floats(args.lambdas)
    e_ps = _parse_floats(args.ep)
    power_cfg, pce_cfg, sce_cfg = _estimator_configs(args)
    if args.vary_initial > 0:
        if len(sizes) != 1 or len(lambdas) != 1 or len(e_ps) != 1:
            raise ValueError("--vary-initial needs a single cell")
        m, n = sizes[0]
        records = run_power_spread(
            m, n, lambdas[0], e_ps[0], groups=args.trials,
            inits=args.vary_initial, seed=args.seed, threads=args.threads,
            power_cfg=power_cfg,
        )
        fh, close = _open_out(args)
        try:
            write_bench_csv(records, fh)
        finally:
            if close:
                fh.close()
        return EXIT_OK
    groups, summaries = run_ratio_bench(
        sizes, lambdas, e_ps, trials=args.trials, seed=args.seed,
        threads=args.threads,
        power_cfg=power_cfg, pce_cfg=pce_cfg, sce_cfg=sce_cfg,
    )
    fh, close = _open_out(args)
    try:
        write_ratio_csv(groups, fh)
    finally:
        if close:
            fh.close()
    for s in summaries:
        for name in ("ratio1", "ratio2", "ratio3"):
            r = s[name]
            print(
                f"# cell m={s['m']} n={s['n']} lambda={s['lambda']} e_p={s['e_p']} "
                f"{name}: min={r['min']:.4g} max={r['max']:.4g} "
                f"inside(0.1,10)={r['inside_fraction']:.3f} flagged={r['flagged']}",
                file=sys.stderr,
            )
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ProblemFormatError as exc:
        print(f"stlscond: problem file error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"stlscond: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NongenericProblemError, NotPositiveDefiniteError) as exc:
        print(f"stlscond: nongeneric problem: {exc}", file=sys.stderr)
        return EXIT_NONGENERIC
    except (ZeroResidualError, ZeroSolutionError) as exc:
        print(f"stlscond: degenerate problem: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ValueError, SampleTooLargeError, json.JSONDecodeError) as exc:
        print(f"stlscond: invalid arguments: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
