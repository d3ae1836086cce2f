"""Command-line interface.

Subcommands:

* ``run <config>``          simulate, write moments.csv / final.dist / report.txt
                            and figures next to them
* ``order-study <config>``  empirical convergence order, writes order.csv
* ``verify``                run the oracle suite, nonzero exit on failure
* ``dump-kernel <config>``  tabulate and dump the configured kernel

Thread count is taken from the LPKIN_THREADS environment variable when
set.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from .config import RunConfig, parse_config_file
from .diagnostics import drift_report, entropy_report, order_study
from .errors import ConfigError, UsageError
from .grid import l1_distance, save_distribution
from .kernels import KernelSpec, build_kernel_table, default_rho_levels, default_rule, dump_kernel_table
from .oracle import toy_consecutive, toy_loss_flow
from .presets import build_initial
from .steppers import run_consecutive
from .verify import run_all


def _apply_thread_env() -> None:
    raw = os.environ.get("LPKIN_THREADS")
    if raw:
        import numba

        numba.set_num_threads(max(1, int(raw)))


def _load_config(args) -> RunConfig:
    cfg = parse_config_file(args.config)
    if getattr(args, "strict_paper_kernel", False):
        cfg.strict_paper_kernel = True
    if getattr(args, "no_figures", False):
        cfg.figures = False
    if getattr(args, "output_dir", None):
        cfg.output_dir = args.output_dir
    return cfg


def _write_moments_csv(path: str, rec, dim: int) -> None:
    cols = ["step", "time", "mass", "px", "py"] + (["pz"] if dim == 3 else []) + [
        "energy", "entropy"]
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for k, (t, m) in enumerate(zip(rec.times, rec.moments)):
            row = [str(k), f"{t:.17g}", f"{m.mass:.17g}"]
            row += [f"{p:.17g}" for p in m.momentum]
            row.append(f"{m.energy:.17g}")
            row.append("NA" if m.entropy is None else f"{m.entropy:.17g}")
            fh.write(",".join(row) + "\n")


def cmd_run(args) -> int:
    cfg = _load_config(args)
    if cfg.scheme == "toy_loss":
        raise UsageError("the toy_loss scheme is only available through order-study")
    grid = cfg.grid()
    f0 = build_initial(cfg.initial, grid, cfg.ic_mass)
    stepper = cfg.stepper()
    t0 = time.time()
    rec = run_consecutive(f0, stepper, cfg.steps)
    elapsed = time.time() - t0

    os.makedirs(cfg.output_dir, exist_ok=True)
    _write_moments_csv(os.path.join(cfg.output_dir, "moments.csv"), rec, grid.dim)
    save_distribution(rec.final, os.path.join(cfg.output_dir, "final.dist"))

    drifts = drift_report(rec)
    monotone, violation = entropy_report(rec)
    with open(os.path.join(cfg.output_dir, "report.txt"), "w") as fh:
        fh.write(f"scheme = {cfg.scheme}, model = {cfg.model}, gamma = {cfg.gamma}, "
                 f"epsilon = {cfg.epsilon}\n")
        fh.write(f"grid: dim = {cfg.dim}, n = {cfg.n}, L = {cfg.L}, h = {grid.h}\n")
        fh.write(f"steps taken = {rec.steps_taken} of {cfg.steps}, dt = {cfg.dt}, "
                 f"wall time = {elapsed:.2f} s\n\n")
        fh.write("max relative drift per conserved quantity:\n")
        for k, v in drifts.items():
            fh.write(f"  {k:12s} {v:.6e}\n")
        fh.write(f"\nentropy monotone non-increasing: {monotone}")
        if violation != -np.inf:
            fh.write(f" (max increase {violation:.6e})")
        fh.write("\n")
        if rec.blowup_step is None:
            fh.write("stability: no blow-up detected\n")
        else:
            fh.write(
                f"stability: BLOW-UP at step {rec.blowup_step} "
                f"(t = {rec.times[rec.blowup_step]})\n"
            )
    if cfg.figures:
        from .plots import render_run_figures

        render_run_figures(rec, rec.final, cfg.output_dir)
    print(f"run finished: {rec.steps_taken} steps in {elapsed:.2f}s -> {cfg.output_dir}")
    if rec.blowup_step is not None:
        print(f"blow-up recorded at step {rec.blowup_step}")
    return 0


def cmd_order_study(args) -> int:
    cfg = _load_config(args)
    dts = tuple(float(x) for x in args.dts.split(",")) if args.dts else cfg.dts
    if not dts:
        raise UsageError("no dt list given (use --dts or the dts config key)")
    T = args.T if args.T is not None else cfg.T
    reference = args.reference or cfg.reference

    grid = cfg.grid()
    f0 = build_initial(cfg.initial, grid, cfg.ic_mass)

    if cfg.scheme == "toy_loss":
        exact, _ = toy_loss_flow(f0, T)

        def run_at(dt):
            return toy_consecutive(f0, T, int(round(T / dt)))

        report = order_study(run_at, dts, T, reference="exact", exact=exact)
    else:
        stepper = cfg.stepper()

        def run_at(dt):
            return run_consecutive(f0, stepper.with_dt(dt), int(round(T / dt))).final

        report = order_study(run_at, dts, T, reference=reference)

    os.makedirs(cfg.output_dir, exist_ok=True)
    with open(os.path.join(cfg.output_dir, "order.csv"), "w") as fh:
        fh.write("dt,error,observed_order\n")
        for i, (dt, err) in enumerate(zip(report.dt_values, report.errors)):
            order = "NA" if i == 0 else f"{report.observed_orders[i - 1]:.17g}"
            fh.write(f"{dt:.17g},{err:.17g},{order}\n")
    if cfg.figures:
        from .plots import render_order_figure

        render_order_figure(report, cfg.output_dir)
    print(f"observed orders: {', '.join(f'{o:.3f}' for o in report.observed_orders)} "
          f"(mean {report.mean_order:.3f}, reference {report.reference})")
    return 0


def cmd_verify(args) -> int:
    results = run_all(strict_paper_kernel=args.strict_paper_kernel)
    width = max(len(r.name) for r in results)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{r.name:<{width}}  {status}  {r.detail}")
        failed += 0 if r.passed else 1
    if failed:
        print(f"\n{failed} check(s) failed")
        return 1
    print("\nall checks passed")
    return 0


def cmd_dump_kernel(args) -> int:
    cfg = _load_config(args)
    if cfg.model == "landau":
        kind = "landau_circle" if cfg.dim == 2 else "landau_sphere"
        cutoff = cfg.k_max if cfg.dim == 2 else cfg.l_max
    else:
        kind = "vhs_relax"
        cutoff = cfg.l_max
    spec = KernelSpec(
        kind=kind, dim=cfg.dim, gamma=cfg.gamma, eps=cfg.epsilon, dt=cfg.dt,
        series_cutoff=cutoff, multiplicity=not cfg.strict_paper_kernel,
    )
    rule = default_rule(cfg.dim)
    table = build_kernel_table(spec, default_rho_levels(cfg.grid()), rule=rule)
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = args.output or os.path.join(cfg.output_dir, "kernel.txt")
    dump_kernel_table(table, path)
    print(f"kernel table ({kind}, {table.rho_levels.size} rho levels) -> {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lpkin", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="run a simulation from a config file")
    pr.add_argument("config")
    pr.add_argument("--strict-paper-kernel", action="store_true")
    pr.add_argument("--no-figures", action="store_true")
    pr.add_argument("--output-dir")
    pr.set_defaults(func=cmd_run)

    po = sub.add_parser("order-study", help="empirical convergence order")
    po.add_argument("config")
    po.add_argument("--dts", help="comma-separated halving step sizes")
    po.add_argument("--T", type=float, default=None, help="final time")
    po.add_argument("--reference", choices=("finest", "richardson"), default=None)
    po.add_argument("--strict-paper-kernel", action="store_true")
    po.add_argument("--no-figures", action="store_true")
    po.add_argument("--output-dir")
    po.set_defaults(func=cmd_order_study)

    pv = sub.add_parser("verify", help="run the oracle suite")
    pv.add_argument("--strict-paper-kernel", action="store_true")
    pv.set_defaults(func=cmd_verify)

    pd = sub.add_parser("dump-kernel", help="tabulate and dump the configured kernel")
    pd.add_argument("config")
    pd.add_argument("-o", "--output")
    pd.add_argument("--strict-paper-kernel", action="store_true")
    pd.add_argument("--output-dir")
    pd.set_defaults(func=cmd_dump_kernel)
    return p


def main(argv=None) -> int:
    _apply_thread_env()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
