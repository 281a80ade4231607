"""Command-line interface."""

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np
import pandas as pd

from . import __version__
from .analysis import (
    add_type_experiment,
    beneficial_ree_compare,
    beneficial_welfare_compare,
    expected_addon_audit,
    has_rational,
    is_rational,
    lower_bound_scenario,
    price_range_check,
    signal_premise_check,
    sweep_add_type,
)
from .beliefs import DagError, UnsupportedDag, is_perfect, type_to_beta
from .config import ConfigError, load_config, parse_type, serialize_config
from .core import NoInteriorEquilibrium, SpecError, Variant, check_conditions, ree_solution
from .report import render, serialize_solution
from .rich_console import (
    create_check_table,
    create_matrix_table,
    create_progress_bar,
    create_spec_panel,
    create_state_table,
    fmt,
    log_error,
    log_info,
    log_success,
    log_warning,
    print_banner,
    print_command_help,
    print_hint,
    print_root_help,
    print_version,
)
from .scenarios import SCENARIOS
from .solver import ConvergenceFailure, SolverOptions, brute_force_oracle, build_betas, solve

EXIT_CONFIG = 1
EXIT_NO_INTERIOR = 2
EXIT_CONVERGENCE = 3
EXIT_CHECK_FAILED = 4
ORACLE_TOL = 1e-9


class BlueCommand(click.Command):
    """Rich help for subcommands."""

    def format_help(self, ctx, formatter):
        print_command_help(ctx)


class BlueGroup(click.Group):
    """Rich help for the root command group."""

    command_class = BlueCommand

    def format_help(self, ctx, formatter):
        print_root_help(ctx)


def _version_callback(ctx, param, value):
    if not value or ctx.resilient_parsing:
        return
    print_version(__version__)
    ctx.exit()


def guarded(func):
    """Map domain errors to log lines and fixed exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except click.exceptions.Exit:
            raise
        except click.ClickException:
            raise
        except NoInteriorEquilibrium as e:
            log_error(str(e))
            print_hint(["discern check <config>  (primitive conditions)", "discern ree <config>"])
            raise SystemExit(EXIT_NO_INTERIOR) from e
        except ConvergenceFailure as e:
            log_error(str(e))
            print_hint(["raise --max-iter or loosen --tol"])
            raise SystemExit(EXIT_CONVERGENCE) from e
        except (ConfigError, SpecError, DagError, UnsupportedDag, FileNotFoundError, ValueError) as e:
            log_error(str(e))
            raise SystemExit(EXIT_CONFIG) from e

    return wrapper


def _load(path, tol=None, max_iter=None):
    config = load_config(path)
    options = config.options
    if tol is not None or max_iter is not None:
        options = SolverOptions(
            tol=options.tol if tol is None else tol,
            max_iter=options.max_iter if max_iter is None else max_iter,
        )
    return config, options


def solver_options(func):
    func = click.option("--max-iter", type=int, default=None, help="Iteration cap (overrides config).")(func)
    func = click.option("--tol", type=float, default=None, help="Sup-norm tolerance (overrides config).")(func)
    return func


def format_option(choices=("table", "csv", "json")):
    return click.option(
        "--format",
        "fmt_name",
        type=click.Choice(list(choices), case_sensitive=False),
        default="table",
        show_default=True,
        help="Output format.",
    )


def _checks_exit(checks) -> None:
    failed = [c for c in checks if c["status"] == "error"]
    if failed:
        log_error(f"{len(failed)} check(s) violated")
        raise SystemExit(EXIT_CHECK_FAILED)
    log_success("All checks hold")


@click.group(
    cls=BlueGroup,
    invoke_without_command=True,
    context_settings={"help_option_names": ["-h", "--help"]},
)
@click.option(
    "--version",
    is_flag=True,
    is_eager=True,
    expose_value=False,
    callback=_version_callback,
    help="Show version and exit.",
)
@click.pass_context
def cli(ctx):
    """Solve markets with diversely discerning consumers."""
    if ctx.invoked_subcommand is not None:
        return
    print_root_help(ctx)
    ctx.exit(0)


@cli.command("solve", cls=BlueCommand)
@click.argument("config", type=click.Path())
@solver_options
@format_option()
@guarded
def solve_cmd(config, tol, max_iter, fmt_name):
    """Solve the equilibrium of a scenario config."""
    cfg, options = _load(config, tol, max_iter)
    if fmt_name == "table":
        print_banner(f"solve · {cfg.name or Path(config).stem}")
    solution = solve(cfg.spec, options)
    click.echo(serialize_solution(solution, fmt_name), nl=False)


@cli.command(cls=BlueCommand)
@click.argument("config", type=click.Path())
@format_option()
@guarded
def ree(config, fmt_name):
    """Rational-expectations benchmark in closed form."""
    cfg, _ = _load(config)
    if fmt_name == "table":
        print_banner("ree")
    click.echo(serialize_solution(ree_solution(cfg.spec), fmt_name), nl=False)


@cli.command("compare-types", cls=BlueCommand)
@click.argument("config", type=click.Path())
@click.option("--add", "type_file", type=click.Path(exists=True), required=True, help="YAML file with the type to add.")
@solver_options
@format_option(("table", "json"))
@guarded
def compare_types(config, type_file, tol, max_iter, fmt_name):
    """Solve with and without an extra cognitive type and compare."""
    cfg, options = _load(config, tol, max_iter)
    spec = cfg.spec
    added = parse_type(Path(type_file).read_text(encoding="utf-8"), spec.space)
    if len(added) != 1:
        log_error(f"{type_file} must define exactly one type (found {len(added)})")
        raise SystemExit(EXIT_CONFIG)
    new_type = added[0]
    report = add_type_experiment(spec, new_type, options)
    checks = [{"check": c.name, "status": c.status, "details": c.details} for c in report.checks]
    if spec.variant is Variant.BENEFICIAL and has_rational(spec):
        welfare = beneficial_welfare_compare(spec, new_type, options)
        checks += [{"check": c.name, "status": c.status, "details": c.details} for c in welfare.checks]

    if fmt_name == "json":
        payload = {
            "added": new_type.name,
            "states": list(report.before.state_labels),
            "q_bar_before": [float(x) for x in report.before.q_bar],
            "q_bar_after": [float(x) for x in report.after.q_bar],
            "h_before": [float(x) for x in report.before.h],
            "h_after": [float(x) for x in report.after.h],
            "exante_loss_change": report.d_exante_loss,
            "checks": checks,
        }
        click.echo(json.dumps(payload, indent=2))
    else:
        print_banner(f"compare-types · +{new_type.name}")
        columns = {
            "q_bar before": report.before.q_bar,
            "q_bar after": report.after.q_bar,
            "h before": report.before.h,
            "h after": report.after.h,
        }
        table = create_state_table(report.before.state_labels, columns, "Before / after")
        click.echo(render(table, create_check_table(checks, "Comparative statics")), nl=False)
        if spec.variant is Variant.BENEFICIAL:
            log_info("Beneficial markets: add-on and price changes are reported, not asserted")
    _checks_exit(checks)


@cli.command(cls=BlueCommand)
@click.argument("config", type=click.Path())
@click.option("--type", "type_name", required=True, help="Name of the cognitive type.")
@format_option()
@guarded
def beta(config, type_name, fmt_name):
    """Print a type's belief transition matrix."""
    cfg, _ = _load(config)
    spec = cfg.spec
    matches = [t for t in spec.types if t.name == type_name]
    if not matches:
        log_error(f"no type named {type_name!r} (have: {', '.join(spec.type_names)})")
        raise SystemExit(EXIT_CONFIG)
    matrix = type_to_beta(matches[0], spec.space, spec.mu).beta
    labels = spec.space.labels()
    if fmt_name == "json":
        click.echo(json.dumps({"type": type_name, "states": labels, "beta": matrix.round(12).tolist()}, indent=2))
    elif fmt_name == "csv":
        frame = pd.DataFrame(matrix, index=pd.Index(labels, name="state"), columns=labels)
        click.echo(frame.to_csv(float_format="%.12g", lineterminator="\n"), nl=False)
    else:
        click.echo(render(create_matrix_table(matrix, labels, f"beta · {type_name}")), nl=False)


@cli.command(cls=BlueCommand)
@click.argument("config", type=click.Path())
@guarded
def check(config):
    """Primitive-condition report plus DAG perfection per type."""
    cfg, _ = _load(config)
    spec = cfg.spec
    report = check_conditions(spec)
    rows = [
        ("variant", spec.variant.value),
        ("states", spec.space.size),
        ("Δ", fmt(spec.delta)),
        ("S range", f"[{fmt(spec.s_min)}, {fmt(spec.s_max)}]"),
        ("S̄", fmt(spec.s_bar)),
        ("guarantee", report.guarantee or "none"),
    ]
    panel = create_spec_panel(rows, title=cfg.name or "Market")
    checks = [
        {"check": name, "status": "ok" if held else "warning", "details": report.details[name]}
        for name, held in (
            ("exploitative_interior", report.exploitative_interior),
            ("beneficial_interior", report.beneficial_interior),
            ("ree_condition", report.ree_condition),
        )
    ]
    for t in spec.types:
        if t.dag is None:
            status, details = "ok", t.describe(spec.space)
        elif not is_perfect(t.dag):
            status, details = "warning", "not perfect: no transition matrix"
        elif t.dag.signal is not None:
            status, details = "warning", f"signal node {t.dag.signal}: no transition matrix"
        else:
            status, details = "ok", "perfect DAG"
        if status == "ok" and is_rational(t, spec):
            details += " (rational)"
        checks.append({"check": f"type {t.name}", "status": status, "details": details})
    click.echo(render(panel, create_check_table(checks, "Conditions & types")), nl=False)


@cli.command(cls=BlueCommand)
@click.argument("config", type=click.Path())
@solver_options
@guarded
def oracle(config, tol, max_iter):
    """Compare the solver against exhaustive policy enumeration."""
    cfg, options = _load(config, tol, max_iter)
    spec = cfg.spec
    solution = solve(spec, options, require_interior=False)
    reference = brute_force_oracle(spec, build_betas(spec))
    gap = float(np.max(np.abs(reference - solution.q_bar)))
    columns = {"solver": solution.q_bar, "oracle": reference, "abs diff": np.abs(reference - solution.q_bar)}
    table = create_state_table(solution.state_labels, columns, "Solver vs enumeration")
    click.echo(render(table), nl=False)
    if gap > ORACLE_TOL:
        log_error(f"solver and oracle differ by {gap:.3g}")
        raise SystemExit(EXIT_CHECK_FAILED)
    log_success(f"solver matches oracle (max diff {gap:.3g})")


@cli.command(cls=BlueCommand)
@click.argument("name", required=False)
@click.option("--list", "list_all", is_flag=True, help="List built-in scenario names.")
@click.option("--n", "n_vars", type=int, default=50, show_default=True, help="lower-bound: number of variables.")
@click.option("--delta", type=float, default=1.0, show_default=True, help="lower-bound: Δ = v* − c.")
@click.option("--s-bar", type=float, default=3.0, show_default=True, help="lower-bound: target E[S].")
@guarded
def scenario(name, list_all, n_vars, delta, s_bar):
    """Print a built-in scenario config (or `lower-bound`) to stdout."""
    names = sorted(SCENARIOS) + ["lower-bound"]
    if list_all or name is None:
        click.echo("\n".join(names))
        return
    if name == "lower-bound":
        spec = lower_bound_scenario(n_vars, delta, s_bar)
        click.echo(serialize_config(spec, SolverOptions(), name=f"lower_bound_n{n_vars}"), nl=False)
        return
    if name not in SCENARIOS:
        log_error(f"unknown scenario {name!r} (choose from {', '.join(names)})")
        raise SystemExit(EXIT_CONFIG)
    click.echo(SCENARIOS[name], nl=False)


@cli.command(cls=BlueCommand)
@click.argument("config", type=click.Path())
@solver_options
@guarded
def audit(config, tol, max_iter):
    """Run every applicable property check on a scenario."""
    cfg, options = _load(config, tol, max_iter)
    spec = cfg.spec
    print_banner(f"audit · {cfg.name or Path(config).stem}")
    signal_types = [t for t in spec.types if t.dag is not None and t.dag.signal is not None]
    priced = [t for t in spec.types if t not in signal_types]
    reports = []
    if signal_types:
        reports.append(signal_premise_check(signal_types, spec.space, spec.mu))
        log_info(f"signal types ({', '.join(t.name for t in signal_types)}) are left out of the equilibrium")
    checks = []
    if priced:
        spec = spec.with_types(priced)
        solution = solve(spec, options)
        if spec.variant is Variant.EXPLOITATIVE:
            reports.append(expected_addon_audit(spec, solution))
            prices = price_range_check(spec, solution)
            reports.append(prices)
            if prices.notice:
                log_info(prices.notice)
            if prices.rigid:
                log_info("prices are absolutely rigid" + (" at the expected REE price" if prices.rigid_matches_ree else ""))
        else:
            ree_report = beneficial_ree_compare(spec, solution)
            reports.append(ree_report)
            if ree_report.notice:
                log_info(ree_report.notice)
        checks.append(
            {
                "check": "prices reveal the state",
                "status": "warning" if solution.collisions else "ok",
                "details": ", ".join(f"{a}={b}" for a, b in solution.collisions) or "all prices distinct",
            }
        )
    checks = [{"check": c.name, "status": c.status, "details": c.details} for r in reports for c in r.checks] + checks
    click.echo(render(create_check_table(checks, "Audit")), nl=False)
    _checks_exit(checks)


@cli.command(cls=BlueCommand)
@click.option("--variant", type=click.Choice([v.value for v in Variant]), default="exploitative", show_default=True)
@click.option("--trials", type=int, default=200, show_default=True, help="Number of random experiments.")
@click.option("--seed", type=int, default=0, show_default=True, help="Base random seed.")
@guarded
def sweep(variant, trials, seed):
    """Randomized add-type experiments under the interiority conditions."""
    print_banner(f"sweep · {variant}")
    with create_progress_bar(f"{trials} trials") as progress:
        task = progress.add_task(f"{variant} add-type", total=trials)
        report = sweep_add_type(seed, trials, Variant(variant), on_trial=lambda _: progress.advance(task))
    for failure in report.failures[:20]:
        log_warning(failure)
    if not report.ok:
        log_error(f"{len(report.failures)} violation(s) in {trials} trials")
        raise SystemExit(EXIT_CHECK_FAILED)
    log_success(f"{trials} trials, no violations")


def main():
    try:
        cli(standalone_mode=True)
    except SystemExit:
        raise
    except Exception as e:
        log_error(f"Fatal: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
