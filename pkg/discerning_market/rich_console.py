"""Rich helpers: themed output for the solver CLI.

`console` writes requested human output to stdout; `err_console` carries
every log line, banner and hint so machine formats on stdout stay clean.
"""

from __future__ import annotations

import sys
from typing import Iterable, List, Optional, Sequence

import click
import numpy as np
from rich import box
from rich.align import Align
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.progress import (
    BarColumn,
    Progress,
    SpinnerColumn,
    TaskProgressColumn,
    TextColumn,
    TimeElapsedColumn,
)
from rich.rule import Rule
from rich.table import Table
from rich.text import Text
from rich.theme import Theme

COLORS = {
    "primary": "deep_sky_blue3",
    "accent": "cyan",
    "success": "green",
    "warning": "yellow",
    "error": "red",
    "muted": "dim",
}

_THEME = Theme(
    {
        "info": COLORS["primary"],
        "success": COLORS["success"],
        "warning": COLORS["warning"],
        "error": COLORS["error"],
    }
)

console = Console(theme=_THEME)
err_console = Console(theme=_THEME, stderr=True)

NUM = "{:.12g}"


def fmt(value: float) -> str:
    return NUM.format(float(value))


def _style(text: str, color: str) -> str:
    return f"[{color}]{escape(text)}[/{color}]"


def print_cli_header() -> None:
    p, a = COLORS["primary"], COLORS["accent"]
    line = Text()
    line.append("discern", style=f"bold {p}")
    line.append(" · ", style=COLORS["muted"])
    line.append("Markets with diversely discerning consumers", style=f"bold {a}")
    console.print()
    console.print(Align.center(line))


def print_version(version: str) -> None:
    print_cli_header()
    console.print(Align.center(Text(f"v{version.lstrip('v')}", style=f"bold {COLORS['accent']}")))
    console.print(Align.center(Text(f"Python {sys.version.split()[0]}", style=COLORS["muted"])))
    console.print()


def print_root_help(ctx: click.Context) -> None:
    """`discern --help` and bare `discern`."""
    p, a, m = COLORS["primary"], COLORS["accent"], COLORS["muted"]
    print_cli_header()
    console.print(
        Align.center(Text("Solve add-on pricing equilibria and check their comparative statics.", style=m))
    )
    console.print()
    console.print(Rule(style=p))

    table = Table(box=box.SIMPLE, show_header=True, header_style=f"bold {p}", border_style=p, padding=(0, 1))
    table.add_column("Command", style=f"bold {a}", no_wrap=True)
    table.add_column("What it does")
    for name in sorted(ctx.command.commands):
        cmd = ctx.command.commands[name]
        table.add_row(name, escape(cmd.get_short_help_str() or ""))
    console.print(table)
    console.print()
    console.print(
        f"[{m}]Typical flow:[/]  "
        f"[{a}]scenario[/] → [{a}]check[/] → [{a}]solve[/]  "
        f"[{m}]·[/]  [{m}]Details:[/] [{p}]discern <cmd> --help[/]  "
        f"[{m}]·[/]  [{m}]Version:[/] [{p}]--version[/]"
    )
    console.print(Rule(style=p))
    console.print()


def _option_default_suffix(opt: click.Option) -> str:
    if opt.is_flag:
        return ""
    default = opt.default
    if default is None or str(default) == "Sentinel.UNSET" or default == ():
        return ""
    return f" [dim](default: {default})[/]"


def print_command_help(ctx: click.Context) -> None:
    p, a, m = COLORS["primary"], COLORS["accent"], COLORS["muted"]
    cmd = ctx.command
    name = ctx.info_name or cmd.name

    console.print()
    console.print(f"[bold {p}]discern[/] [bold {a}]{escape(name)}[/]")
    if cmd.help:
        console.print(f"  [{m}]{escape(cmd.help)}[/]")
    console.print()

    args = [param for param in cmd.get_params(ctx) if isinstance(param, click.Argument)]
    opts = [param for param in cmd.get_params(ctx) if isinstance(param, click.Option) and param.name != "help"]
    if args or opts:
        table = Table(box=box.SIMPLE, show_header=True, header_style=f"bold {p}", border_style=p)
        table.add_column("Argument / option", style=a, no_wrap=True)
        table.add_column("Description")
        for arg in args:
            table.add_row(arg.human_readable_name, "")
        for opt in opts:
            table.add_row(", ".join(opt.opts), escape(opt.help or "") + _option_default_suffix(opt))
        console.print(table)
        console.print()

    console.print(f"[{m}]Configs are YAML documents; `discern scenario three_state` prints one.[/]")
    console.print()


def print_banner(subtitle: str) -> None:
    p, a = COLORS["primary"], COLORS["accent"]
    err_console.print(f"[bold {p}]discern[/] [dim]·[/] [bold {a}]{escape(subtitle)}[/]")


def log_info(message: str) -> None:
    err_console.print(f"{_style('·', COLORS['primary'])} {escape(message)}")


def log_success(message: str) -> None:
    err_console.print(f"{_style('✓', COLORS['success'])} {escape(message)}")


def log_warning(message: str) -> None:
    err_console.print(f"{_style('!', COLORS['warning'])} {escape(message)}")


def log_error(message: str) -> None:
    err_console.print(f"{_style('✗', COLORS['error'])} {escape(message)}")


def print_hint(steps: List[str]) -> None:
    """Numbered next-steps panel."""
    body = "\n".join(
        f"[{COLORS['primary']}]{i}.[/] [{COLORS['accent']}]{escape(s)}[/]" for i, s in enumerate(steps, 1)
    )
    err_console.print(
        Panel(body, title="[bold]Next steps[/bold]", border_style=COLORS["primary"], box=box.ROUNDED, padding=(0, 1))
    )


def create_spec_panel(rows: Sequence[tuple], title: str = "Market") -> Panel:
    """Key/value panel for market primitives."""
    table = Table(show_header=False, box=None, padding=(0, 1))
    table.add_column("Key", style=f"bold {COLORS['primary']}", width=14)
    table.add_column("Value")
    for key, value in rows:
        table.add_row(key, escape(str(value)))
    return Panel(table, title=f"[bold]{escape(title)}[/bold]", border_style=COLORS["primary"], box=box.ROUNDED)


def _table(title: str) -> Table:
    p = COLORS["primary"]
    return Table(
        title=f"[bold]{escape(title)}[/bold]",
        title_style=p,
        box=box.ROUNDED,
        border_style=p,
        header_style=f"bold {p}",
    )


def create_solution_table(solution, title: str = "Equilibrium") -> Table:
    table = _table(title)
    for name in ("state", "S", "mu", "q_bar", "h", "pi_star"):
        table.add_column(name, justify="left" if name == "state" else "right")
    table.add_column("trading types")
    table.add_column("interior", justify="center")
    for i, label in enumerate(solution.state_labels):
        ok = bool(solution.interior[i])
        table.add_row(
            label,
            fmt(solution.S[i]),
            fmt(solution.mu[i]),
            fmt(solution.q_bar[i]),
            fmt(solution.h[i]),
            fmt(solution.pi_star[i]),
            escape(", ".join(solution.argmin_types[i])),
            f"[{COLORS['success'] if ok else COLORS['error']} bold]{'✓' if ok else '✗'}[/]",
        )
    return table


def create_estimates_table(solution) -> Table:
    """Per-type add-on estimates at each revealed state."""
    table = _table("Type estimates E_t(q | state)")
    table.add_column("type", style=COLORS["accent"])
    for label in solution.state_labels:
        table.add_column(label, justify="right")
    for name, row in zip(solution.type_names, solution.estimates):
        table.add_row(escape(name), *(fmt(x) for x in row))
    return table


def create_welfare_panel(solution) -> Panel:
    welfare = solution.welfare
    rows = [("ex-ante add-on", fmt(solution.exante_addon)), ("expected price", fmt(solution.expected_price))]
    if welfare is not None:
        rows += [
            ("social surplus", fmt(welfare.total_social_surplus)),
            ("ex-ante loss", fmt(welfare.exante_consumer_loss)),
        ]
    rows += [
        ("iterations", str(solution.diagnostics.iterations)),
        ("residual", f"{solution.diagnostics.residual:.3g}"),
    ]
    if solution.diagnostics.policy_gap is not None:
        rows.append(("policy gap", f"{solution.diagnostics.policy_gap:.3g}"))
    return create_spec_panel(rows, title="Welfare & diagnostics")


def create_matrix_table(matrix: np.ndarray, labels: Sequence[str], title: str) -> Table:
    table = _table(title)
    table.add_column("state \\ belief", style=COLORS["accent"])
    for label in labels:
        table.add_column(label, justify="right")
    for label, row in zip(labels, matrix):
        table.add_row(label, *(fmt(x) for x in row))
    return table


def create_check_table(checks: Iterable[dict], title: str = "Checks") -> Table:
    """Rows of {"check", "status" in ok/warning/error/skipped, "details"}."""
    table = _table(title)
    table.add_column("Check", style=COLORS["primary"])
    table.add_column("Status", justify="center")
    table.add_column("Details", style=COLORS["muted"])
    icons = {"ok": "✓", "error": "✗", "warning": "!", "skipped": "–"}
    colors = {"ok": COLORS["success"], "error": COLORS["error"], "warning": COLORS["warning"]}
    for check in checks:
        status = check["status"]
        color = colors.get(status, COLORS["muted"])
        table.add_row(check["check"], f"[{color} bold]{icons.get(status, '?')}[/]", escape(str(check["details"])))
    return table


def create_progress_bar(description: str = "Running...", target: Optional[Console] = None) -> Progress:
    return Progress(
        SpinnerColumn(style=COLORS["primary"]),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(bar_width=32, style=COLORS["muted"], complete_style=COLORS["accent"]),
        TaskProgressColumn(),
        TimeElapsedColumn(),
        console=target or err_console,
        transient=True,
    )


def create_state_table(labels: Sequence[str], columns: dict, title: str) -> Table:
    """One row per state, one numeric column per entry of `columns`."""
    table = _table(title)
    table.add_column("state", style=COLORS["accent"])
    for name in columns:
        table.add_column(name, justify="right")
    for i, label in enumerate(labels):
        table.add_row(label, *(fmt(values[i]) for values in columns.values()))
    return table
