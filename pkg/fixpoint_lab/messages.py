"""Console output and logging setup for the fixpoint CLI."""

import logging
from typing import Iterable

from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from .checks import CheckReport
from .counterexample import CorrectedReport, NoteReport, render
from .scheme import HypothesisReport, OperatorHypotheses

console = Console()
err_console = Console(stderr=True)


def setup_logging(verbose: bool = False) -> None:
    """Route package logging through rich on stderr."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


def print_test_header(name: str) -> None:
    """Print a section header for a run."""
    console.print(f"\n[bold blue]Running {name}...[/bold blue]")


def print_success(message: str) -> None:
    """Print a success message."""
    console.print(f"[bold green]✓[/bold green] {message}")


def print_warning(message: str) -> None:
    """Print a warning message."""
    console.print(f"[bold yellow]![/bold yellow] {message}")


def print_error(message: str) -> None:
    """Print an error message to stderr."""
    err_console.print(f"[bold red]✗[/bold red] {message}")


def print_info(message: str) -> None:
    """Print an info message."""
    console.print(f"[bold cyan]ℹ[/bold cyan] {message}")


def _flag(value) -> str:
    if value is None:
        return "[dim]n/a[/dim]"
    return "[green]Yes[/green]" if value else "[red]No[/red]"


def format_hypotheses(report: HypothesisReport, operators: OperatorHypotheses) -> None:
    """Panel with the schedule conditions and the operator-side hypotheses."""
    table = Table(box=box.SIMPLE, show_header=False)
    table.add_row("(i) alpha_n -> 0 and beta_n^1 -> 0", _flag(report.cond_i_holds))
    table.add_row("(ii) sum alpha_n = infinity", _flag(report.cond_ii_holds))
    table.add_row("p >= 2", _flag(report.p_valid))
    table.add_row("T_1 has bounded range", _flag(operators.t1_bounded_range))
    table.add_row("T_2 has bounded range", _flag(operators.t2_bounded_range))
    table.add_row("x* is a common fixed point", _flag(operators.xstar_common_fixed))
    all_hold = report.cond_i_holds and report.cond_ii_holds and report.p_valid
    console.print(Panel(
        table,
        title="Hypotheses",
        subtitle=report.notes,
        border_style="green" if all_hold else "yellow",
        box=box.ROUNDED,
        expand=False,
    ))


def format_check_report(report: CheckReport) -> None:
    """Panel with the verdict, horizon and first violation of one check."""
    color, mark, label = ("green", "✓", "Passed") if report.passed else ("red", "✗", "Failed")
    content = [
        f"[bold]Horizon:[/bold] n <= {report.horizon} (tested up to n = {report.n_tested})",
        f"[bold]Samples Tested:[/bold] {report.samples_tested}",
    ]
    if report.seed is not None:
        content.append(f"[bold]Seed:[/bold] {report.seed}")
    if report.first_violation is not None:
        v = report.first_violation
        content.append(f"\n[red]First violation at n = {v.n}[/red]")
        content.append(f"[bold]lhs:[/bold] {v.lhs:.17g}")
        content.append(f"[bold]rhs:[/bold] {v.rhs:.17g}")
        for point in v.witness:
            content.append(f"  • witness {list(point.coords)}")
    for key, value in report.metadata.items():
        content.append(f"[dim]{key.replace('_', ' ').title()}:[/dim] {value}")
    console.print(Panel(
        "\n".join(content),
        title=f"[{color}]{mark} {report.name} - {label}[/{color}]",
        border_style=color,
        box=box.ROUNDED,
        expand=False,
    ))


def format_note_report(report: NoteReport) -> None:
    """Exact gap(n) at the sampled n, one unwrapped line each, then the claim checks."""
    console.print(f"\n[bold]Power gap |T^n y_n - T^n x_(n+1)| (exact, n <= {report.horizon})[/bold]")
    for n, value in report.samples.items():
        console.print(f"  gap({n}) = {render(value)}", soft_wrap=True, highlight=False)
    for name, ok in report.checks.items():
        (print_success if ok else print_error)(name.replace("_", " "))
    print_info(f"Minimum gap {render(report.min_gap)} attained at n = {report.min_gap_at}")
    if report.epsilon_threshold is not None:
        print_info(f"Pair gap 2/n < {render(report.epsilon)} first at n = {report.epsilon_threshold}")
    for note in report.notes:
        console.print(f"[dim]{note}[/dim]")


def format_corrected_report(report: CorrectedReport, picks: Iterable[int]) -> None:
    """Tail maxima of d_n for the contraction at the picked n0."""
    table = Table(title=f"Corrected condition: T x = {render(report.ratio)} x", box=box.ROUNDED)
    table.add_column("n0", justify="right")
    table.add_column("max d_n, n >= n0", overflow="fold")
    for n in picks:
        if n in report.tail_max:
            table.add_row(str(n), render(report.tail_max[n]))
    console.print(table)
    (print_success if report.bound_holds else print_error)("d_n <= M L ||y_n - x_(n+1)|| for every n")
    if report.first_below is not None:
        print_info(f"Tail maximum below {render(report.threshold)} from n0 = {report.first_below}")
    else:
        print_warning(f"Tail maximum stays above {render(report.threshold)} within n <= {report.horizon}")
