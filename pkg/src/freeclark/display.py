from __future__ import annotations

import numpy as np
from rich.console import Console
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from freeclark import texts
from freeclark.freecore import word_str
from freeclark.herglotz_ac import MomentFunctional
from freeclark.schemas import CheckStatus, Report

"""
Rich rendering of reports, moment tables and summaries.
"""

console = Console()


def create_report_table(report: Report) -> Table:
    """
    One row per check with status, error, tolerance, safe degree and runtime.

    Args:
        report: Verification report

    Returns:
        Table: Rich table of the checks, in report order
    """
    table = Table(title=texts.REPORT_TITLE.format(suite=report.suite), expand=False)
    table.add_column("check", style="cyan")
    table.add_column("status")
    table.add_column("max error", justify="right")
    table.add_column("tolerance", justify="right")
    table.add_column("safe deg", justify="right")
    table.add_column("ms", justify="right", style="dim")
    for c in report.checks:
        table.add_row(
            c.name,
            texts.STATUS_PASS if c.status == CheckStatus.PASS else texts.STATUS_FAIL,
            f"{c.max_error:.3e}",
            f"{c.tolerance:.1e}",
            "-" if c.safe_degree is None else str(c.safe_degree),
            f"{c.runtime_ms:.1f}",
        )
    return table


def create_summary_panel(report: Report) -> Panel:
    failed = sum(c.status == CheckStatus.FAIL for c in report.checks)
    if failed:
        message = texts.MSG_SUITE_FAILED.format(failed=failed, count=len(report.checks))
    else:
        message = texts.MSG_SUITE_PASSED.format(count=len(report.checks))
    return Panel(
        Text.from_markup(message),
        title=f"[bold blue]freeclark {report.version}[/bold blue]",
        border_style="green" if report.passed else "red",
    )


def create_moment_table(phi: MomentFunctional, max_len: int) -> Table:
    # operator norm of each moment; the full matrices go to the JSON output
    table = Table(title=texts.MOMENTS_TITLE)
    table.add_column("word", style="cyan")
    table.add_column("‖φ(L^α)‖", justify="right")
    table.add_row("∅", f"{np.linalg.norm(phi.phi_I, 2):.6g}")
    for w, v in sorted(phi.moments.items(), key=lambda kv: (len(kv[0]), kv[0])):
        if len(w) <= max_len:
            table.add_row(word_str(w), f"{np.linalg.norm(v, 2):.6g}")
    return table


def create_info_panel(lines: list[str], title: str) -> Panel:
    return Panel(
        Text.from_markup("\n".join(lines)),
        title=f"[bold blue]{title}[/bold blue]",
        border_style="cyan",
    )


def print_report(report: Report) -> None:
    console.print(create_report_table(report))
    console.print(create_summary_panel(report))


def print_error(message: str) -> None:
    console.print(texts.ERROR_INPUT.format(message=message))
