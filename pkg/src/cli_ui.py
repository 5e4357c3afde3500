"""Rich terminal rendering for targets, series, invariants and verification reports."""

import time
from dataclasses import dataclass
from typing import Any, List, Mapping, Optional, Tuple

from rich import box
from rich.align import Align
from rich.console import Console, Group
from rich.panel import Panel
from rich.progress import Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from rich.table import Table
from rich.text import Text

from src import __version__
from src.models import ChamberReport, InvariantResult, VerificationReport

PASS_MARK = "✓"
FAIL_MARK = "✗"


@dataclass
class CLITheme:
    """Styles keyed by what they mark up, not by colour."""

    frame: str = "blue"
    heading: str = "bold white"
    grid: str = "bright_black"

    ok: str = "bold green"
    caution: str = "bold yellow"
    failure: str = "bold red"
    note: str = "bright_black"

    index: str = "bold blue"
    exponent: str = "dim"
    rational: str = "cyan"
    plain: str = "white"

    def verdict(self, passed: bool) -> str:
        return self.ok if passed else self.failure

    def table(self, title: str) -> Table:
        return Table(title=title, box=box.ROUNDED, header_style=self.heading, border_style=self.grid)


class BannerRenderer:
    """Title block printed before text-format output."""

    TITLE = f"QMirror {__version__}"
    SUBTITLE = "quasimap I-functions | Birkhoff factorization | genus-zero invariants"

    def __init__(self, theme: Optional[CLITheme] = None):
        self.theme = theme or CLITheme()

    def render(self, console: Console) -> None:
        title = Text(self.TITLE, style=f"bold {self.theme.frame}")
        subtitle = Text(self.SUBTITLE, style=f"{self.theme.note} italic")
        console.print(
            Panel(Group(Align.center(title), Align.center(subtitle)), border_style=self.theme.frame, expand=False),
            justify="center",
        )


class StageRenderer:
    """Spinner while a stage runs, then one line with its outcome and wall time."""

    def __init__(self, console: Console, theme: Optional[CLITheme] = None):
        self.console = console
        self.theme = theme or CLITheme()
        self._progress: Optional[Progress] = None
        self._started: Optional[float] = None

    def start(self, stage: str) -> None:
        self._halt()
        self._started = time.perf_counter()
        self._progress = Progress(
            SpinnerColumn(),
            TextColumn("{task.description}"),
            TimeElapsedColumn(),
            console=self.console,
            transient=True,
        )
        self._progress.start()
        self._progress.add_task(f"[{self.theme.frame}]{stage}", total=None)

    def _halt(self) -> float:
        if self._progress is not None:
            self._progress.stop()
            self._progress = None
        elapsed = time.perf_counter() - self._started if self._started is not None else 0.0
        self._started = None
        return elapsed

    def finish(self, stage: str) -> None:
        elapsed = self._halt()
        self.console.print(f"[{self.theme.ok}]{PASS_MARK}[/] {stage} [{self.theme.note}]({elapsed:.2f}s)[/]")

    def fail(self, stage: str, kind: str) -> None:
        self._halt()
        self.console.print(f"[{self.theme.failure}]{FAIL_MARK}[/] {stage}: {kind}")


def format_class(coeffs: Mapping[str, str]) -> str:
    """Renders {label: rational} as '3*H + 1/2*H^2'."""
    if not coeffs:
        return "0"
    parts = []
    for label, c in coeffs.items():
        if label == "1":
            parts.append(c)
        elif c == "1":
            parts.append(label)
        elif c == "-1":
            parts.append(f"-{label}")
        else:
            parts.append(f"{c}*{label}")
    return " + ".join(parts).replace("+ -", "- ")


def _index_key(text: str) -> Tuple[int, ...]:
    return tuple(int(x) for x in text.split(",")) if text else ()


class SeriesTableRenderer:
    """Renders a series document as a table of (beta, m, z-power, coefficient) rows."""

    MAX_ROWS = 200

    def __init__(self, theme: Optional[CLITheme] = None):
        self.theme = theme or CLITheme()

    def rows(self, document: Mapping[str, Any]) -> List[Tuple[str, str, str, str]]:
        out = []
        for beta in sorted(document["terms"], key=_index_key):
            by_m = document["terms"][beta]
            for m in sorted(by_m, key=_index_key):
                for z in sorted(by_m[m], key=int, reverse=True):
                    out.append((beta, m or "-", z, format_class(by_m[m][z])))
        return out

    def build(self, document: Mapping[str, Any], title: str) -> Table:
        trunc = document["truncation"]
        variables = ", ".join(document["variables"]) or "none"
        table = self.theme.table(f"{title}  (D={trunc['D']}, T={trunc['T']}, t: {variables})")
        table.add_column("beta", style=self.theme.index)
        table.add_column("m", style=self.theme.exponent)
        table.add_column("z^k", justify="right")
        table.add_column("coefficient", min_width=20, style=self.theme.rational)
        rows = self.rows(document)
        for row in rows[: self.MAX_ROWS]:
            table.add_row(*row)
        notes = []
        if len(rows) > self.MAX_ROWS:
            notes.append(f"{len(rows) - self.MAX_ROWS} more rows; use --format json for the full series")
        if document.get("saturated"):
            notes.append("saturated truncation")
        if notes:
            table.caption = "  ".join(notes)
        return table


class PanelRenderer:
    """Outcome panels: errors with suggestions, successes, warnings and chamber reports."""

    def __init__(self, theme: Optional[CLITheme] = None):
        self.theme = theme or CLITheme()

    def _panel(self, body: Text, title: str, style: str) -> Panel:
        return Panel(body, title=title, border_style=style, box=box.ROUNDED, padding=(1, 2))

    def error_panel(self, kind: str, message: str, suggestions: Optional[List[str]] = None) -> Panel:
        body = Text(message, style=self.theme.failure)
        for n, suggestion in enumerate(suggestions or []):
            if n == 0:
                body.append("\n\nTry:", style=self.theme.caution)
            body.append(f"\n  - {suggestion}", style=self.theme.note)
        return self._panel(body, f"{FAIL_MARK} {kind}", self.theme.failure)

    def success_panel(self, title: str, message: str) -> Panel:
        return self._panel(Text(message, style=self.theme.ok), f"{PASS_MARK} {title}", self.theme.ok)

    def warning_panel(self, title: str, message: str) -> Panel:
        return self._panel(Text(message, style=self.theme.caution), f"! {title}", self.theme.caution)

    def chamber_panel(self, name: str, report: ChamberReport) -> Panel:
        """Validation verdict with anticones and chamber data."""
        body = Text()
        body.append("Target: ", style="bold")
        body.append(f"{name}\n", style=self.theme.frame)
        if not report.is_valid:
            body.append(f"{report.error_kind}: ", style=self.theme.failure)
            body.append(report.error_message or "", style=self.theme.plain)
            if report.offending_subset is not None:
                body.append(f"\nOffending columns: {list(report.offending_subset)}", style=self.theme.note)
            return self._panel(body, "Chamber", self.theme.failure)
        body.append("Condition star holds\n\n", style=self.theme.ok)
        for heading, value in (
            ("Anticones", [list(a) for a in report.anticones]),
            ("Chamber rays", [list(r) for r in report.chamber_rays]),
            ("Chamber dimension", report.chamber_dimension),
        ):
            body.append(f"{heading}: ", style="bold")
            body.append(f"{value}\n", style=self.theme.plain)
        body.rstrip()
        return self._panel(body, "Chamber", self.theme.ok)


class CLIRenderer:
    """Main CLI rendering facade."""

    def __init__(self, console: Optional[Console] = None, theme: Optional[CLITheme] = None):
        self.console = console or Console()
        self.theme = theme or CLITheme()
        self.banner = BannerRenderer(self.theme)
        self.stages = StageRenderer(self.console, self.theme)
        self.series = SeriesTableRenderer(self.theme)
        self.panels = PanelRenderer(self.theme)

    def show_banner(self) -> None:
        self.banner.render(self.console)

    def show_error(self, kind: str, message: str, suggestions: Optional[List[str]] = None) -> None:
        self.console.print(self.panels.error_panel(kind, message, suggestions))

    def show_success(self, title: str, message: str) -> None:
        self.console.print(self.panels.success_panel(title, message))

    def show_warning(self, title: str, message: str) -> None:
        self.console.print(self.panels.warning_panel(title, message))

    def show_chamber(self, name: str, report: ChamberReport) -> None:
        self.console.print(self.panels.chamber_panel(name, report))

    def show_series(self, document: Mapping[str, Any], title: str) -> None:
        self.console.print(self.series.build(document, title))

    def show_mirror(self, document: Mapping[str, Any]) -> None:
        """Mirror map and J-function tables; twisted targets also show the ambient J."""
        tables = [self.series.build(document["tau"], "Mirror map tau"), Text()]
        if "ambient_J" in document:
            tables += [self.series.build(document["ambient_J"], "Ambient J"), Text()]
        tables.append(self.series.build(document["J"], "J-function"))
        self.console.print(
            Panel(
                Group(*tables),
                title=f"[bold {self.theme.frame}]{document['target']}[/]",
                border_style=self.theme.frame,
                box=box.DOUBLE,
                padding=(1, 2),
            )
        )

    def show_invariants(self, results: List[InvariantResult]) -> None:
        table = self.theme.table("Invariants")
        table.add_column("beta", style=self.theme.index)
        table.add_column("insertions")
        table.add_column("psi", justify="right")
        table.add_column("vdim", justify="right")
        table.add_column("value", justify="right", style=self.theme.rational)
        for result in results:
            doc = result.to_dict()
            table.add_row(
                ",".join(str(b) for b in doc["beta"]),
                ",".join(str(i) for i in doc["insertions"]) or "-",
                str(doc["psi_power"]),
                doc["virtual_dimension"],
                doc["value"],
            )
        self.console.print(table)
        for result in results:
            if result.warning:
                self.show_warning("Dimension", result.warning)

    def show_verification(self, report: VerificationReport) -> None:
        table = self.theme.table(f"Verification: {report.suite}")
        table.add_column("check", style=self.theme.index)
        table.add_column("engine", justify="right")
        table.add_column("oracle", justify="right")
        table.add_column("pass", justify="center")
        for check in report.checks:
            row = check.to_dict()
            table.add_row(
                row["check"],
                str(row["engine_value"]),
                str(row["oracle_value"]),
                Text(PASS_MARK if check.passed else FAIL_MARK, style=self.theme.verdict(check.passed)),
            )
        self.console.print(table)
        if report.passed:
            self.show_success("Verified", f"{len(report.checks)} checks matched their oracles")
        else:
            names = ", ".join(c.check for c in report.failures())
            self.show_error("oracle-mismatch", f"Failed checks: {names}")

    def start_processing(self, stage: str) -> None:
        self.stages.start(stage)

    def complete_processing(self, stage: str) -> None:
        self.stages.finish(stage)

    def fail_processing(self, stage: str, kind: str) -> None:
        self.stages.fail(stage, kind)
