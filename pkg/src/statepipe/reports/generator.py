"""Report generation utilities."""

import json
from pathlib import Path

from pydantic import BaseModel
from rich.console import Console
from rich.table import Table

from statepipe.metrics import ChangeItReport, EvalReport, PseudoLabelReport


def _score(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.3f}"


class ReportGenerator:
    """Render evaluation reports as canonical JSON or console tables."""

    def generate_json_report(self, report: BaseModel) -> str:
        """
        Canonical JSON: sorted keys, two-space indent, trailing newline.

        Args:
            report: Any evaluation report model

        Returns:
            JSON text, byte-identical for equal reports

        """
        return json.dumps(report.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"

    def write_json_report(self, report: BaseModel, output_path: Path) -> None:
        """Write the canonical JSON of a report."""
        output_path.parent.mkdir(parents=True, exist_ok=True)
        output_path.write_text(self.generate_json_report(report), encoding="utf-8")

    def eval_table(self, report: EvalReport) -> Table:
        """Per-state F1-max and AP with the mean row."""
        table = Table(title=f"State evaluation: {report.object_name}")
        table.add_column("State", style="cyan")
        table.add_column("F1-max", justify="right")
        table.add_column("Threshold", justify="right")
        table.add_column("AP", justify="right")
        table.add_column("Positives", justify="right", style="dim")
        for state in report.states:
            name = state.name if state.defined else f"{state.name} (undefined)"
            table.add_row(
                name,
                _score(state.f1_max),
                _score(state.threshold),
                _score(state.average_precision),
                str(state.num_positive),
            )
        table.add_section()
        table.add_row(
            "mean",
            _score(report.mean_f1_max),
            "",
            _score(report.mean_average_precision),
            "",
            style="bold",
        )
        table.caption = f"{report.num_videos} videos, {report.num_frames} frames"
        if report.excluded_states:
            table.caption += f", {report.excluded_states} states excluded"
        return table

    def pseudo_label_table(self, report: PseudoLabelReport) -> Table:
        """Per-state agreement of pseudo-labels with ground truth."""
        table = Table(title=f"Pseudo-label quality: {report.object_name}")
        table.add_column("State", style="cyan")
        for column in ("Precision", "Recall", "F1", "Accuracy", "Assigned"):
            table.add_column(column, justify="right")
        for state in report.states:
            table.add_row(
                state.name,
                _score(state.precision),
                _score(state.recall),
                _score(state.f1),
                _score(state.accuracy),
                _score(state.assignment_rate),
            )
        table.caption = f"assignment rate {report.assignment_rate:.3f} over {report.num_videos} videos"
        return table

    def changeit_table(self, report: ChangeItReport) -> Table:
        """Per-category state and action precision@1."""
        table = Table(title="ChangeIt precision@1")
        table.add_column("Category", style="cyan")
        table.add_column("State", justify="right")
        table.add_column("Action", justify="right")
        table.add_column("Videos", justify="right", style="dim")
        for category in report.categories:
            table.add_row(
                category.category,
                _score(category.state_precision),
                _score(category.action_precision),
                str(category.num_videos),
            )
        table.add_section()
        table.add_row(
            "mean",
            _score(report.mean_state_precision),
            _score(report.mean_action_precision),
            "",
            style="bold",
        )
        return table

    def print_report(self, report: BaseModel, console: Console) -> None:
        """Print the table matching the report type."""
        if isinstance(report, EvalReport):
            console.print(self.eval_table(report))
        elif isinstance(report, PseudoLabelReport):
            console.print(self.pseudo_label_table(report))
        elif isinstance(report, ChangeItReport):
            console.print(self.changeit_table(report))
        else:
            console.print_json(self.generate_json_report(report))
