"""Report rendering."""

from statepipe.reports.generator import ReportGenerator

__all__ = ["ReportGenerator"]
