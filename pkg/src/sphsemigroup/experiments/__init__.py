"""Reproducible experiments with JSON/CSV reports and pass/fail verdicts."""

from .config import DEFAULTS, load_config
from .report import ExperimentReport, Verdict, write_reports
from .studies import EXPERIMENTS

__all__ = ["DEFAULTS", "EXPERIMENTS", "ExperimentReport", "Verdict", "load_config", "write_reports"]
