"""Configuration, suite execution, reporting and the command line."""
from .config import ConfigError, ExperimentConfig, resolve
from .report import emit_report
from .runner import ReportRecord, read_log, run_suite
from .suites import SUITES, UnknownSuiteError, get_suite
