"""Experiment configs, presets reproducing the published tables, and the runner."""

from .config import OUTPUT_KINDS, ConfigError, ExperimentConfig, load_config
from .presets import PRESETS, Preset, PresetResult, cached_preset, get_preset, preset_names, run_preset
from .reference import REFERENCE_IDS, ReferenceTable, reference_table
from .runner import (
    CellResult,
    Check,
    Comparison,
    RunResult,
    TableReport,
    TableRow,
    closed_form_for,
    compare_with_paper,
    run,
)

__all__ = [
    "OUTPUT_KINDS",
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "PRESETS",
    "Preset",
    "PresetResult",
    "cached_preset",
    "get_preset",
    "preset_names",
    "run_preset",
    "REFERENCE_IDS",
    "ReferenceTable",
    "reference_table",
    "CellResult",
    "Check",
    "Comparison",
    "RunResult",
    "TableReport",
    "TableRow",
    "closed_form_for",
    "compare_with_paper",
    "run",
]
