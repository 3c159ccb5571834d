"""Shared utilities for dastgcn tools."""

from .cli_common import (add_common_arguments, configure_logging_from_args,
                         handle_keyboard_interrupt, print_completion_message,
                         progress_enabled, setup_logging)
from .file_operations import (create_output_directory, format_csv_value,
                              read_matrix_csv, render_csv, safe_file_write,
                              write_csv, write_json, write_matrix_csv)

__all__ = [
    "safe_file_write",
    "create_output_directory",
    "format_csv_value",
    "render_csv",
    "write_csv",
    "write_json",
    "write_matrix_csv",
    "read_matrix_csv",
    "add_common_arguments",
    "setup_logging",
    "handle_keyboard_interrupt",
    "configure_logging_from_args",
    "print_completion_message",
    "progress_enabled",
]
