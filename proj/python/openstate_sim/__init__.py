# SPDX-License-Identifier: Apache-2.0
"""Python access to the stateful pipeline simulator."""

from ._core import (
    ConfigError,
    Error,
    Run,
    Scenario,
    UnknownFlow,
    consistency_sweep,
    f_label,
    failure_sweep,
    format_tag,
    p_label,
    parse_rates,
    run,
)

__all__ = [
    "ConfigError",
    "Error",
    "Run",
    "Scenario",
    "UnknownFlow",
    "consistency_sweep",
    "f_label",
    "failure_sweep",
    "format_tag",
    "p_label",
    "parse_rates",
    "run",
]
