"""Mean-field, two-body and sampling experiments for bosonic ions."""

import json

from ._core import (
    HartreeResult,
    LabError,
    critical_lambda,
    emit_plotdata,
    epsilon_sweep,
    kr_distance,
    minimize_hartree,
    n1_exact,
    sample,
    schema_version,
    two_body_energy,
)
from ._core import run as _run

__all__ = [
    "HartreeResult",
    "LabError",
    "critical_lambda",
    "emit_plotdata",
    "epsilon_sweep",
    "kr_distance",
    "minimize_hartree",
    "n1_exact",
    "run",
    "sample",
    "schema_version",
    "two_body_energy",
]


def run(*args):
    """Run a CLI command in-process: returns (exit_code, records, message).

    Records are parsed json-lines dicts; with --format csv the raw table is
    returned instead.
    """
    code, text, message = _run([str(a) for a in args])
    if "--format" in args and "csv" in args:
        return code, text, message
    records = [json.loads(line) for line in text.splitlines() if line.strip()]
    return code, records, message
