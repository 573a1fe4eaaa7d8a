"""
Reports

Per-check records with residuals, a machine-readable JSON rendering with
sorted keys, and a plain-text rendering from a Jinja2 template.
"""

from __future__ import annotations

import json
import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

from jinja2 import Environment, StrictUndefined

from .exceptions import RealizationError
from .numerics import jsonable

logger = logging.getLogger(__name__)

PASS = "pass"
FAIL = "fail"
SKIP = "skip"

CheckOutcome = tuple[bool, float | None, dict[str, Any]]

_TEXT_TEMPLATE = """\
{{ command }}: {{ status | upper }} ({{ counts.pass }} passed, {{ counts.fail }} failed, {{ counts.skip }} skipped)
{% for check in checks %}
  [{{ check.status | upper }}] {{ check.name }}
{%- if check.residual is not none %}  residual={{ '%.3e' | format(check.residual) }}{% endif %}
{%- for key, value in check.details | dictsort %}
      {{ key }}: {{ value }}
{%- endfor %}
{%- endfor %}
"""

_environment = Environment(undefined=StrictUndefined, keep_trailing_newline=True, autoescape=False)


@dataclass
class CheckRecord:
    """Outcome of one named check."""

    name: str
    status: str
    residual: float | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "status": self.status,
            "residual": self.residual,
            "details": jsonable(self.details),
        }


@dataclass
class Report:
    """
    Collection of checks for one command.

    The overall status is fail iff any check failed.
    """

    command: str
    checks: list[CheckRecord] = field(default_factory=list)
    settings: dict[str, Any] = field(default_factory=dict)
    results: dict[str, Any] = field(default_factory=dict)

    def add(
        self, name: str, passed: bool, residual: float | None = None, **details: Any
    ) -> CheckRecord:
        """Record a check that ran to completion."""
        record = CheckRecord(name, PASS if passed else FAIL, _finite_or_none(residual), details)
        self.checks.append(record)
        if not passed:
            logger.info(f"check {name} failed (residual={residual})")
        return record

    def skip(self, name: str, reason: str) -> CheckRecord:
        """Record a check that was not applicable."""
        record = CheckRecord(name, SKIP, None, {"reason": reason})
        self.checks.append(record)
        return record

    def record(self, name: str, check: Callable[[], CheckOutcome]) -> CheckRecord:
        """
        Run a check, turning library errors into a failed record.

        Args:
            name: Check name
            check: Callable returning (passed, residual, details)

        Returns:
            The new CheckRecord
        """
        try:
            passed, residual, details = check()
        except RealizationError as e:
            logger.info(f"check {name} raised {type(e).__name__}: {e}")
            return self.add(
                name,
                False,
                e.residual,
                error=type(e).__name__,
                message=str(e),
            )
        return self.add(name, passed, residual, **details)

    def merge(self, other: Report, prefix: str = "") -> None:
        """Append the checks of another report, optionally prefixing their names."""
        for check in other.checks:
            self.checks.append(CheckRecord(prefix + check.name, check.status, check.residual, check.details))
        for key, value in other.results.items():
            self.results[prefix + key] = value

    @property
    def status(self) -> str:
        return FAIL if any(c.status == FAIL for c in self.checks) else PASS

    @property
    def passed(self) -> bool:
        return self.status == PASS

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1

    def get(self, name: str) -> CheckRecord:
        """Return the check with the given name."""
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary, checks ordered by name."""
        return {
            "command": self.command,
            "status": self.status,
            "settings": jsonable(self.settings),
            "results": jsonable(self.results),
            "checks": [c.to_dict() for c in sorted(self.checks, key=lambda c: c.name)],
        }

    def to_json(self, indent: int = 2) -> str:
        """Convert to JSON string with sorted keys."""
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)

    def render_text(self) -> str:
        """Render the human-readable summary."""
        checks = sorted(self.checks, key=lambda c: c.name)
        counts = {s: sum(1 for c in checks if c.status == s) for s in (PASS, FAIL, SKIP)}
        template = _environment.from_string(_TEXT_TEMPLATE)
        return template.render(command=self.command, status=self.status, counts=counts, checks=checks)


def _finite_or_none(value: float | None) -> float | None:
    if value is None:
        return None
    value = float(value)
    if value != value or value in (float("inf"), float("-inf")):
        return None
    return value
