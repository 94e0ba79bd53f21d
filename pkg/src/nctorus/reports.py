"""Summary reports shared by the verification harnesses and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field

from .energy import Slack


@dataclass
class SummaryReport:
    kind: str
    config: dict
    slacks: list[Slack] = field(default_factory=list)
    rows: list[dict] = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def failures(self) -> list[Slack]:
        return [sl for sl in self.slacks if not sl.ok]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def min_slack(self) -> float:
        return min((sl.slack for sl in self.slacks), default=float("inf"))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "passed": self.passed,
            "notes": self.notes,
            "config": self.config,
            "stats": self.stats,
            "failures": [sl.name for sl in self.failures],
            "slacks": [sl.as_dict() for sl in self.slacks],
            "rows": self.rows,
        }
