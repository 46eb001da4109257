"""Verification reports and their serialisation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

KINDS = (
    "precondition", "postcondition", "loop-invariant-entry",
    "loop-invariant-preservation", "fold", "unfold", "pure-assert", "heap-access",
)


@dataclass
class Obligation:
    line: int
    col: int
    kind: str
    description: str
    passed: bool = True
    detail: str | None = None
    transfers: list = field(default_factory=list)

    @property
    def key(self) -> tuple:
        return (self.line, self.col, self.kind, self.description)

    def merge(self, other: "Obligation") -> None:
        """Combine verdicts of the same obligation reached along several paths."""
        if self.passed and not other.passed:
            self.detail = other.detail
        self.passed = self.passed and other.passed
        for t in other.transfers:
            if t not in self.transfers:
                self.transfers.append(t)

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        d = {"line": self.line, "col": self.col, "kind": self.kind,
             "description": self.description, "verdict": self.verdict}
        if self.detail is not None:
            d["detail"] = self.detail
        if self.transfers:
            d["transfers"] = self.transfers
        return d


@dataclass
class MethodReport:
    cls: str
    method: str
    line: int
    obligations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(o.passed for o in self.obligations)

    @property
    def failures(self) -> list:
        return [o for o in self.obligations if not o.passed]

    def to_dict(self) -> dict:
        return {"class": self.cls, "method": self.method, "line": self.line,
                "verdict": "pass" if self.passed else "fail",
                "obligations": [o.to_dict() for o in self.obligations],
                "warnings": list(self.warnings)}


@dataclass
class Report:
    file: str
    methods: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(m.passed for m in self.methods)

    @property
    def obligation_count(self) -> int:
        return sum(len(m.obligations) for m in self.methods)

    @property
    def failure_count(self) -> int:
        return sum(len(m.failures) for m in self.methods)

    def method(self, name: str) -> MethodReport | None:
        return next((m for m in self.methods if m.method == name), None)

    def summary(self) -> str:
        n, k = len(self.methods), self.obligation_count
        tail = "all passed" if self.passed else f"{self.failure_count} failed"
        return f"{n} method{'s' if n != 1 else ''}, {k} obligation{'s' if k != 1 else ''}, {tail}"

    def to_dict(self, timing: bool = False) -> dict:
        d = {"file": self.file, "verdict": "pass" if self.passed else "fail",
             "summary": self.summary(), "methods": [m.to_dict() for m in self.methods]}
        if timing:
            d["seconds"] = round(self.seconds, 3)
        return d


def to_json(reports: list, timing: bool = False) -> str:
    doc = {"verdict": "pass" if all(r.passed for r in reports) else "fail",
           "files": [r.to_dict(timing) for r in reports]}
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"
