from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class CheckResult:
    check: str
    passed: bool
    residual: str = "0"
    location: str = ""

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def as_record(self) -> dict:
        return {
            "check": self.check,
            "status": self.status,
            "residual": self.residual,
            "location": self.location,
        }


@dataclass
class Report:
    """Ordered list of check outcomes; a report passes when every check does."""

    title: str
    results: list[CheckResult] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def add(self, check: str, passed: bool, residual="0", location: str = "") -> CheckResult:
        r = CheckResult(check, bool(passed), str(residual), location)
        self.results.append(r)
        return r

    def extend(self, other: "Report", prefix: str = "") -> None:
        for r in other.results:
            self.results.append(CheckResult(prefix + r.check, r.passed, r.residual, r.location))
        self.notes.extend(other.notes)

    @property
    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.passed]

    def __bool__(self) -> bool:
        return self.passed

    def text(self) -> str:
        lines = [f"{self.title}: {'PASS' if self.passed else 'FAIL'}"]
        for r in self.results:
            line = f"  [{r.status.upper()}] {r.check}"
            if r.location:
                line += f" @ {r.location}"
            if not r.passed:
                line += f" residual: {r.residual}"
            lines.append(line)
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)
