"""Report models and the stable text lines printed by the commands."""

from typing import Literal

from pydantic import BaseModel, Field

from tcadist.core.harness import LockstepTrace
from tcadist.core.rldfa import DiamondReport
from tcadist.core.topology import ValidationReport, Violation
from tcadist.models.documents import Document, Universe, format_action


class VersionReport(BaseModel):
    """Version and build information."""

    package: str = Field(..., description="Distribution name")
    version: str = Field(..., description="Package version")
    format_version: int = Field(..., description="File format version")
    git_commit: str = Field(..., description="Git commit hash")
    build_tag: str = Field(..., description="Build tag/version")


class AuditFailure(BaseModel):
    index: int = Field(..., description="Number of actions consumed")
    checks: list[str] = Field(..., description="Failed checks")
    diagnostics: list[str] = Field(default_factory=list, description="Details per failure")


class LockstepReport(Document):
    kind: Literal["report"] = "report"
    words: int = Field(..., description="Words checked")
    steps: int = Field(..., description="Audited prefixes")
    ok: bool = Field(..., description="All checks passed")
    failures: list[AuditFailure] = Field(default_factory=list, description="First failure per word")


def violation_line(v: Violation, universe: Universe) -> str:
    if v.condition == 1:
        return (
            f"COND1 channel={universe.channels[v.channel]} "
            f"members={universe.process_list(v.witness)}"
        )
    if v.condition == 2:
        return (
            f"COND2 channel={universe.channels[v.channel]} "
            f"witness={universe.process_list(v.witness)}"
        )
    return f"COND3 edge={v.edge}"


def validation_lines(report: ValidationReport, universe: Universe) -> list[str]:
    if report.ok:
        return ["OK"]
    return [violation_line(v, universe) for v in report.violations]


def diamond_lines(report: DiamondReport, universe: Universe) -> list[str]:
    if report.ok:
        return [f"OK explored={report.explored}"]
    cex = report.counterexample
    return [
        f"COUNTEREXAMPLE state={cex.config.state} "
        f"first={format_action(cex.first, universe)!r} "
        f"second={format_action(cex.second, universe)!r}",
        f"forward={cex.forward} backward={cex.backward}",
    ]


def lockstep_report(traces: list[LockstepTrace]) -> LockstepReport:
    failures = []
    for trace in traces:
        failure = trace.first_failure()
        if failure is not None:
            failures.append(
                AuditFailure(
                    index=failure.index,
                    checks=failure.failed(),
                    diagnostics=list(failure.diagnostics),
                )
            )
    return LockstepReport(
        words=len(traces),
        steps=sum(len(trace.audits) for trace in traces),
        ok=not failures,
        failures=failures,
    )


def lockstep_lines(report: LockstepReport) -> list[str]:
    if report.ok:
        return [f"OK words={report.words} steps={report.steps}"]
    lines = []
    for failure in report.failures:
        lines.append(f"FAIL index={failure.index} checks={','.join(failure.checks)}")
        lines.extend(f"  {note}" for note in failure.diagnostics)
    return lines
