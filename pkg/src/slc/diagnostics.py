"""Spans and diagnostics shared by every compiler stage.

Diagnostic codes form a stable catalog; the CLI contract promises that no
other codes are ever emitted and that output ordering is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass


# Every code the toolchain may emit, with its default severity.
CATALOG = {
    "E-PARSE": "error",
    "E-ENCODING": "error",
    "E-NAME": "error",
    "E-ARITY": "error",
    "E-TYPE-MISMATCH": "error",
    "E-MISSING-REQ": "error",
    "E-UNBOUND-ASSOC": "error",
    "E-NEEDS-NAME": "error",
    "E-CANNOT-INFER": "error",
    "E-NO-MODEL": "error",
    "E-AMBIGUOUS": "error",
    "E-DEPTH": "error",
    "E-NORM-DIVERGE": "error",
    "E-OVERLAP": "error",
    "E-DUPLICATE": "error",
    "E-CONSTRUCTOR-DUP": "error",
    "E-BLANKET-SELF": "error",
    "E-BLANKET-DUP": "error",
    "E-ORPHAN": "error",
    "E-CYCLE": "error",
    "E-UNRESOLVED-IMPORT": "error",
    "E-LINK-CONFLICT": "error",
    "E-NO-ENTRY": "error",
    "E-MULTI-ENTRY": "error",
    "E-CORE-ILLTYPED": "error",
    "E-RT-MATCH": "error",
    "E-RT-FUEL": "error",
    "E-NO-GOAL": "error",
    "W-INCOHERENT": "warning",
}


@dataclass(frozen=True, order=True)
class Span:
    """A half-open source region, 1-based (line, col) endpoints inclusive."""

    file: str
    start: tuple[int, int]
    end: tuple[int, int]

    def __post_init__(self):
        assert self.start <= self.end, (self.start, self.end)
        assert self.start[0] >= 1 and self.start[1] >= 1

    def contains(self, other: "Span") -> bool:
        return (
            self.file == other.file
            and self.start <= other.start
            and other.end <= self.end
        )

    def covers(self, line: int, col: int) -> bool:
        return self.start <= (line, col) <= self.end

    def to_json(self) -> dict:
        return {
            "file": self.file,
            "start": [self.start[0], self.start[1]],
            "end": [self.end[0], self.end[1]],
        }

    def __str__(self):
        return f"{self.file}:{self.start[0]}:{self.start[1]}"


def span_of(file: str) -> Span:
    """Placeholder span for file-level diagnostics."""
    return Span(file, (1, 1), (1, 1))


@dataclass(frozen=True)
class Related:
    """A secondary location attached to a diagnostic (e.g. the other model)."""

    span: Span
    note: str = ""

    def to_json(self) -> dict:
        return {"span": self.span.to_json(), "note": self.note}


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: Span
    module: str = ""
    related: tuple[Related, ...] = ()

    def __post_init__(self):
        assert self.code in CATALOG, self.code

    @property
    def severity(self) -> str:
        return CATALOG[self.code]

    def to_json(self) -> dict:
        return {
            "code": self.code,
            "severity": self.severity,
            "module": self.module,
            "span": self.span.to_json(),
            "message": self.message,
            "related": [r.to_json() for r in self.related],
        }

    def render(self, color: bool = False) -> str:
        sev = self.severity
        if color:
            tint = "\x1b[31m" if sev == "error" else "\x1b[33m"
            sev_txt = f"{tint}{sev}[{self.code}]\x1b[0m"
        else:
            sev_txt = f"{sev}[{self.code}]"
        where = f" (module {self.module})" if self.module else ""
        lines = [f"{self.span}: {sev_txt}: {self.message}{where}"]
        for rel in self.related:
            note = f": {rel.note}" if rel.note else ""
            lines.append(f"  related: {rel.span}{note}")
        return "\n".join(lines)


def sort_diagnostics(diags: list[Diagnostic], topo_index: dict[str, int]) -> list[Diagnostic]:
    """Canonical ordering: (module topological index, span, code)."""

    def key(d: Diagnostic):
        return (topo_index.get(d.module, -1), d.span, d.code, d.message)

    return sorted(diags, key=key)


def has_errors(diags) -> bool:
    return any(d.severity == "error" for d in diags)


class DiagnosticError(Exception):
    """Raised by stages that abort on their first unrecoverable diagnostic."""

    def __init__(self, diags):
        self.diagnostics = list(diags)
        super().__init__("; ".join(d.message for d in self.diagnostics))
