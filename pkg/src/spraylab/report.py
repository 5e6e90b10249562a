"""Line-delimited JSON reports: a header, one record per (check, point, residual), an aggregate."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import IO, Any, Iterable

from . import __version__

FORMAT_VERSION = 1


@dataclass
class Record:
    check: str
    point_x: list[float] | None
    point_y: list[float] | None
    residual_name: str
    residual_value: float
    tol: float
    verdict: str  # "pass", "fail" or "info"


@dataclass
class Aggregate:
    pass_count: int = 0
    fail_count: int = 0
    skipped: int = 0
    wall_time: float = 0.0
    aborted: bool = False
    message: str = ""


@dataclass
class Report:
    config: dict[str, Any]
    records: list[Record] = field(default_factory=list)
    aggregate: Aggregate = field(default_factory=Aggregate)
    version: str = __version__
    format_version: int = FORMAT_VERSION

    def tally(self) -> None:
        """Recompute pass/fail counts from the records."""
        self.aggregate.pass_count = sum(r.verdict == "pass" for r in self.records)
        self.aggregate.fail_count = sum(r.verdict == "fail" for r in self.records)

    @property
    def exit_code(self) -> int:
        if self.aggregate.aborted:
            return 3
        return 0 if self.aggregate.fail_count == 0 else 1

    def failed_checks(self) -> list[str]:
        return sorted({r.check for r in self.records if r.verdict == "fail"})


def _point(p: Iterable[float] | None):
    return None if p is None else [float(v) for v in p]


def make_record(check: str, point, name: str, value: float, tol: float, verdict: str) -> Record:
    if point is None:
        px = py = None
    else:
        n = len(point) // 2
        px, py = _point(point[:n]), _point(point[n:])
    return Record(check, px, py, name, float(value), float(tol), verdict)


def emit(report: Report, out: IO[str]) -> None:
    head = {"record": "header", "format_version": report.format_version, "version": report.version,
            "config": report.config}
    out.write(json.dumps(head) + "\n")
    for r in report.records:
        out.write(json.dumps({"record": "check", **asdict(r)}) + "\n")
    out.write(json.dumps({"record": "aggregate", **asdict(report.aggregate)}) + "\n")


def emits(report: Report) -> str:
    import io

    buf = io.StringIO()
    emit(report, buf)
    return buf.getvalue()


def parse(text: str) -> Report:
    head = None
    records: list[Record] = []
    agg = None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        obj = json.loads(line)
        kind = obj.pop("record", None)
        try:
            if kind == "header":
                head = obj
            elif kind == "check":
                records.append(Record(**obj))
            elif kind == "aggregate":
                agg = Aggregate(**obj)
            else:
                raise ValueError(f"unknown record type {kind!r}")
        except TypeError as exc:
            raise ValueError(f"line {lineno}: malformed {kind} record: {exc}") from None
    if head is None or agg is None:
        raise ValueError("report needs a header and an aggregate record")
    if head.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported report format_version {head.get('format_version')!r}")
    return Report(head["config"], records, agg, head["version"], head["format_version"])
