"""Domain types for per-process provenance records and their context views.

A :class:`ProcessRecord` summarizes what one process did: which binary it ran,
which files and system calls it touched, its network flows, and its parent
link.  Detection never looks at a record directly — it looks at one of five
*context views*, each a projection onto one behavioral dimension:

====  =============================================
PE    process events (syscalls, file I/O, forks)
PX    executions (binary + arguments, exec events)
PP    parent link
PN    network flows
PA    all of the above combined
====  =============================================

All types are immutable after validation and every operation here is a pure
function, so records and projections are safe to share across threads.
"""

from __future__ import annotations

import enum
import ipaddress
from dataclasses import dataclass
from typing import Optional

from .errors import InvalidRecord

EVENT_KINDS = frozenset({"syscall", "file_read", "file_write", "exec", "fork"})
PROTOCOLS = ("tcp", "udp")


class View(str, enum.Enum):
    """The five context views a record can be projected onto."""

    PE = "PE"  # process events: syscalls, file reads/writes, forks
    PX = "PX"  # executions: binary, arguments, exec events
    PP = "PP"  # parent link
    PN = "PN"  # network flows
    PA = "PA"  # all contexts combined

    def __str__(self) -> str:  # so f-strings yield "PE", not "View.PE"
        return self.value


@dataclass(frozen=True)
class ProvenanceEvent:
    """One process event: a syscall, file access, exec, or fork."""

    kind: str
    name: str
    path: Optional[str] = None


@dataclass(frozen=True)
class NetFlow:
    """One network flow to a remote endpoint."""

    raddr: str
    rport: int
    proto: str = "tcp"


@dataclass(frozen=True)
class ProcessRecord:
    """Provenance summary of a single process.

    Fields mirror the on-disk JSONL schema.  ``parent`` is ``(ppid, exe)`` or
    None; ``label`` is 0 (benign), 1 (attack), or None (unlabeled); ``ts`` is
    epoch milliseconds.  Event order is preserved exactly as ingested.
    """

    pid: int
    exe: Optional[str]
    args: tuple[str, ...]
    parent: Optional[tuple[int, str]]
    events: tuple[ProvenanceEvent, ...]
    netflows: tuple[NetFlow, ...]
    label: Optional[int]
    ts: int


@dataclass(frozen=True)
class ViewFeatures:
    """The fragments of a record visible under one context view.

    Absent feature groups are None/empty — an empty ViewFeatures is legal
    (e.g. the PP projection of a parentless record).
    """

    exe: Optional[str] = None
    args: tuple[str, ...] = ()
    events: tuple[ProvenanceEvent, ...] = ()
    netflows: tuple[NetFlow, ...] = ()
    parent: Optional[tuple[int, str]] = None


def validate_record(record: ProcessRecord) -> ProcessRecord:
    """Check every type invariant; return the record unchanged if all hold.

    Raises:
        InvalidRecord: naming the offending field, on the first violation.
    """
    if not isinstance(record.pid, int) or isinstance(record.pid, bool):
        raise InvalidRecord("pid", "must be an integer")
    if record.pid < 0:
        raise InvalidRecord("pid", f"must be >= 0, got {record.pid}")
    if record.exe is not None and (not isinstance(record.exe, str) or not record.exe):
        raise InvalidRecord("exe", "must be a non-empty string or absent")
    for a in record.args:
        if not isinstance(a, str):
            raise InvalidRecord("args", "arguments must be strings")
    if record.parent is not None:
        ppid, pexe = record.parent
        if not isinstance(ppid, int) or ppid < 0:
            raise InvalidRecord("parent", f"parent pid must be an integer >= 0, got {ppid!r}")
        if not isinstance(pexe, str) or not pexe:
            raise InvalidRecord("parent", "parent exe must be a non-empty string")
    for ev in record.events:
        if ev.kind not in EVENT_KINDS:
            raise InvalidRecord("events", f"unknown event kind {ev.kind!r}")
        if ev.kind in ("file_read", "file_write") and not ev.path:
            raise InvalidRecord("events", f"{ev.kind} event requires a path")
        if ev.kind not in ("file_read", "file_write") and ev.path is not None:
            raise InvalidRecord("events", f"{ev.kind} event must not carry a path")
        if ev.kind == "exec" and not ev.name:
            raise InvalidRecord("events", "exec event requires a non-empty binary path")
        if not isinstance(ev.name, str):
            raise InvalidRecord("events", "event name must be a string")
    for nf in record.netflows:
        if not isinstance(nf.rport, int) or not 0 <= nf.rport <= 65535:
            raise InvalidRecord("rport", f"port out of range: {nf.rport!r}")
        try:
            ipaddress.ip_address(nf.raddr)
        except ValueError:
            raise InvalidRecord("raddr", f"not an IP literal: {nf.raddr!r}") from None
        if nf.proto not in PROTOCOLS:
            raise InvalidRecord("proto", f"must be tcp or udp, got {nf.proto!r}")
    if record.label is not None and record.label not in (0, 1):
        raise InvalidRecord("label", f"must be 0, 1, or absent, got {record.label!r}")
    if not isinstance(record.ts, int) or isinstance(record.ts, bool):
        raise InvalidRecord("ts", "must be an integer (epoch milliseconds)")
    return record


# Event kinds each view keeps.  PE owns everything that is not an exec
# (forks included) so that the PA projection is exactly the union of the
# four single views.
_PE_KINDS = frozenset({"syscall", "file_read", "file_write", "fork"})


def project(record: ProcessRecord, view: View) -> ViewFeatures:
    """Project a validated record onto one context view.

    Pure: identical inputs produce identical (and equal-comparable) outputs.
    """
    view = View(view)
    if view is View.PE:
        return ViewFeatures(events=tuple(e for e in record.events if e.kind in _PE_KINDS))
    if view is View.PX:
        return ViewFeatures(
            exe=record.exe,
            args=record.args,
            events=tuple(e for e in record.events if e.kind == "exec"),
        )
    if view is View.PP:
        return ViewFeatures(parent=record.parent)
    if view is View.PN:
        return ViewFeatures(netflows=record.netflows)
    return ViewFeatures(
        exe=record.exe,
        args=record.args,
        events=record.events,
        netflows=record.netflows,
        parent=record.parent,
    )
