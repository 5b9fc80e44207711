"""Render provenance records as natural-language sentences, one per context view.

The grammar is a fixed fragment table; fragments are joined with " and " and
only *active* features produce fragments — a record with no netflows says
nothing about sockets under any view.  Fragment groups appear in a fixed
order (execution, netflows, events, parent link), and within a group the
ingest order of the record is preserved.  A record with nothing visible under
a view falls back to a fixed inactivity sentence so the embedding stage always
receives non-empty text.

Example (all-contexts view)::

    Process 1054 started /bin/bash and connected socket 192.168.1.5:80
    and changed /etc/passwd.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import IO, Iterable, Union

from .records import ProcessRecord, View, ViewFeatures, project


@dataclass(frozen=True)
class SentenceDoc:
    """One rendered sentence: which record, which view, and the text."""

    record_index: int
    view: View
    text: str


def _fragments(features: ViewFeatures) -> list[str]:
    frags: list[str] = []
    if features.exe is not None:
        if features.args:
            frags.append(f"started {features.exe} with arguments {' '.join(features.args)}")
        else:
            frags.append(f"started {features.exe}")
    frags.extend(
        f"started {e.name}" for e in features.events if e.kind == "exec"
    )
    frags.extend(f"connected socket {f.raddr}:{f.rport}" for f in features.netflows)
    for e in features.events:
        if e.kind == "file_write":
            frags.append(f"changed {e.path}")
        elif e.kind == "file_read":
            frags.append(f"read {e.path}")
        elif e.kind == "syscall":
            frags.append(f"invoked {e.name}")
        elif e.kind == "fork":
            frags.append("spawned a child process")
    if features.parent is not None:
        ppid, pexe = features.parent
        frags.append(f"was started by process {ppid} running {pexe}")
    return frags


def render_sentence(record: ProcessRecord, view: View, record_index: int = 0) -> SentenceDoc:
    """Render one record under one view. Deterministic, byte-for-byte."""
    frags = _fragments(project(record, view))
    if frags:
        text = f"Process {record.pid} " + " and ".join(frags) + "."
    else:
        text = f"Process {record.pid} performed no recorded activity."
    return SentenceDoc(record_index=record_index, view=View(view), text=text)


def render_corpus(records: Iterable[ProcessRecord], view: View) -> list[SentenceDoc]:
    """One sentence per record, order-preserving; record_index = input position."""
    return [render_sentence(r, view, record_index=i) for i, r in enumerate(records)]


def write_corpus(docs: Iterable[SentenceDoc], sink: Union[str, os.PathLike, IO]) -> int:
    """Dump sentences as JSONL ({"record_index","view","text"}); returns bytes written."""
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            return write_corpus(docs, fh)
    total = 0
    for d in docs:
        line = json.dumps(
            {"record_index": d.record_index, "view": d.view.value, "text": d.text},
            separators=(",", ":"),
            ensure_ascii=False,
        )
        total += sink.write(line.encode("utf-8") + b"\n")
    return total


def read_corpus(source: Union[str, os.PathLike, IO]) -> list[SentenceDoc]:
    """Read a sentence dump written by :func:`write_corpus`."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return read_corpus(fh)
    docs = []
    for line in source:
        line = line.decode("utf-8") if isinstance(line, bytes) else line
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        docs.append(SentenceDoc(obj["record_index"], View(obj["view"]), obj["text"]))
    return docs
