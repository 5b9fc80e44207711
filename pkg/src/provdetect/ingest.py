"""JSON-lines serialization, parsing, and dataset splitting.

One record per line, UTF-8, with a fixed key order so serialization is
canonical and byte-stable across platforms:

    {"pid":…,"exe":…,"args":[…],"parent":{"pid":…,"exe":…}|null,
     "events":[{"kind":…,"name":…,"path":…|null},…],
     "netflows":[{"raddr":…,"rport":…,"proto":…},…],
     "label":0|1|null,"ts":…}

Parsing is strict and fail-fast: a malformed line, an unknown key, or an
invariant violation raises :class:`~provdetect.errors.ParseError` with its
line number rather than silently dropping data.
"""

from __future__ import annotations

import io
import json
import os
import warnings
from dataclasses import dataclass
from typing import IO, Iterable, Union

from .errors import NoAnomaliesWarning, ParseError
from .records import NetFlow, ProcessRecord, ProvenanceEvent, validate_record
from .rng import Xoshiro256StarStar

_KEYS = ("pid", "exe", "args", "parent", "events", "netflows", "label", "ts")
_EVENT_KEYS = ("kind", "name", "path")
_NETFLOW_KEYS = ("raddr", "rport", "proto")


@dataclass(frozen=True)
class DatasetSplit:
    """A disjoint partition of a labeled corpus.

    ``train`` holds only benign records; ``validation`` and ``test`` keep their
    labels and receive every anomalous record.
    """

    train: tuple[ProcessRecord, ...]
    validation: tuple[ProcessRecord, ...]
    test: tuple[ProcessRecord, ...]


def record_to_obj(r: ProcessRecord) -> dict:
    """Record → plain dict in canonical key order."""
    return {
        "pid": r.pid,
        "exe": r.exe,
        "args": list(r.args),
        "parent": {"pid": r.parent[0], "exe": r.parent[1]} if r.parent else None,
        "events": [{"kind": e.kind, "name": e.name, "path": e.path} for e in r.events],
        "netflows": [{"raddr": f.raddr, "rport": f.rport, "proto": f.proto} for f in r.netflows],
        "label": r.label,
        "ts": r.ts,
    }


def _obj_to_record(obj: dict) -> ProcessRecord:
    if not isinstance(obj, dict):
        raise ValueError("line is not a JSON object")
    unknown = set(obj) - set(_KEYS)
    if unknown:
        raise ValueError(f"unknown keys: {sorted(unknown)}")
    missing = set(_KEYS) - set(obj)
    if missing:
        raise ValueError(f"missing keys: {sorted(missing)}")
    parent = obj["parent"]
    if parent is not None:
        if not isinstance(parent, dict) or set(parent) != {"pid", "exe"}:
            raise ValueError("parent must be {\"pid\":…,\"exe\":…} or null")
        parent = (parent["pid"], parent["exe"])
    events = []
    for e in obj["events"]:
        if not isinstance(e, dict) or set(e) != set(_EVENT_KEYS):
            raise ValueError("event must have exactly kind/name/path")
        events.append(ProvenanceEvent(e["kind"], e["name"], e["path"]))
    netflows = []
    for f in obj["netflows"]:
        if not isinstance(f, dict) or set(f) != set(_NETFLOW_KEYS):
            raise ValueError("netflow must have exactly raddr/rport/proto")
        netflows.append(NetFlow(f["raddr"], f["rport"], f["proto"]))
    if not isinstance(obj["args"], list):
        raise ValueError("args must be a list")
    return ProcessRecord(
        pid=obj["pid"],
        exe=obj["exe"],
        args=tuple(obj["args"]),
        parent=parent,
        events=tuple(events),
        netflows=tuple(netflows),
        label=obj["label"],
        ts=obj["ts"],
    )


def parse_jsonl(stream: Union[bytes, str, IO]) -> list[ProcessRecord]:
    """Parse a JSONL stream into validated records.

    Accepts bytes, a string, or a file-like object. Blank lines are skipped.

    Raises:
        ParseError: with the 1-based line number, on the first bad line.
    """
    if isinstance(stream, bytes):
        lines: Iterable[str] = io.StringIO(stream.decode("utf-8"))
    elif isinstance(stream, str):
        lines = io.StringIO(stream)
    else:
        lines = (ln.decode("utf-8") if isinstance(ln, bytes) else ln for ln in stream)
    records = []
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(lineno, f"malformed JSON: {e.msg}") from None
        try:
            record = validate_record(_obj_to_record(obj))
        except Exception as e:
            raise ParseError(lineno, str(e)) from None
        records.append(record)
    return records


def write_jsonl(records: Iterable[ProcessRecord], sink: Union[str, os.PathLike, IO]) -> int:
    """Write records in canonical JSONL form; returns the number of bytes written.

    ``sink`` may be a path or a binary file-like object. Output has no
    insignificant whitespace and every line ends with ``\\n``.
    """
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            return write_jsonl(records, fh)
    total = 0
    for r in records:
        line = json.dumps(record_to_obj(r), separators=(",", ":"), ensure_ascii=False)
        total += sink.write(line.encode("utf-8") + b"\n")
    return total


def serialize(records: Iterable[ProcessRecord]) -> bytes:
    """Canonical JSONL bytes for a record list (convenience wrapper)."""
    buf = io.BytesIO()
    write_jsonl(records, buf)
    return buf.getvalue()


def split_indices(labels: list[int], val_fraction: float, test_fraction: float,
                  seed: int) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Index-level split: (train, validation, test) positions.

    Benign positions are shuffled with the seeded PRNG and partitioned
    ``⌊n·val⌋ / ⌊n·test⌋ / rest``; anomalous positions are shuffled and divided
    between validation and test in proportion ``val:test``.  Train receives
    benign positions only.  Records are identified by position, so these
    indices *are* the split identity.
    """
    if not 0.0 <= val_fraction < 1.0 or not 0.0 <= test_fraction < 1.0:
        raise ValueError("fractions must lie in [0, 1)")
    if val_fraction + test_fraction >= 1.0:
        raise ValueError("val_fraction + test_fraction must be < 1")
    for i, lab in enumerate(labels):
        if lab not in (0, 1):
            raise ValueError(f"record {i} is unlabeled; split requires labels")
    benign = [i for i, lab in enumerate(labels) if lab == 0]
    anomalous = [i for i, lab in enumerate(labels) if lab == 1]
    if not anomalous and val_fraction + test_fraction > 0:
        warnings.warn(
            "corpus contains no anomalies; validation/test will be benign-only",
            NoAnomaliesWarning,
            stacklevel=2,
        )
    rng = Xoshiro256StarStar(seed)
    rng.shuffle(benign)
    rng.shuffle(anomalous)
    n_val_b = int(len(benign) * val_fraction)
    n_test_b = int(len(benign) * test_fraction)
    val = benign[:n_val_b]
    test = benign[n_val_b:n_val_b + n_test_b]
    train = benign[n_val_b + n_test_b:]
    frac_sum = val_fraction + test_fraction
    if frac_sum > 0:
        # Epsilon absorbs float error on ratios that are mathematically
        # integral (0.1/(0.1+0.2) times 30 must give 10, not 9).
        n_val_a = int(len(anomalous) * val_fraction / frac_sum + 1e-9)
        val += anomalous[:n_val_a]
        test += anomalous[n_val_a:]
    else:
        # Nowhere labeled to put anomalies, but train must stay benign-only
        # and the split must remain a partition: anomalies land in test.
        test += anomalous
    return tuple(train), tuple(val), tuple(test)


def split(records: list[ProcessRecord], val_fraction: float, test_fraction: float,
          seed: int) -> DatasetSplit:
    """Split a labeled corpus into benign-only train plus labeled validation/test."""
    labels = [r.label for r in records]
    train_idx, val_idx, test_idx = split_indices(labels, val_fraction, test_fraction, seed)
    return DatasetSplit(
        train=tuple(records[i] for i in train_idx),
        validation=tuple(records[i] for i in val_idx),
        test=tuple(records[i] for i in test_idx),
    )
