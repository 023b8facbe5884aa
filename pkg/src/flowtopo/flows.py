"""Netflow CSV ingest: record parsing, bidirectional session pairing, time windows.

Input logs are unidirectional flow records.  A client request and the server's
response show up as two separate records with mirrored endpoints; downstream
analysis wants one session per communication, so overlapping mirrored records
are merged and the originating side is designated the client.
"""

from __future__ import annotations

import ipaddress
import math
from dataclasses import dataclass
from typing import Iterable

FLOW_HEADER = "sTime,eTime,sIP,dIP,sPort,dPort,flags"
SESSION_HEADER = (
    "window_start,client_ip,server_ip,client_port,server_port,"
    "start,end,constituent_count"
)


def fmt(x: float) -> str:
    """Render a float with enough digits to round-trip exactly."""
    return format(float(x), ".17g")


class FlowFormatError(ValueError):
    """Malformed flow CSV input. Carries the 1-based line number and field name."""

    def __init__(self, message: str, line_number: int | None = None,
                 field: str | None = None):
        super().__init__(message)
        self.line_number = line_number
        self.field = field


@dataclass(frozen=True)
class FlowRecord:
    """One unidirectional netflow record (one CSV data line)."""

    s_time: float
    e_time: float
    s_ip: str
    d_ip: str
    s_port: int
    d_port: int
    flags: str

    def __post_init__(self):
        if self.e_time < self.s_time:
            raise ValueError(f"e_time {self.e_time} precedes s_time {self.s_time}")
        for name, port in (("s_port", self.s_port), ("d_port", self.d_port)):
            if not 0 <= port <= 65535:
                raise ValueError(f"{name} {port} out of range 0-65535")
        for name, ip in (("s_ip", self.s_ip), ("d_ip", self.d_ip)):
            try:
                ipaddress.IPv4Address(ip)
            except ipaddress.AddressValueError as exc:
                raise ValueError(f"{name} {ip!r} is not a dotted-quad IPv4 address") from exc


@dataclass(frozen=True)
class SessionRecord:
    """One bidirectional communication, merged from one or more flow records."""

    client_ip: str
    server_ip: str
    client_port: int
    server_port: int
    start: float
    end: float
    constituent_count: int

    def __post_init__(self):
        if self.constituent_count < 1:
            raise ValueError("constituent_count must be >= 1")


@dataclass(frozen=True)
class TimeWindow:
    """A half-open interval [start, start + width) with the sessions starting in it."""

    start: float
    width: float
    sessions: tuple[SessionRecord, ...]

    @property
    def end(self) -> float:
        return self.start + self.width


_FIELDS = ("sTime", "eTime", "sIP", "dIP", "sPort", "dPort", "flags")


def _parse_line(line: str, lineno: int) -> FlowRecord:
    parts = line.split(",")
    if len(parts) != 7:
        raise FlowFormatError(
            f"line {lineno}: expected 7 comma-separated fields, got {len(parts)}",
            lineno)
    vals = {}
    for name, raw in zip(_FIELDS, parts):
        raw = raw.strip()
        try:
            if name in ("sTime", "eTime"):
                vals[name] = float(raw)
            elif name in ("sPort", "dPort"):
                vals[name] = int(raw)
            else:
                vals[name] = raw
        except ValueError:
            raise FlowFormatError(
                f"line {lineno}: field {name} has unparseable value {raw!r}",
                lineno, name) from None
    for name in ("sPort", "dPort"):
        if not 0 <= vals[name] <= 65535:
            raise FlowFormatError(
                f"line {lineno}: field {name} value {vals[name]} outside 0-65535",
                lineno, name)
    for name in ("sIP", "dIP"):
        try:
            ipaddress.IPv4Address(vals[name])
        except ipaddress.AddressValueError:
            raise FlowFormatError(
                f"line {lineno}: field {name} value {vals[name]!r} is not IPv4",
                lineno, name) from None
    if vals["eTime"] < vals["sTime"]:
        raise FlowFormatError(
            f"line {lineno}: field eTime ({vals['eTime']}) precedes sTime",
            lineno, "eTime")
    return FlowRecord(vals["sTime"], vals["eTime"], vals["sIP"], vals["dIP"],
                      vals["sPort"], vals["dPort"], vals["flags"])


def parse_flows(lines: Iterable[str]) -> list[FlowRecord]:
    """Parse flow CSV lines into records.

    The first line must be exactly ``sTime,eTime,sIP,dIP,sPort,dPort,flags``.
    Raises FlowFormatError naming the offending line (and field, if one) on
    malformed input.
    """
    records = []
    it = iter(lines)
    try:
        header = next(it)
    except StopIteration:
        raise FlowFormatError("empty input: missing header line", 1) from None
    if header.rstrip("\r\n") != FLOW_HEADER:
        raise FlowFormatError(
            f"line 1: bad header {header.rstrip()!r}, expected {FLOW_HEADER!r}", 1)
    for lineno, line in enumerate(it, start=2):
        line = line.rstrip("\r\n")
        if not line:
            continue
        records.append(_parse_line(line, lineno))
    return records


def serialize_flows(records: Iterable[FlowRecord]) -> str:
    """Render records in the flow CSV format (inverse of parse_flows)."""
    out = [FLOW_HEADER]
    for r in records:
        out.append(f"{fmt(r.s_time)},{fmt(r.e_time)},{r.s_ip},{r.d_ip},"
                   f"{r.s_port},{r.d_port},{r.flags}")
    return "\n".join(out) + "\n"


def _reverse_match(a: FlowRecord, b: FlowRecord) -> bool:
    return (a.s_ip, a.s_port, a.d_ip, a.d_port) == (b.d_ip, b.d_port, b.s_ip, b.s_port)


def _overlaps(a: FlowRecord, b: FlowRecord) -> bool:
    # intervals [s, e] overlap if max(starts) <= min(ends)
    return max(a.s_time, b.s_time) <= min(a.e_time, b.e_time)


def _component_session(members: list[FlowRecord]) -> SessionRecord:
    t0 = min(r.s_time for r in members)
    earliest_sources = {(r.s_ip, r.s_port) for r in members if r.s_time == t0}
    if len(earliest_sources) == 1:
        client = earliest_sources.pop()
    else:
        # both directions start simultaneously: ephemeral-port side is the
        # client, and as a last resort the lexicographically smaller IP
        a, b = sorted(earliest_sources)
        if (a[1] >= 1024) != (b[1] >= 1024):
            client = a if a[1] >= 1024 else b
        elif a[0] != b[0]:
            client = a if a[0] < b[0] else b
        else:
            client = a
    probe = members[0]
    if (probe.s_ip, probe.s_port) == client:
        server = (probe.d_ip, probe.d_port)
    else:
        server = (probe.s_ip, probe.s_port)
    return SessionRecord(
        client_ip=client[0], server_ip=server[0],
        client_port=client[1], server_port=server[1],
        start=t0, end=max(r.e_time for r in members),
        constituent_count=len(members))


def pair_bidirectional(records: Iterable[FlowRecord]) -> list[SessionRecord]:
    """Merge mirrored, time-overlapping flow records into sessions.

    Two records pair when one's (sIP, sPort, dIP, dPort) equals the other's
    reversed tuple and their [sTime, eTime] intervals overlap; pairing is
    closed transitively, so a request, its response, and a retransmit all
    land in one session.  Unmatched records become singleton sessions.
    Never drops a record: constituent counts sum to the input length.
    """
    recs = sorted(records, key=lambda r: (r.s_time, r.e_time, r.s_ip, r.d_ip,
                                          r.s_port, r.d_port, r.flags))
    n = len(recs)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    groups: dict[tuple, list[int]] = {}
    for i, r in enumerate(recs):
        key = tuple(sorted([(r.s_ip, r.s_port), (r.d_ip, r.d_port)]))
        groups.setdefault(key, []).append(i)
    for idxs in groups.values():
        for a in range(len(idxs)):
            for b in range(a + 1, len(idxs)):
                i, j = idxs[a], idxs[b]
                if _reverse_match(recs[i], recs[j]) and _overlaps(recs[i], recs[j]):
                    union(i, j)

    components: dict[int, list[FlowRecord]] = {}
    for i in range(n):
        components.setdefault(find(i), []).append(recs[i])
    sessions = [_component_session(members) for members in components.values()]
    sessions.sort(key=lambda s: (s.start, s.client_ip, s.server_ip,
                                 s.client_port, s.server_port))
    return sessions


def window(sessions: Iterable[SessionRecord], width: float,
           origin: float = 0.0) -> list[TimeWindow]:
    """Partition sessions into fixed-width half-open windows by start time.

    A session starting at t goes into window floor((t - origin) / width).
    Empty windows between the first and last occupied one are emitted
    explicitly so the downstream detector sees an unbroken timeline.
    """
    if width <= 0:
        raise ValueError(f"window width must be > 0, got {width}")
    ordered = sorted(sessions, key=lambda s: (s.start, s.client_ip, s.server_ip,
                                              s.client_port, s.server_port))
    if not ordered:
        return []
    indices = [math.floor((s.start - origin) / width) for s in ordered]
    lo, hi = min(indices), max(indices)
    buckets: dict[int, list[SessionRecord]] = {i: [] for i in range(lo, hi + 1)}
    for idx, s in zip(indices, ordered):
        buckets[idx].append(s)
    return [TimeWindow(start=origin + i * width, width=width,
                       sessions=tuple(buckets[i]))
            for i in range(lo, hi + 1)]


def serialize_windowed_sessions(windows: Iterable[TimeWindow]) -> str:
    """Render windowed sessions as CSV with a leading window_start column."""
    out = [SESSION_HEADER]
    for w in windows:
        for s in w.sessions:
            out.append(f"{fmt(w.start)},{s.client_ip},{s.server_ip},"
                       f"{s.client_port},{s.server_port},{fmt(s.start)},"
                       f"{fmt(s.end)},{s.constituent_count}")
    return "\n".join(out) + "\n"


def parse_windowed_sessions(lines: Iterable[str], width: float) -> list[TimeWindow]:
    """Rebuild TimeWindows from the windowed-session CSV.

    Empty windows carry no rows, so the gap-filled timeline is reconstructed
    from the window_start values and the given width.
    """
    if width <= 0:
        raise ValueError(f"window width must be > 0, got {width}")
    it = iter(lines)
    try:
        header = next(it)
    except StopIteration:
        raise FlowFormatError("empty input: missing header line", 1) from None
    if header.rstrip("\r\n") != SESSION_HEADER:
        raise FlowFormatError(
            f"line 1: bad header {header.rstrip()!r}, expected {SESSION_HEADER!r}", 1)
    rows: dict[float, list[SessionRecord]] = {}
    for lineno, line in enumerate(it, start=2):
        line = line.rstrip("\r\n")
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 8:
            raise FlowFormatError(
                f"line {lineno}: expected 8 fields, got {len(parts)}", lineno)
        try:
            ws = float(parts[0])
            s = SessionRecord(client_ip=parts[1], server_ip=parts[2],
                              client_port=int(parts[3]), server_port=int(parts[4]),
                              start=float(parts[5]), end=float(parts[6]),
                              constituent_count=int(parts[7]))
        except ValueError as exc:
            raise FlowFormatError(f"line {lineno}: {exc}", lineno) from None
        rows.setdefault(ws, []).append(s)
    if not rows:
        return []
    first = min(rows)
    by_index: dict[int, list[SessionRecord]] = {}
    for ws, sessions in rows.items():
        idx = round((ws - first) / width)
        if abs(first + idx * width - ws) > width * 1e-9:
            raise FlowFormatError(
                f"window_start {ws} is not on the {width}-second grid from {first}")
        by_index.setdefault(idx, []).extend(sessions)
    windows = []
    for i in range(max(by_index) + 1):
        sessions = sorted(by_index.get(i, []),
                          key=lambda s: (s.start, s.client_ip, s.server_ip,
                                         s.client_port, s.server_port))
        windows.append(TimeWindow(start=first + i * width, width=width,
                                  sessions=tuple(sessions)))
    return windows
