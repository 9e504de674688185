"""Render summary figures for a batch of stored events.

Used by the CLI report path: alongside the delimited output it drops
three PNGs into a directory — event volume per gate, hourly activity
over the queried window, and a breakdown of deny reasons. Rendering is
headless (Agg backend) and the input is the same event rows the report
itself was built from, so figures and table always agree.
"""

from __future__ import annotations

import collections
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)

from campus.coordinator.reports import StoredEvent
from campus.terminal.events import DenyReason, EventKind

FIGURE_NAMES = ("events_by_gate.png", "events_over_time.png", "deny_reasons.png")

_BUCKET_S = 3600


def render_figures(events: Sequence[StoredEvent], out_dir: str | Path) -> list[Path]:
    """Write the three summary PNGs for *events* into *out_dir*.

    Returns the created paths in a fixed order. An empty event list
    still produces valid (empty-axes) images so callers never have to
    special-case quiet periods.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / name for name in FIGURE_NAMES]
    _events_by_gate(events, paths[0])
    _events_over_time(events, paths[1])
    _deny_reasons(events, paths[2])
    return paths


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def _kind_name(kind: int) -> str:
    try:
        return EventKind(kind).name
    except ValueError:
        return str(kind)


def _events_by_gate(events: Iterable[StoredEvent], path: Path) -> None:
    granted = collections.Counter()
    denied = collections.Counter()
    other = collections.Counter()
    for e in events:
        if e.kind == EventKind.ACCESS_GRANTED:
            granted[e.gate] += 1
        elif e.kind == EventKind.ACCESS_DENIED:
            denied[e.gate] += 1
        else:
            other[e.gate] += 1
    gates = sorted(set(granted) | set(denied) | set(other))
    fig, ax = plt.subplots(figsize=(8, 4.5))
    xs = range(len(gates))
    g = [granted[x] for x in gates]
    d = [denied[x] for x in gates]
    o = [other[x] for x in gates]
    ax.bar(xs, g, label="granted", color="#2a9d8f")
    ax.bar(xs, d, bottom=g, label="denied", color="#e76f51")
    ax.bar(xs, o, bottom=[a + b for a, b in zip(g, d)], label="other", color="#8d99ae")
    ax.set_xticks(list(xs), [str(x) for x in gates])
    ax.set_xlabel("gate")
    ax.set_ylabel("events")
    ax.set_title("Events by gate")
    if gates:
        ax.legend()
    _save(fig, path)


def _events_over_time(events: Iterable[StoredEvent], path: Path) -> None:
    buckets = collections.Counter()
    for e in events:
        buckets[e.ts // _BUCKET_S * _BUCKET_S] += 1
    fig, ax = plt.subplots(figsize=(8, 4.5))
    if buckets:
        start, stop = min(buckets), max(buckets)
        ts = list(range(start, stop + _BUCKET_S, _BUCKET_S))
        ax.step(ts, [buckets[t] for t in ts], where="post", color="#264653")
        hours = (stop - start) // _BUCKET_S
        labels = ts if hours <= 12 else ts[:: max(1, len(ts) // 12)]
        ax.set_xticks(labels, [f"{(t % 86400) // 3600:02d}:00" for t in labels], rotation=45)
    ax.set_xlabel("hour")
    ax.set_ylabel("events / hour")
    ax.set_title("Activity over time")
    _save(fig, path)


def _deny_reasons(events: Iterable[StoredEvent], path: Path) -> None:
    reasons = collections.Counter()
    for e in events:
        if e.kind != EventKind.ACCESS_DENIED:
            continue
        code = e.detail & 0x7FFF
        try:
            reasons[DenyReason(code).name] += 1
        except ValueError:
            reasons[str(code)] += 1
    fig, ax = plt.subplots(figsize=(8, 4.5))
    if reasons:
        names = [name for name, _ in reasons.most_common()]
        ax.barh(range(len(names)), [reasons[n] for n in names], color="#e76f51")
        ax.set_yticks(range(len(names)), names)
        ax.invert_yaxis()
        ax.set_xlabel("denials")
    ax.set_title("Deny reasons")
    _save(fig, path)
