"""Pipe-delimited AS-relationship file I/O.

Data lines follow the public serial-1 convention: ``provider|customer|-1``
for transit and ``peer|peer|0`` for settlement-free peering; lines starting
with ``#`` are preserved as comments.  External AS numbers are mapped to
dense internal ids in first-seen order; reports translate back through
:class:`SnapshotMeta`.  Writing then parsing reproduces the edge multiset
and the comment block exactly (isolated nodes have no line format and are
not representable).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import IO

from .graph import LabeledAsGraph, build_graph

logger = logging.getLogger(__name__)

PEER_CODE = 0
PROVIDER_CUSTOMER_CODE = -1


class ParseError(ValueError):
    """Malformed or inconsistent relationship data; carries the line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass
class SnapshotMeta:
    source_path: str | None
    comment_lines: tuple[str, ...]
    as_number_map: dict[int, int] = field(default_factory=dict)
    duplicate_count: int = 0

    def external_of(self) -> dict[int, int]:
        """Inverse map: internal id -> external AS number."""
        return {v: k for k, v in self.as_number_map.items()}

    @classmethod
    def identity(cls, node_count: int, comments: tuple[str, ...] = ()) -> "SnapshotMeta":
        return cls(
            source_path=None,
            comment_lines=comments,
            as_number_map={u: u for u in range(node_count)},
        )


def parse_caida(stream: IO[str], source_path: str | None = None) -> tuple[LabeledAsGraph, SnapshotMeta]:
    """Parse a relationship file into a labeled graph plus metadata.

    Duplicate statements of the same relationship are dropped (counted in
    the metadata, logged once); contradictory statements for a pair raise
    :class:`ParseError` with the offending line number.
    """
    comments: list[str] = []
    as_map: dict[int, int] = {}
    roles: dict[tuple[int, int], tuple[str, tuple[int, int]]] = {}
    peer_edges: list[tuple[int, int]] = []
    cp_edges: list[tuple[int, int]] = []
    duplicates = 0

    def intern(asn: int) -> int:
        found = as_map.get(asn)
        if found is None:
            found = len(as_map)
            as_map[asn] = found
        return found

    for line_no, raw in enumerate(stream, start=1):
        line = raw.rstrip("\n")
        if line.startswith("#"):
            comments.append(line)
            continue
        if not line.strip():
            continue
        fields = line.split("|")
        if len(fields) != 3:
            raise ParseError(line_no, f"expected 'as1|as2|relationship', got {line!r}")
        try:
            as1, as2, rel = (int(f) for f in fields)
        except ValueError:
            raise ParseError(line_no, f"non-integer field in {line!r}") from None
        if as1 < 0 or as2 < 0:
            raise ParseError(line_no, f"negative AS number in {line!r}")
        if as1 == as2:
            raise ParseError(line_no, f"self-loop on AS {as1}")
        if rel == PROVIDER_CUSTOMER_CODE:
            provider, customer = intern(as1), intern(as2)
            kind, edge = "cp", (customer, provider)
        elif rel == PEER_CODE:
            a, b = intern(as1), intern(as2)
            kind, edge = "peer", (min(a, b), max(a, b))
        else:
            raise ParseError(line_no, f"unknown relationship code {rel}")
        key = (min(edge), max(edge))
        seen = roles.get(key)
        if seen is not None:
            if seen == (kind, edge):
                duplicates += 1
                continue
            raise ParseError(
                line_no, f"conflicting relationship for AS pair {as1}|{as2}"
            )
        roles[key] = (kind, edge)
        (peer_edges if kind == "peer" else cp_edges).append(edge)

    if duplicates:
        logger.warning("dropped %d duplicate relationship lines", duplicates)

    graph = build_graph(peer_edges, cp_edges, node_count=len(as_map))
    meta = SnapshotMeta(
        source_path=source_path,
        comment_lines=tuple(comments),
        as_number_map=as_map,
        duplicate_count=duplicates,
    )
    return graph, meta


def write_graph(g: LabeledAsGraph, meta: SnapshotMeta, stream: IO[str]) -> None:
    """Emit the pipe format: metadata comments first, then edges sorted by
    external AS numbers (deterministic bytes for a fixed graph)."""
    for line in meta.comment_lines:
        stream.write(line if line.startswith("#") else f"# {line}")
        stream.write("\n")
    ext = meta.external_of()
    rows: list[tuple[int, int, int]] = []
    for customer, provider in g.cp_edges:
        rows.append((ext[provider], ext[customer], PROVIDER_CUSTOMER_CODE))
    for a, b in g.peer_edges:
        x, y = sorted((ext[a], ext[b]))
        rows.append((x, y, PEER_CODE))
    rows.sort()
    for as1, as2, rel in rows:
        stream.write(f"{as1}|{as2}|{rel}\n")
