"""JSON documents for diagrams and orderings, report serialization and DOT export.

A document looks like::

    {"schema": "adic-lab/1", "levels": [[[1], [2]], [[2, 1], [1, 2]]],
     "stationary": true, "ordering": {"2": {"v1": [[1, 1], [2, 1], [1, 2]]}}}

Ordering entries list the incoming edges of a vertex from min to max as
1-based ``(source, copy)`` pairs.  Unlisted vertices use left-to-right order.
On a stationary diagram, levels past the stored ones reuse the ordering of the
last stored level.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from .certificate import DiagramError
from .diagram import Diagram
from .dynamics import EdgeOrdering, incoming_edges

SCHEMA = "adic-lab/1"
SAFE_INT = 2**53


@dataclass
class DiagramDocument:
    diagram: Diagram
    ordering: dict[int, dict[int, list[tuple[int, int]]]] = field(default_factory=dict)
    schema: str = SCHEMA

    # -- conversion ----------------------------------------------------------------

    @classmethod
    def from_dict(cls, obj: Any) -> DiagramDocument:
        if not isinstance(obj, dict):
            raise DiagramError("document must be a JSON object")
        schema = obj.get("schema", SCHEMA)
        if schema != SCHEMA:
            raise DiagramError(f"unsupported schema {schema!r} (expected {SCHEMA!r})")
        levels = obj.get("levels")
        if not isinstance(levels, list) or not levels:
            raise DiagramError("n(0) must be 1: the document has no levels")
        stationary = obj.get("stationary", False)
        if not isinstance(stationary, bool):
            raise DiagramError("'stationary' must be a boolean")
        d = Diagram(levels, stationary=stationary)
        ordering: dict[int, dict[int, list[tuple[int, int]]]] = {}
        for key, per_vertex in (obj.get("ordering") or {}).items():
            try:
                k = int(key)
            except ValueError:
                raise DiagramError(f"ordering level key {key!r} is not an integer") from None
            if not 1 <= k <= d.stored_depth:
                raise DiagramError(f"ordering level {k} outside stored levels 1..{d.stored_depth}")
            if not isinstance(per_vertex, dict):
                raise DiagramError(f"ordering level {k} must map vertices to edge lists")
            ordering[k] = {}
            for vkey, listing in per_vertex.items():
                if not (isinstance(vkey, str) and vkey.startswith("v") and vkey[1:].isdigit()):
                    raise DiagramError(f"vertex key {vkey!r} must look like 'v1'")
                v = int(vkey[1:]) - 1
                if not 0 <= v < d.n(k):
                    raise DiagramError(f"ordering level {k}: vertex {vkey} does not exist")
                try:
                    edges = [(int(s) - 1, int(c) - 1) for s, c in listing]
                except (TypeError, ValueError):
                    raise DiagramError(f"ordering level {k}, {vkey}: entries must be [source, copy] pairs") from None
                ordering[k][v] = edges
        doc = cls(d, ordering, schema)
        doc.edge_ordering(d.stored_depth)  # validate permutations
        return doc

    def to_dict(self) -> dict:
        out: dict[str, Any] = {
            "schema": self.schema,
            "levels": [[list(r) for r in m] for m in self.diagram.levels],
            "stationary": self.diagram.stationary,
        }
        if self.ordering:
            out["ordering"] = {
                str(k): {f"v{v + 1}": [[s + 1, c + 1] for s, c in lst] for v, lst in sorted(per.items())}
                for k, per in sorted(self.ordering.items())
            }
        return out

    @classmethod
    def from_ordering(cls, ordering: EdgeOrdering) -> DiagramDocument:
        """Document with the ordering written out in full for every level."""
        d = ordering.diagram
        if ordering.depth > d.stored_depth:
            d = d.truncate(ordering.depth) if not d.stationary else Diagram(
                [d.matrix(k) for k in range(1, ordering.depth + 1)], stationary=True
            )
        listing = {
            k: {v: list(ordering.listing(k, v)) for v in range(d.n(k))} for k in range(1, ordering.depth + 1)
        }
        return cls(d, listing)

    def edge_ordering(self, depth: int | None = None) -> EdgeOrdering:
        d = self.diagram
        depth = d.resolve_depth(depth, d.stored_depth)
        order = []
        for k in range(1, depth + 1):
            src = self.ordering.get(k if k <= d.stored_depth else d.stored_depth, {})
            order.append([src.get(v) or incoming_edges(d, k, v) for v in range(d.n(k))])
        return EdgeOrdering(d, order)

    # -- text ------------------------------------------------------------------------

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), separators=(", ", ": ")) + "\n"

    @classmethod
    def loads(cls, text: str) -> DiagramDocument:
        if not text.strip():
            raise DiagramError("n(0) must be 1: the document is empty")
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise DiagramError(f"malformed JSON: {e}") from None
        return cls.from_dict(obj)


def load(path: str | Path) -> tuple[DiagramDocument, str]:
    """Parse a document file; also return the sha256 of its bytes."""
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise DiagramError("document is not UTF-8 text") from None
    return DiagramDocument.loads(text), hashlib.sha256(raw).hexdigest()


def save(doc: DiagramDocument, path: str | Path) -> None:
    Path(path).write_text(doc.dumps(), encoding="utf-8")


def jsonable(x: Any) -> Any:
    """Make reports JSON-safe: big ints and fractions become strings, tuples become lists."""
    if isinstance(x, bool) or x is None or isinstance(x, (str, float)):
        return x
    if isinstance(x, int):
        return str(x) if abs(x) >= SAFE_INT else x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        return [jsonable(v) for v in x]
    if hasattr(x, "to_dict"):
        return jsonable(x.to_dict())
    if hasattr(x, "item"):  # numpy scalars
        return jsonable(x.item())
    raise TypeError(f"cannot serialize {type(x).__name__}")


def export_dot(ordering: EdgeOrdering, depth: int | None = None) -> str:
    """Levels drawn top-down; one DOT edge per bundle, labelled with its multiplicity.

    Each bundle carries the order positions (1-based) of its edges.
    """
    d = ordering.diagram
    depth = ordering.depth if depth is None else depth
    lines = ["digraph bratteli {", "  rankdir=TB;", "  node [shape=circle];"]
    for k in range(0, depth + 1):
        names = " ".join(f'"{k}.{v + 1}"' for v in range(d.n(k)))
        lines.append(f"  {{ rank=same; {names} }}")
    for k in range(1, depth + 1):
        m = d.matrix(k)
        for v in range(d.n(k)):
            for s in range(d.n(k - 1)):
                mult = m[v][s]
                if not mult:
                    continue
                pos = ",".join(str(ordering.rank(k, v, (s, c)) + 1) for c in range(mult))
                lines.append(f'  "{k - 1}.{s + 1}" -> "{k}.{v + 1}" [label="{mult}", order="{pos}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
