"""FE model description: nodes, elements, restraints, file format and dof numbering.

Models are 2D. Every node carries three local dofs ``ux, uy, rz``; restrained
dofs are removed from the global numbering rather than penalised.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any, Mapping

import numpy as np

LOCAL_DOFS = ("ux", "uy", "rz")
RESTRAINED = -1

ELEMENT_PROPS = {
    "spring": ("k",),
    "bar": ("ea",),
    "beam2d": ("ea", "ei"),
}

# local dof names gathered into m_e, per element kind
ELEMENT_DOFS = {
    "spring": ("ux", "uy"),
    "bar": ("ux", "uy"),
    "beam2d": ("ux", "uy", "rz"),
}


class ModelError(ValueError):
    """Invalid model document or model contents.

    ``line``/``column`` are set for syntax errors in a model document.
    """

    def __init__(self, msg: str, line: int | None = None, column: int | None = None):
        if line is not None:
            msg = f"{msg} (line {line}, column {column})"
        super().__init__(msg)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Node:
    id: int
    x: float
    y: float


@dataclass(frozen=True)
class Element:
    id: int
    kind: str
    nodes: tuple[int, int]
    props: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "props", dict(self.props))

    def __hash__(self):
        return hash((self.id, self.kind, self.nodes, tuple(sorted(self.props.items()))))

    def scaled(self, factor: float) -> "Element":
        """Copy with every stiffness property multiplied by ``factor``."""
        return Element(self.id, self.kind, self.nodes,
                       {k: v * factor for k, v in self.props.items()})


@dataclass(frozen=True)
class Restraint:
    node: int
    fixed: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "fixed", tuple(self.fixed))


@dataclass(frozen=True)
class Model:
    nodes: tuple[Node, ...]
    elements: tuple[Element, ...]
    restraints: tuple[Restraint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "restraints", tuple(self.restraints))
        validate_model(self)

    def node(self, node_id: int) -> Node:
        for nd in self.nodes:
            if nd.id == node_id:
                return nd
        raise KeyError(node_id)

    def coordinates(self) -> dict[int, tuple[float, float]]:
        return {nd.id: (nd.x, nd.y) for nd in self.nodes}

    def element_length(self, element: Element) -> float:
        (xa, ya), (xb, yb) = (self.coordinates()[n] for n in element.nodes)
        return math.hypot(xb - xa, yb - ya)

    def sorted_elements(self) -> list[Element]:
        return sorted(self.elements, key=lambda e: e.id)

    def with_elements(self, elements) -> "Model":
        return Model(self.nodes, tuple(elements), self.restraints)

    def scaled(self, factor: float, element_ids=None) -> "Model":
        """Scale stiffness of the given elements (all elements when None)."""
        els = [e.scaled(factor) if element_ids is None or e.id in element_ids else e
               for e in self.elements]
        return self.with_elements(els)

    def unrestrained(self) -> "Model":
        return Model(self.nodes, self.elements, ())


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_number(v) -> bool:
    return (isinstance(v, (int, float)) and not isinstance(v, bool)
            and math.isfinite(v))


def validate_model(model: Model) -> None:
    """Raise :class:`ModelError` unless ``model`` is referentially and physically valid."""
    coords = {}
    for nd in model.nodes:
        if not _is_int(nd.id) or nd.id <= 0:
            raise ModelError(f"node id must be a positive integer, got {nd.id!r}")
        if nd.id in coords:
            raise ModelError(f"duplicate node id {nd.id}")
        if not (_is_number(nd.x) and _is_number(nd.y)):
            raise ModelError(f"node {nd.id}: coordinates must be finite numbers")
        coords[nd.id] = (nd.x, nd.y)

    if not model.elements:
        raise ModelError("model has no elements")
    seen = set()
    for el in model.elements:
        if not _is_int(el.id) or el.id <= 0:
            raise ModelError(f"element id must be a positive integer, got {el.id!r}")
        if el.id in seen:
            raise ModelError(f"duplicate element id {el.id}")
        seen.add(el.id)
        if el.kind not in ELEMENT_PROPS:
            raise ModelError(f"element {el.id}: unknown element kind {el.kind!r}")
        if len(el.nodes) != 2:
            raise ModelError(f"element {el.id}: expected exactly two nodes")
        a, b = el.nodes
        for n in (a, b):
            if n not in coords:
                raise ModelError(f"element {el.id}: dangling reference to node {n!r}")
        if a == b:
            raise ModelError(f"element {el.id}: node ids must be distinct")
        expected = set(ELEMENT_PROPS[el.kind])
        if set(el.props) != expected:
            raise ModelError(
                f"element {el.id}: {el.kind} requires props {sorted(expected)}, "
                f"got {sorted(el.props)}")
        for key, val in el.props.items():
            if not _is_number(val):
                raise ModelError(f"element {el.id}: prop {key} must be a finite number")
            if val < 0:
                raise ModelError(f"element {el.id}: negative stiffness {key}={val}")
        (xa, ya), (xb, yb) = coords[a], coords[b]
        if not math.hypot(xb - xa, yb - ya) > 0:
            raise ModelError(f"element {el.id}: non-positive length")

    restrained_nodes = set()
    for r in model.restraints:
        if r.node not in coords:
            raise ModelError(f"restraint references missing node {r.node!r}")
        if r.node in restrained_nodes:
            raise ModelError(f"duplicate restraint for node {r.node}")
        restrained_nodes.add(r.node)
        if not r.fixed:
            raise ModelError(f"restraint on node {r.node}: empty fixed set")
        for d in r.fixed:
            if d not in LOCAL_DOFS:
                raise ModelError(f"restraint on node {r.node}: unknown dof {d!r}")
        if len(set(r.fixed)) != len(r.fixed):
            raise ModelError(f"restraint on node {r.node}: repeated dof")


# ---------------------------------------------------------------------------
# file format
# ---------------------------------------------------------------------------

def _reject_constant(name):
    raise ValueError(f"non-finite number {name} not allowed")


def _check_keys(obj: Any, allowed: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise ModelError(f"{where}: expected an object")
    extra = set(obj) - allowed
    missing = allowed - set(obj)
    if extra:
        raise ModelError(f"{where}: unknown key(s) {sorted(extra)}")
    if missing:
        raise ModelError(f"{where}: missing key(s) {sorted(missing)}")


def parse_model(text: str | bytes) -> Model:
    """Parse a model document into a validated :class:`Model`."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ModelError(f"document is not valid UTF-8: {exc}") from None
    try:
        doc = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ModelError(f"syntax error: {exc.msg}", exc.lineno, exc.colno) from None
    except ValueError as exc:
        raise ModelError(f"syntax error: {exc}") from None

    _check_keys(doc, {"nodes", "elements", "restraints"}, "document")
    for key in ("nodes", "elements", "restraints"):
        if not isinstance(doc[key], list):
            raise ModelError(f"{key}: expected a list")

    nodes = []
    for i, nd in enumerate(doc["nodes"]):
        _check_keys(nd, {"id", "x", "y"}, f"nodes[{i}]")
        nodes.append(Node(nd["id"], nd["x"], nd["y"]))

    elements = []
    for i, el in enumerate(doc["elements"]):
        _check_keys(el, {"id", "kind", "nodes", "props"}, f"elements[{i}]")
        if not isinstance(el["nodes"], list):
            raise ModelError(f"elements[{i}].nodes: expected a list")
        if not isinstance(el["props"], dict):
            raise ModelError(f"elements[{i}].props: expected an object")
        if el["kind"] in ELEMENT_PROPS:
            _check_keys(el["props"], set(ELEMENT_PROPS[el["kind"]]), f"elements[{i}].props")
        elements.append(Element(el["id"], el["kind"], tuple(el["nodes"]), el["props"]))

    restraints = []
    for i, r in enumerate(doc["restraints"]):
        _check_keys(r, {"node", "fixed"}, f"restraints[{i}]")
        if not isinstance(r["fixed"], list):
            raise ModelError(f"restraints[{i}].fixed: expected a list")
        restraints.append(Restraint(r["node"], tuple(r["fixed"])))

    return Model(tuple(nodes), tuple(elements), tuple(restraints))


def model_to_dict(model: Model) -> dict:
    return {
        "nodes": [{"id": n.id, "x": n.x, "y": n.y} for n in model.nodes],
        "elements": [
            {"id": e.id, "kind": e.kind, "nodes": list(e.nodes),
             "props": {k: e.props[k] for k in ELEMENT_PROPS[e.kind]}}
            for e in model.elements
        ],
        "restraints": [
            {"node": r.node, "fixed": [d for d in LOCAL_DOFS if d in r.fixed]}
            for r in model.restraints
        ],
    }


def serialize_model(model: Model) -> str:
    """Canonical model document; ``parse_model`` inverts it exactly."""
    return json.dumps(model_to_dict(model), indent=2) + "\n"


# ---------------------------------------------------------------------------
# dof numbering
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DofMap:
    """Global numbering of the free dofs.

    ``node_dofs[node_id]`` holds the global index of ``(ux, uy, rz)`` or
    ``RESTRAINED``. ``element_dofs[i]`` is m_e for ``element_ids[i]``; element
    order is ascending id throughout the package.
    """

    n: int
    node_dofs: dict[int, tuple[int, int, int]]
    element_ids: tuple[int, ...]
    element_dofs: tuple[np.ndarray, ...]

    def dofs_of(self, element_id: int) -> np.ndarray:
        return self.element_dofs[self.element_ids.index(element_id)]

    def global_index(self, node_id: int, dof: str) -> int:
        return self.node_dofs[node_id][LOCAL_DOFS.index(dof)]

    def incidence_counts(self) -> np.ndarray:
        """Number of elements whose m_e contains each free dof."""
        c = np.zeros(self.n, dtype=int)
        for m in self.element_dofs:
            free = m[m != RESTRAINED]
            np.add.at(c, free, 1)
        return c

    def dof_labels(self) -> list[str]:
        labels = [""] * self.n
        for nid, idx in self.node_dofs.items():
            for name, g in zip(LOCAL_DOFS, idx):
                if g != RESTRAINED:
                    labels[g] = f"{nid}:{name}"
        return labels


def build_dof_map(model: Model) -> DofMap:
    """Number free dofs by (node id, ux < uy < rz) and collect each element's m_e."""
    fixed = {r.node: set(r.fixed) for r in model.restraints}
    node_dofs = {}
    n = 0
    for nd in sorted(model.nodes, key=lambda nd: nd.id):
        idx = []
        for d in LOCAL_DOFS:
            if d in fixed.get(nd.id, ()):
                idx.append(RESTRAINED)
            else:
                idx.append(n)
                n += 1
        node_dofs[nd.id] = tuple(idx)

    ids, dofs = [], []
    for el in model.sorted_elements():
        picks = [LOCAL_DOFS.index(d) for d in ELEMENT_DOFS[el.kind]]
        m = [node_dofs[nid][p] for nid in el.nodes for p in picks]
        ids.append(el.id)
        dofs.append(np.array(m, dtype=int))
    return DofMap(n, node_dofs, tuple(ids), tuple(dofs))


def dof_graph_edges(dofmap: DofMap) -> set[tuple[int, int]]:
    """Edges of the dof connectivity graph: free dofs sharing an element."""
    edges = set()
    for m in dofmap.element_dofs:
        free = sorted(set(int(j) for j in m if j != RESTRAINED))
        edges.update(combinations(free, 2))
    return edges
