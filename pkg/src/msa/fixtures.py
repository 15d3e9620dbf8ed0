"""Reference models used by the tests and demos.

``portal_frame`` is a restrained beam frame whose seven free dofs form the
connectivity graph of the classic weak-dof example: dof 7 is tied to the rest
of the structure only through the members (4,7) and (6,7), so scaling those two
members by a small ``eps`` makes dof 7 a weakly connected component.
"""

from __future__ import annotations

from .model import Element, Model, Node, Restraint

EA = 1000.0
EI = 100.0

# node id -> (x, y); geometry of a small two-bay frame with a hanging joint 7
_COORDS = {
    1: (0.0, 4.0),
    2: (8.0, 4.0),
    3: (4.0, 4.0),
    4: (0.0, 0.0),
    6: (4.0, 0.0),
    7: (2.0, -2.0),
}

# element id -> (node a, node b)
_MEMBERS = {
    1: (1, 3),
    2: (1, 4),
    3: (3, 2),
    4: (3, 6),
    5: (2, 6),
    6: (4, 6),
    7: (4, 7),
    8: (6, 7),
}

# node 2 translates freely; every other node only rotates
_FIXED = {
    1: ("ux", "uy"),
    2: ("rz",),
    3: ("ux", "uy"),
    4: ("ux", "uy"),
    6: ("ux", "uy"),
    7: ("ux", "uy"),
}

# figure dof label -> (node id, local dof)
FIGURE_DOFS = {
    1: (1, "rz"),
    2: (2, "ux"),
    3: (3, "rz"),
    4: (4, "rz"),
    5: (2, "uy"),
    6: (6, "rz"),
    7: (7, "rz"),
}

# edges of the dof connectivity graph, in figure labels
FIGURE_EDGES = frozenset({
    (4, 6), (6, 7), (2, 6), (3, 6), (5, 6),
    (2, 3), (3, 5), (2, 5), (1, 4), (1, 3), (4, 7),
})

# members carrying dof 7's stiffness: figure edges (4,7) and (6,7)
WEAK_MEMBERS = (7, 8)


def portal_frame(eps: float = 1.0, scale: float = 1.0, restrained: bool = True,
                 extra_weak: bool = False) -> Model:
    """The weak-dof frame.

    ``eps`` scales the two members joining dof 7; ``scale`` multiplies every
    stiffness. ``restrained=False`` drops all supports, leaving three rigid-body
    modes. ``extra_weak`` also scales the two members at node 1 by ``1e-8``,
    detaching dof 1 as a second weak dof.
    """
    nodes = [Node(i, x, y) for i, (x, y) in sorted(_COORDS.items())]
    elements = []
    for eid, (a, b) in _MEMBERS.items():
        f = scale
        if eid in WEAK_MEMBERS:
            f *= eps
        if extra_weak and eid in (1, 2):
            f *= 1e-8
        elements.append(Element(eid, "beam2d", (a, b), {"ea": EA * f, "ei": EI * f}))
    restraints = [Restraint(n, d) for n, d in sorted(_FIXED.items())] if restrained else []
    return Model(tuple(nodes), tuple(elements), tuple(restraints))


def figure_dof_index(dofmap, label: int) -> int:
    """Global index of a figure dof label in ``dofmap``."""
    node, dof = FIGURE_DOFS[label]
    return dofmap.global_index(node, dof)


def unrestrained_portal() -> Model:
    """Three-member portal frame with no supports."""
    nodes = [Node(1, 0.0, 0.0), Node(2, 0.0, 3.0), Node(3, 4.0, 3.0), Node(4, 4.0, 0.0)]
    props = {"ea": EA, "ei": EI}
    elements = [Element(1, "beam2d", (1, 2), props),
                Element(2, "beam2d", (2, 3), props),
                Element(3, "beam2d", (3, 4), props)]
    return Model(tuple(nodes), tuple(elements), ())


def spring_pair(k: float = 1000.0) -> Model:
    """Two nodes one unit apart joined by a spring, node 1 fully fixed."""
    return Model(
        (Node(1, 0.0, 0.0), Node(2, 1.0, 0.0)),
        (Element(1, "spring", (1, 2), {"k": k}),),
        (Restraint(1, ("ux", "uy", "rz")),),
    )
