"""Independent phase-coordinate fault solver used as a numerical oracle.

The main pipeline decomposes faults into sequence networks, solves each
sequence with boundary conditions at the fault point, and superposes. This
module solves the same element list a completely different way: every
element's three-phase admittance block is built by similarity transform

    Y_abc = A diag(y0, y1, y2) A^-1

with A the mode synthesis matrix (columns: zero, positive, negative;
inverted numerically), and the fault is stamped literally as phase-domain
branches: a bolted connection merges unknowns, a resistive one stamps a
conductance. One complex nodal solve covers the whole unbalanced system at
once. No sequence decomposition, no superposition, no boundary formulas.
Agreement between the two routes to 1e-8 is therefore evidence, not
tautology.

Scope: sources must be Norton-representable (nonzero impedance in every
sequence they span) or replaced by equivalent current injections; the
converter's frozen operating states already fit that form. A node whose
zero mode touches nothing (delta-side terminals) gets a reference zero-mode
tie to ground; no physical zero-sequence current can reach such a node, so
the tie carries none and merely pins the otherwise indeterminate common
mode at zero, matching the sequence-side convention.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .network import (
    GROUND,
    FaultCategory,
    FaultSpec,
    InjectionElement,
    NetworkModel,
    RelayTap,
    SeriesElement,
    SingularNetworkError,
    SourceElement,
)
from .phasors import PhaseTriple

__all__ = ["OracleUnsupportedError", "AbcSolution", "solve_abc", "thevenin_probe_abc"]

PHASES = ("a", "b", "c")
_STAR = ("_fault_star", "s")  # single scalar node for the three-phase star point
_GROUND_KEY = (GROUND, "*")

# mode synthesis matrix: columns are (zero, positive, negative) unit sets
_W = cmath.exp(2j * math.pi / 3.0)
A_MATRIX = np.array(
    [
        [1.0, 1.0, 1.0],
        [1.0, _W**2, _W],
        [1.0, _W, _W**2],
    ],
    dtype=complex,
)
A_INV = np.linalg.inv(A_MATRIX)


class OracleUnsupportedError(ValueError):
    """The element list contains something the phase solver cannot stamp."""


def _block(z1: complex | None, z2: complex | None, z0: complex | None) -> np.ndarray:
    """Three-phase admittance block of a symmetric element."""

    def y(z: complex | None) -> complex:
        if z is None:
            return 0j
        if z == 0:
            raise OracleUnsupportedError(
                "zero-impedance branch cannot be stamped as an admittance; "
                "replace the pinned source with its injection equivalent"
            )
        return 1.0 / z

    return A_MATRIX @ np.diag([y(z0), y(z1), y(z2)]) @ A_INV


_Y_ZERO_REF = A_MATRIX @ np.diag([1.0 + 0j, 0j, 0j]) @ A_INV  # unit zero-mode tie


class _Merge:
    """Union-find over phase-node keys with a grounded sentinel root."""

    def __init__(self) -> None:
        self._parent: dict[tuple[str, str], tuple[str, str]] = {}

    def find(self, key: tuple[str, str]) -> tuple[str, str]:
        root = key
        while self._parent.get(root, root) != root:
            root = self._parent[root]
        while self._parent.get(key, key) != key:
            self._parent[key], key = root, self._parent[key]
        return root

    def union(self, a: tuple[str, str], b: tuple[str, str]) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if ra == _GROUND_KEY:  # keep the ground root canonical
            self._parent[rb] = ra
        else:
            self._parent[ra] = rb

    def ground(self, key: tuple[str, str]) -> None:
        self.union(key, _GROUND_KEY)


@dataclass(frozen=True)
class AbcSolution:
    """Phase-domain nodal solution over the full unbalanced network."""

    v_phase: dict[str, PhaseTriple]
    _net: NetworkModel

    def voltage(self, node: str) -> PhaseTriple:
        if node == GROUND:
            return PhaseTriple(0j, 0j, 0j)
        return self.v_phase[node]

    def _v_vec(self, node: str) -> np.ndarray:
        v = self.voltage(node)
        return np.array([v.a, v.b, v.c])

    def series_current(self, eid: str) -> PhaseTriple:
        """Phase currents through a series element, from -> to."""
        elem = self._series(eid)
        blk = _block(elem.z1, elem.z2, elem.z0)
        i = blk @ (self._v_vec(elem.n_from) - self._v_vec(elem.n_to))
        return PhaseTriple(i[0], i[1], i[2])

    def source_current(self, eid: str) -> PhaseTriple:
        """Phase currents a Norton source delivers into its node."""
        for elem in self._net.elements:
            if isinstance(elem, SourceElement) and elem.eid == eid:
                blk = _block(elem.z1, elem.z2, elem.z0)
                e_abc = A_MATRIX @ np.array([0j, elem.e1, 0j])
                i = blk @ (e_abc - self._v_vec(elem.node))
                return PhaseTriple(i[0], i[1], i[2])
        raise KeyError(f"no source element {eid!r}")

    def reading(self, tap: RelayTap) -> tuple[PhaseTriple, PhaseTriple]:
        """(bus phase voltages, phase currents in the tap's direction)."""
        i = self.series_current(tap.eid)
        if tap.sign < 0:
            i = i.scaled(-1.0)
        return self.voltage(tap.bus), i

    def _series(self, eid: str) -> SeriesElement:
        for elem in self._net.elements:
            if isinstance(elem, SeriesElement) and elem.eid == eid:
                return elem
        raise KeyError(f"no series element {eid!r}")


def _fault_stamps(
    spec: FaultSpec, fault_node: str, r_pu: float, merge: _Merge
) -> list[tuple[tuple[str, str], tuple[str, str] | None, complex]]:
    """Phase-domain branches realizing the fault; merges applied in place.

    Returns (key, other_key_or_None_for_ground, admittance) scalar stamps
    for the resistive cases; bolted cases only mutate the merge structure.
    """
    keys = [(fault_node, p) for p in spec.fault_type.phases]
    stamps: list[tuple[tuple[str, str], tuple[str, str] | None, complex]] = []
    cat = spec.fault_type.category

    if cat is FaultCategory.SLG:
        (key,) = keys
        if r_pu == 0.0:
            merge.ground(key)
        else:
            stamps.append((key, None, 1.0 / r_pu))
    elif cat is FaultCategory.LL:
        k1, k2 = keys
        if r_pu == 0.0:
            merge.union(k1, k2)
        else:
            stamps.append((k1, k2, 1.0 / r_pu))
    elif cat is FaultCategory.LLG:
        k1, k2 = keys
        merge.union(k1, k2)  # phase bridge is bolted; r sits in the ground leg
        if r_pu == 0.0:
            merge.ground(k1)
        else:
            stamps.append((k1, None, 1.0 / r_pu))
    else:  # symmetrical: bolted merge, or per-phase r into a floating star
        if r_pu == 0.0:
            merge.union(keys[0], keys[1])
            merge.union(keys[1], keys[2])
        else:
            for key in keys:
                stamps.append((key, _STAR, 1.0 / r_pu))
    return stamps


def _zero_floating_nodes(net: NetworkModel, exclude: set[str]) -> set[str]:
    """Nodes with no zero-sequence path through any element."""
    touched: set[str] = set()
    for elem in net.elements:
        if isinstance(elem, SeriesElement) and elem.z0 is not None:
            touched.update((elem.n_from, elem.n_to))
        elif isinstance(elem, SourceElement) and elem.z0 is not None:
            touched.add(elem.node)
    return set(net.nodes()) - touched - exclude


def solve_abc(
    net: NetworkModel,
    spec: FaultSpec | None = None,
    zero_sources: bool = False,
    probe: tuple[str, int] | None = None,
) -> AbcSolution:
    """Full phase-coordinate nodal solve of the (possibly faulted) network.

    The fault node must already exist in the element topology (the builders
    split the host branch); spec then decides which phase branches to stamp
    there. spec=None solves the healthy network. probe=(node, seq) injects a
    unit current set of the given sequence, used for the Thevenin
    cross-check. Pinned (zero-impedance) sources are rejected; freeze them
    to injection equivalents first.
    """
    merge = _Merge()
    stamps: list[tuple[tuple[str, str], tuple[str, str] | None, complex]] = []
    if spec is not None:
        if not net.fault_node:
            raise OracleUnsupportedError("network has no fault node to stamp")
        r_pu = spec.r_g_ohm / net.z_base_fault_ohm
        stamps = _fault_stamps(spec, net.fault_node, r_pu, merge)

    # never reference-tie the fault node: fault stamps may legitimately
    # couple or ground its zero mode
    exclude = {net.fault_node} if spec is not None else set()
    reference_nodes = _zero_floating_nodes(net, exclude)

    keys = [(n, p) for n in net.nodes() for p in PHASES]
    if any(other == _STAR for _, other, _ in stamps):
        keys.append(_STAR)
    index: dict[tuple[str, str], int] = {}
    for key in keys:
        root = merge.find(key)
        if root == _GROUND_KEY or root in index:
            continue
        index[root] = len(index)
    n_unknowns = len(index)
    if n_unknowns == 0:
        raise SingularNetworkError("phase network has no unknowns")

    amat = np.zeros((n_unknowns, n_unknowns), dtype=complex)
    rhs = np.zeros(n_unknowns, dtype=complex)

    def idx(key: tuple[str, str]) -> int | None:
        root = merge.find(key)
        return None if root == _GROUND_KEY else index[root]

    def add(row: tuple[str, str], col: tuple[str, str], val: complex) -> None:
        ri, ci = idx(row), idx(col)
        if ri is not None and ci is not None:
            amat[ri, ci] += val

    def add_rhs(key: tuple[str, str], val: complex) -> None:
        ki = idx(key)
        if ki is not None:
            rhs[ki] += val

    def stamp_block(nf: str, nt: str, blk: np.ndarray) -> None:
        for pi, p in enumerate(PHASES):
            for qi, q in enumerate(PHASES):
                y = blk[pi, qi]
                if y == 0:
                    continue
                if nf != GROUND:
                    add((nf, p), (nf, q), y)
                    if nt != GROUND:
                        add((nf, p), (nt, q), -y)
                if nt != GROUND:
                    add((nt, p), (nt, q), y)
                    if nf != GROUND:
                        add((nt, p), (nf, q), -y)

    for elem in net.elements:
        if isinstance(elem, SeriesElement):
            stamp_block(elem.n_from, elem.n_to, _block(elem.z1, elem.z2, elem.z0))
        elif isinstance(elem, SourceElement):
            blk = _block(elem.z1, elem.z2, elem.z0)
            stamp_block(elem.node, GROUND, blk)
            if not zero_sources:
                j = blk @ (A_MATRIX @ np.array([0j, elem.e1, 0j]))
                for pi, p in enumerate(PHASES):
                    add_rhs((elem.node, p), j[pi])
        elif isinstance(elem, InjectionElement):
            if zero_sources:
                continue
            j = A_MATRIX @ np.array([0j, elem.i1, elem.i2])
            for pi, p in enumerate(PHASES):
                add_rhs((elem.node, p), j[pi])
        else:
            raise OracleUnsupportedError(f"cannot stamp element type {type(elem).__name__}")

    for node in reference_nodes:
        stamp_block(node, GROUND, _Y_ZERO_REF)

    for key, other, y in stamps:
        add(key, key, y)
        if other is not None:
            add(other, other, y)
            add(key, other, -y)
            add(other, key, -y)

    if probe is not None:
        node, seq = probe
        unit = {1: [0j, 1.0 + 0j, 0j], 2: [0j, 0j, 1.0 + 0j], 0: [1.0 + 0j, 0j, 0j]}[seq]
        j = A_MATRIX @ np.array(unit)
        for pi, p in enumerate(PHASES):
            add_rhs((node, p), j[pi])

    try:
        solution = np.linalg.solve(amat, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularNetworkError(f"phase-domain system is singular: {exc}") from exc
    if not np.all(np.isfinite(solution)):
        raise SingularNetworkError("phase-domain solve produced non-finite voltages")

    def v_of(key: tuple[str, str]) -> complex:
        ki = idx(key)
        return 0j if ki is None else complex(solution[ki])

    v_phase = {
        node: PhaseTriple(v_of((node, "a")), v_of((node, "b")), v_of((node, "c")))
        for node in net.nodes()
    }
    return AbcSolution(v_phase=v_phase, _net=net)


def thevenin_probe_abc(net: NetworkModel, seq: int) -> complex:
    """Driving-point sequence impedance at the fault node.

    Unit current set of the requested sequence injected with all sources
    dead; the fault node's same-sequence voltage component is the impedance.
    Computed wholly in phase coordinates as a cross-check of the
    sequence-side Thevenin reduction.
    """
    sol = solve_abc(net, spec=None, zero_sources=True, probe=(net.fault_node, seq))
    v = sol.voltage(net.fault_node)
    return {
        0: (v.a + v.b + v.c) / 3.0,
        1: (v.a + _W * v.b + _W**2 * v.c) / 3.0,
        2: (v.a + _W**2 * v.b + _W * v.c) / 3.0,
    }[seq]
