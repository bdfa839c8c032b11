"""Function call trees for Solidity units.

Builds a per-function reference tree (direct callees with counts and
defining-contract attribution), grafts it into a complete call tree with
cycle markers and a depth cap, enumerates elementary cycles, and renders
trees as Graphviz DOT (optionally PNG through an external `dot` binary).
"""

from __future__ import annotations

import logging
import shutil
import subprocess
from dataclasses import dataclass
from typing import Optional

from .parser import SourceUnit

log = logging.getLogger(__name__)

EXTERNAL = "external"

DEFAULT_MAX_DEPTH = 5


class UnknownFunction(Exception):
    """Raised when a (contract, function) pair is not present."""


@dataclass(frozen=True)
class RefEntry:
    defining_contract: str
    count: int


# contract -> function -> callee name -> RefEntry. Callee iteration order is
# the first-call-site order within the calling function's body.
RefTree = dict[str, dict[str, dict[str, RefEntry]]]


@dataclass(frozen=True)
class CallNode:
    contract: str
    function: str
    count: int
    children: tuple["CallNode", ...]
    cycle: bool = False


@dataclass(frozen=True)
class CallTree:
    root: CallNode
    max_depth: int


def _base_search_order(unit: SourceUnit, contract_name: str) -> list[str]:
    """Contract name followed by inherited contracts, direct bases first in
    declaration order, then their bases (breadth-first, deduplicated)."""
    by_name = {c.name: c for c in unit.contracts}
    order = [contract_name]
    seen = {contract_name}
    queue = list(by_name[contract_name].bases) if contract_name in by_name else []
    while queue:
        base = queue.pop(0)
        if base in seen:
            continue
        seen.add(base)
        order.append(base)
        if base in by_name:
            queue.extend(by_name[base].bases)
    return order


def resolve_defining_contract(unit: SourceUnit, caller_contract: str, callee: str) -> str:
    """Resolve a call-site name to the contract defining it: the caller's
    contract first, then inherited contracts, then any other contract or
    library in the unit, else the sentinel "external"."""
    by_name = {c.name: c for c in unit.contracts}
    searched = []
    for name in _base_search_order(unit, caller_contract):
        searched.append(name)
        c = by_name.get(name)
        if c is not None and any(f.name == callee for f in c.functions):
            return c.name
    for c in unit.contracts:
        if c.name in searched:
            continue
        if any(f.name == callee for f in c.functions):
            return c.name
    return EXTERNAL


def build_reference_tree(unit: SourceUnit) -> RefTree:
    """One entry per (contract, function, distinct callee name), counting the
    callee's call sites and recording its defining contract. Overloads share
    one function key; their callees merge."""
    ref: RefTree = {}
    for contract in unit.contracts:
        cmap = ref.setdefault(contract.name, {})
        for fn in contract.functions:
            fmap = cmap.setdefault(fn.name, {})
            for site in fn.call_sites:
                entry = fmap.get(site.callee_name)
                if entry is None:
                    defining = resolve_defining_contract(unit, contract.name, site.callee_name)
                    fmap[site.callee_name] = RefEntry(defining, 1)
                else:
                    fmap[site.callee_name] = RefEntry(entry.defining_contract, entry.count + 1)
    return ref


def graft_call_tree(ref: RefTree, contract: str, function: str,
                    max_depth: int = DEFAULT_MAX_DEPTH) -> CallTree:
    """Expand the reference tree into a complete call tree rooted at
    (contract, function). A callee whose (contract, function) pair already
    sits on the root-to-node path becomes a cycle-marker leaf; expansion
    stops at max_depth with plain leaves."""
    if contract not in ref or function not in ref[contract]:
        raise UnknownFunction(f"{contract}.{function}")

    def expand(c: str, f: str, count: int, depth: int,
               path: frozenset[tuple[str, str]]) -> CallNode:
        if (c, f) in path:
            return CallNode(c, f, count, (), cycle=True)
        children: list[CallNode] = []
        if depth < max_depth:
            callees = ref.get(c, {}).get(f)
            if callees:
                child_path = path | {(c, f)}
                for callee, entry in callees.items():
                    children.append(expand(entry.defining_contract, callee,
                                           entry.count, depth + 1, child_path))
        return CallNode(c, f, count, tuple(children))

    root = expand(contract, function, 1, 1, frozenset())
    return CallTree(root, max_depth)


def _resolved_adjacency(ref: RefTree) -> dict[tuple[str, str], list[tuple[str, str]]]:
    adj: dict[tuple[str, str], list[tuple[str, str]]] = {}
    for c, fns in ref.items():
        for f, callees in fns.items():
            edges = []
            for callee, entry in callees.items():
                target = (entry.defining_contract, callee)
                if entry.defining_contract in ref and callee in ref[entry.defining_contract]:
                    edges.append(target)
            adj[(c, f)] = edges
    return adj


def detect_cycles(ref: RefTree) -> list[list[tuple[str, str]]]:
    """Enumerate every elementary cycle of the name-resolved call relation.
    Each cycle starts at its lexicographically smallest node; the returned
    list is sorted."""
    adj = _resolved_adjacency(ref)
    nodes = sorted(adj)
    cycles: list[list[tuple[str, str]]] = []

    def dfs(start: tuple[str, str], node: tuple[str, str],
            path: list[tuple[str, str]], on_path: set[tuple[str, str]]) -> None:
        for succ in adj.get(node, ()):
            if succ == start:
                cycles.append(list(path))
            elif succ > start and succ not in on_path:
                path.append(succ)
                on_path.add(succ)
                dfs(start, succ, path, on_path)
                on_path.remove(succ)
                path.pop()

    for start in nodes:
        dfs(start, start, [start], {start})
    cycles.sort()
    return cycles


def reachable_functions(ref: RefTree, contract: str, function: str) -> set[tuple[str, str]]:
    """All (contract, function) nodes reachable from the start node in the
    resolved call relation, including the start itself."""
    adj = _resolved_adjacency(ref)
    start = (contract, function)
    seen = {start}
    queue = [start]
    while queue:
        node = queue.pop(0)
        for succ in adj.get(node, ()):
            if succ not in seen:
                seen.add(succ)
                queue.append(succ)
    return seen


def to_dot(tree: CallTree) -> str:
    """Deterministic DOT text for a call tree: one node per CallNode labeled
    `Contract.function`, edge labels only for repeated calls, dashed style on
    cycle-marker leaves."""
    lines = ["digraph calltree {", "  node [shape=box];"]
    node_lines: list[str] = []
    edges: list[tuple[int, int, int]] = []
    counter = [0]

    def visit(node: CallNode) -> int:
        nid = counter[0]
        counter[0] += 1
        label = f"{node.contract}.{node.function}".replace('"', r'\"')
        style = ", style=dashed" if node.cycle else ""
        node_lines.append(f'  n{nid} [label="{label}"{style}];')
        for child in node.children:
            edges.append((nid, visit(child), child.count))
        return nid

    visit(tree.root)
    lines.extend(node_lines)
    for parent, child, count in sorted(edges):
        attr = f' [label="×{count}"]' if count > 1 else ""
        lines.append(f"  n{parent} -> n{child}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_png(dot_text: str, out_path: str) -> Optional[str]:
    """Render DOT text to PNG via the `dot` binary when present on PATH.
    Returns the output path, or None with a warning if the renderer is
    missing or fails."""
    exe = shutil.which("dot")
    if exe is None:
        log.warning("graphviz 'dot' not found on PATH; skipping PNG render")
        return None
    proc = subprocess.run([exe, "-Tpng", "-o", out_path],
                          input=dot_text.encode("utf-8"),
                          capture_output=True)
    if proc.returncode != 0:
        log.warning("dot failed (%d): %s", proc.returncode,
                    proc.stderr.decode("utf-8", "replace").strip())
        return None
    return out_path


def node_to_dict(node: CallNode) -> dict:
    return {
        "contract": node.contract,
        "function": node.function,
        "count": node.count,
        "cycle": node.cycle,
        "children": [node_to_dict(c) for c in node.children],
    }


def node_from_dict(d: dict) -> CallNode:
    return CallNode(
        contract=d["contract"],
        function=d["function"],
        count=d["count"],
        children=tuple(node_from_dict(c) for c in d["children"]),
        cycle=d["cycle"],
    )


def tree_to_dict(tree: CallTree) -> dict:
    return {"max_depth": tree.max_depth, "root": node_to_dict(tree.root)}


def tree_from_dict(d: dict) -> CallTree:
    return CallTree(node_from_dict(d["root"]), d["max_depth"])
