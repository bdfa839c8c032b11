"""Semantic facts for a target function: contract name, global member
variables, identifier roles, inner functions, and the call tree."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .callgraph import (
    EXTERNAL,
    CallTree,
    RefTree,
    UnknownFunction,
    _base_search_order,
    detect_cycles,
    graft_call_tree,
    reachable_functions,
    tree_from_dict,
    tree_to_dict,
)
from .parser import ContractDecl, FunctionDecl, SourceUnit

_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")


@dataclass(frozen=True)
class IdentifierFact:
    name: str
    role: str  # parameter | local_variable | modifier | function_name | state_variable_ref
    type_name: Optional[str] = None


@dataclass(frozen=True)
class InnerFunction:
    contract: str
    name: str
    body_text: str
    depth: int


@dataclass(frozen=True)
class SemanticFacts:
    contract_name: str
    global_vars: tuple[tuple[str, str, str], ...]  # (name, type, visibility)
    identifiers: tuple[IdentifierFact, ...]
    inner_functions: tuple[InnerFunction, ...]
    call_tree: CallTree
    cycles: tuple[tuple[tuple[str, str], ...], ...]


def extract_identifiers(fn: FunctionDecl) -> list[IdentifierFact]:
    """One fact per parameter, declared local, attached modifier, and the
    function's own name. Unnamed declarations normalize to "fallback";
    duplicates by (name, role) are dropped."""
    facts: list[IdentifierFact] = [IdentifierFact(fn.name or "fallback", "function_name")]
    for name, type_name in fn.params:
        if name:
            facts.append(IdentifierFact(name, "parameter", type_name))
    for mod in fn.modifiers:
        facts.append(IdentifierFact(mod, "modifier"))
    for name, type_name in fn.local_vars:
        facts.append(IdentifierFact(name, "local_variable", type_name))
    seen: set[tuple[str, str]] = set()
    out = []
    for fact in facts:
        key = (fact.name, fact.role)
        if key not in seen:
            seen.add(key)
            out.append(fact)
    return out


def _find_contract(unit: SourceUnit, name: str) -> ContractDecl:
    for c in unit.contracts:
        if c.name == name:
            return c
    raise UnknownFunction(f"no contract named {name}")


def _find_function(unit: SourceUnit, contract: str, function: str) -> FunctionDecl:
    c = _find_contract(unit, contract)
    for fn in c.functions:
        if fn.name == function:
            return fn
    raise UnknownFunction(f"{contract}.{function}")


def _flattened_globals(unit: SourceUnit, contract: str) -> list[tuple[str, str, str]]:
    by_name = {c.name: c for c in unit.contracts}
    out: list[tuple[str, str, str]] = []
    seen: set[str] = set()
    for cname in _base_search_order(unit, contract):
        c = by_name.get(cname)
        if c is None:
            continue
        for var in c.state_vars:
            if var.name not in seen:
                seen.add(var.name)
                out.append((var.name, var.type_name, var.visibility))
    return out


def collect_facts(unit: SourceUnit, ref: RefTree, contract: str, function: str,
                  max_depth: int = 5) -> SemanticFacts:
    """Assemble every fact category for one target function. Inner functions
    are the resolvable bodies reachable from the target, ordered breadth
    first (distance from the target, then call-site order)."""
    fn = _find_function(unit, contract, function)
    tree = graft_call_tree(ref, contract, function, max_depth)

    identifiers = extract_identifiers(fn)
    globals_ = _flattened_globals(unit, contract)
    body_idents = set(_IDENT_RE.findall(fn.body_text))
    for name, type_name, _vis in globals_:
        if name in body_idents:
            identifiers.append(IdentifierFact(name, "state_variable_ref", type_name))

    inner: list[InnerFunction] = []
    seen_fns = {(contract, function)}
    queue: list[tuple[int, tuple]] = [(0, tree.root)]
    while queue:
        depth, node = queue.pop(0)
        for child in node.children:
            key = (child.contract, child.function)
            if key not in seen_fns and child.contract != EXTERNAL:
                seen_fns.add(key)
                try:
                    decl = _find_function(unit, child.contract, child.function)
                except UnknownFunction:
                    decl = None
                if decl is not None:
                    inner.append(InnerFunction(child.contract, child.function,
                                               decl.body_text, depth + 1))
            queue.append((depth + 1, child))

    reachable = reachable_functions(ref, contract, function)
    cycles = tuple(
        tuple(cycle) for cycle in detect_cycles(ref)
        if all(node in reachable for node in cycle)
    )

    return SemanticFacts(
        contract_name=contract,
        global_vars=tuple(globals_),
        identifiers=tuple(identifiers),
        inner_functions=tuple(inner),
        call_tree=tree,
        cycles=cycles,
    )


def facts_to_dict(facts: SemanticFacts) -> dict:
    return {
        "contract_name": facts.contract_name,
        "global_vars": [list(v) for v in facts.global_vars],
        "identifiers": [
            {"name": f.name, "role": f.role, "type_name": f.type_name}
            for f in facts.identifiers
        ],
        "inner_functions": [
            {"contract": f.contract, "name": f.name, "body_text": f.body_text,
             "depth": f.depth}
            for f in facts.inner_functions
        ],
        "call_tree": tree_to_dict(facts.call_tree),
        "cycles": [[list(node) for node in cycle] for cycle in facts.cycles],
    }


def facts_from_dict(d: dict) -> SemanticFacts:
    return SemanticFacts(
        contract_name=d["contract_name"],
        global_vars=tuple(tuple(v) for v in d["global_vars"]),
        identifiers=tuple(
            IdentifierFact(f["name"], f["role"], f["type_name"]) for f in d["identifiers"]
        ),
        inner_functions=tuple(
            InnerFunction(f["contract"], f["name"], f["body_text"], f["depth"])
            for f in d["inner_functions"]
        ),
        call_tree=tree_from_dict(d["call_tree"]),
        cycles=tuple(tuple(tuple(node) for node in cycle) for cycle in d["cycles"]),
    )
