"""Independent reference implementations used only as test oracles.

Each oracle re-derives its answer from first principles (explicit loops,
full DP tables, exhaustive extraction) without calling into the production
code paths it checks.
"""

from __future__ import annotations

import math
import re


# -- BLEU-4: brute-force n-gram counting -------------------------------------

def bleu4_oracle(cand: list[str], ref: list[str]) -> float:
    if len(cand) == 0 or len(ref) == 0:
        return 0.0
    logs = 0.0
    for n in (1, 2, 3, 4):
        cand_counts: dict[tuple, int] = {}
        for i in range(len(cand) - n + 1):
            g = tuple(cand[i:i + n])
            cand_counts[g] = cand_counts.get(g, 0) + 1
        ref_counts: dict[tuple, int] = {}
        for i in range(len(ref) - n + 1):
            g = tuple(ref[i:i + n])
            ref_counts[g] = ref_counts.get(g, 0) + 1
        total = max(len(cand) - n + 1, 0)
        matched = 0
        for g, c in cand_counts.items():
            r = ref_counts.get(g, 0)
            matched += c if c < r else r
        if n == 1:
            if matched == 0:
                return 0.0
            p = matched / total
        elif matched == 0:
            p = (matched + 1) / (total + 1)
        else:
            p = matched / total
        logs += math.log(p)
    geo = math.exp(logs / 4)
    bp = 1.0 if len(cand) >= len(ref) else math.exp(1 - len(ref) / len(cand))
    return 100.0 * geo * bp


# -- LCS: full quadratic table ------------------------------------------------

def lcs_oracle(a: list[str], b: list[str]) -> int:
    rows = len(a) + 1
    cols = len(b) + 1
    table = [[0] * cols for _ in range(rows)]
    for i in range(1, rows):
        for j in range(1, cols):
            if a[i - 1] == b[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    return table[-1][-1]


# -- top-k: repeated maximum extraction ---------------------------------------

def _cos_oracle(a: list[float], b: list[float]) -> float:
    dot = na = nb = 0.0
    for x, y in zip(a, b):
        dot += x * y
        na += x * x
        nb += y * y
    if na == 0.0 or nb == 0.0:
        return 0.0
    if list(a) == list(b):
        return 1.0
    v = dot / math.sqrt(na * nb)
    return min(1.0, max(-1.0, v))


def topk_oracle(entries: list[tuple[str, list[float]]], query: list[float],
                k: int) -> list[tuple[str, float]]:
    remaining = [(uuid, _cos_oracle(query, vec)) for uuid, vec in entries]
    out: list[tuple[str, float]] = []
    while remaining and len(out) < k:
        best = remaining[0]
        for cand in remaining[1:]:
            if cand[1] > best[1] or (cand[1] == best[1] and cand[0] < best[0]):
                best = cand
        out.append(best)
        remaining.remove(best)
    return out


# -- call sites: token scan over raw body text --------------------------------

_CALL_ORACLE_RE = re.compile(r"([A-Za-z_$][A-Za-z0-9_$]*)\s*\(")

_ORACLE_NOT_CALLS = {
    "if", "for", "while", "do", "return", "returns", "new", "emit", "require",
    "assert", "revert", "keccak256", "sha256", "ecrecover", "selfdestruct",
    "address", "payable", "bool", "string", "bytes", "uint", "int", "function",
    "modifier", "constructor", "receive", "fallback", "type", "mapping",
} | {f"uint{n}" for n in range(8, 257, 8)} | {f"int{n}" for n in range(8, 257, 8)} \
  | {f"bytes{n}" for n in range(1, 33)}


def call_names_oracle(body_text: str, contract_names: set[str]) -> list[str]:
    """Callee names found by a flat regex scan of a body's interior, skipping
    keywords, builtins, casts, contract-name casts, and `new`/`emit` targets."""
    interior = body_text[body_text.index("{") + 1:body_text.rindex("}")]
    names = []
    for m in _CALL_ORACLE_RE.finditer(interior):
        name = m.group(1)
        if name in _ORACLE_NOT_CALLS or name in contract_names:
            continue
        before = interior[:m.start()].rstrip()
        if before.endswith("new") or before.endswith("emit"):
            continue
        prev = before[-1] if before else ""
        if prev == ".":
            root = re.findall(r"([A-Za-z_$][A-Za-z0-9_$]*)(?:\s*\.\s*[A-Za-z_$][A-Za-z0-9_$]*)*\s*\.\s*$",
                              before)
            if root and root[0] in ("abi", "msg", "block", "tx"):
                continue
        names.append(name)
    return names


# -- call tree: adjacency from the unit plus explicit DFS with a path set -----

def _oracle_resolve(unit, caller: str, callee: str) -> str:
    by_name = {c.name: c for c in unit.contracts}
    order = [caller]
    seen = {caller}
    frontier = [caller]
    while frontier:
        nxt = []
        for name in frontier:
            c = by_name.get(name)
            if c is None:
                continue
            for base in c.bases:
                if base not in seen:
                    seen.add(base)
                    order.append(base)
                    nxt.append(base)
        frontier = nxt
    for name in order:
        c = by_name.get(name)
        if c is not None and any(f.name == callee for f in c.functions):
            return name
    for c in unit.contracts:
        if c.name not in seen and any(f.name == callee for f in c.functions):
            return c.name
    return "external"


def _oracle_callees(unit, contract: str, function: str) -> list[tuple[str, int]]:
    sites = []
    for c in unit.contracts:
        if c.name != contract:
            continue
        for f in c.functions:
            if f.name == function:
                sites.extend(f.call_sites)
    sites.sort(key=lambda s: s.offset)
    order: list[str] = []
    counts: dict[str, int] = {}
    for s in sites:
        if s.callee_name not in counts:
            order.append(s.callee_name)
            counts[s.callee_name] = 0
        counts[s.callee_name] += 1
    return [(name, counts[name]) for name in order]


def call_tree_oracle(unit, contract: str, function: str, max_depth: int) -> dict:
    defined = {(c.name, f.name) for c in unit.contracts for f in c.functions}

    def expand(cname: str, fname: str, count: int, depth: int, path: frozenset) -> dict:
        node = {"contract": cname, "function": fname, "count": count,
                "cycle": False, "children": []}
        if (cname, fname) in path:
            node["cycle"] = True
            return node
        if depth >= max_depth or (cname, fname) not in defined:
            return node
        for callee, cnt in _oracle_callees(unit, cname, fname):
            target = _oracle_resolve(unit, cname, callee)
            node["children"].append(
                expand(target, callee, cnt, depth + 1, path | {(cname, fname)}))
        return node

    return expand(contract, function, 1, 1, frozenset())
