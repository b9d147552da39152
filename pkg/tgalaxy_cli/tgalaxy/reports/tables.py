"""
Human-readable tables for the CLI reports.

Each renderer takes the validated JSON form of a report and returns text built
from pandas DataFrames, so table output and `--format json` output always
describe the same document.
"""
from typing import Any, Callable, Dict, List

import pandas as pd

Report = Dict[str, Any]


def _table(rows: List[Dict[str, Any]], columns: List[str]) -> str:
    if not rows:
        return "(none)"
    return pd.DataFrame(rows, columns=columns).to_string(index=False)


def _pairs(pairs) -> str:
    return ", ".join(f"{a} < {b}" for a, b in pairs) or "(none)"


def validation_table(r: Report) -> str:
    if r["valid"]:
        return f"valid presentation of rank {r['rank']}"
    head = f"{len(r['violations'])} violation(s)"
    return head + "\n" + _table(r["violations"], ["kind", "where", "message"])


def unroll_table(r: Report) -> str:
    nodes = [{"node": n["id"], "rank": n["rank"], "aliases": " ".join(n["aliases"])} for n in r["nodes"]]
    lines = [
        f"depth {r['depth']}: {len(r['nodes'])} node(s), {len(r['branches'])} branch(es), "
        f"{len(r['tips'])} tip link(s), {len(r['embraces'])} embrace(s)",
        _table(nodes, ["node", "rank", "aliases"]),
    ]
    return "\n".join(lines)


def distance_table(r: Report, mark: Callable[[str], str] = str) -> str:
    lines = [r["distance"]]
    if r.get("oracle") is not None:
        lines.append(f"oracle {r['oracle']} {mark('pass' if r['oracle_agrees'] else 'FAIL')}")
    w = r.get("walk")
    if w:
        rows = [{"step": s, "to": n} for s, n in zip(w["steps"], w["nodes"][1:])]
        lines += [f"from {w['nodes'][0]}", _table(rows, ["step", "to"])]
    return "\n".join(lines)


def sections_table(r: Report) -> str:
    rows = []
    for s in r["sections"]:
        rows.append({
            "section": s["id"],
            "fixed": len(s["fixed"]),
            "tails": " ".join(f"{t['arm']}[{t['start']}..]" for t in s["tails"]) or "-",
            "family": s["family"]["id"] if s.get("family") else "-",
            "boundary": len(s["boundary"]) if s.get("boundary") is not None else "-",
            "locally finite": s.get("locally_finite", "-"),
        })
    return f"rank {r['rank']}: {len(rows)} section(s)\n" + _table(
        rows, ["section", "fixed", "tails", "family", "boundary", "locally finite"])


def boundary_table(r: Report) -> str:
    where = f" at copy {r['copy_index']}" if r.get("copy_index") is not None else ""
    blocks = []
    for s in r["sections"]:
        head = f"boundary {r['rank']}-wnodes of {s['section']}{where} ({'infinite' if s['infinite'] else 'finite'})"
        blocks.append(head + "\n" + _table([{"wnode": w} for w in s["boundary_wnodes"]], ["wnode"]))
    return "\n\n".join(blocks) or f"rank {r['rank']}: no sections"


def local_finiteness_table(r: Report) -> str:
    rows = [{"section": k, "locally finite": v} for k, v in sorted(r["sections"].items())]
    return _table(rows, ["section", "locally finite"])


def escape_table(r: Report) -> str:
    lines = [f"escape walk in {r['section']} from {r['start']}",
             _table(r["picks"], ["step", "wnode", "distance", "bound"])]
    if r.get("presentation"):
        where = "outside" if r.get("outside_principal") else "inside"
        lines.append(f"{r['presentation']} lies {where} the principal {r['rank']}-galaxy")
    return "\n".join(lines)


def partition_table(r: Report, mark: Callable[[str], str] = str) -> str:
    rows = [{"class": c["id"], "principal": "*" if c["principal"] else "", "members": ", ".join(c["members"])}
            for c in r["classes"]]
    lines = [f"rank {r['rank']}: {len(rows)} galaxy class(es), reference {r['reference']}",
             _table(rows, ["class", "principal", "members"])]
    if r["ambiguities"]:
        amb = [{"a": v["a"], "b": v["b"], "residues": "; ".join(
            f"{p['residue']} mod {p['modulus']}: {mark(p['verdict'])}" for p in v["per_residue"])}
            for v in r["ambiguities"]]
        lines += ["ultrafilter-dependent pairs", _table(amb, ["a", "b", "residues"])]
    return "\n".join(lines)


def order_table(r: Report, mark: Callable[[str], str] = str) -> str:
    audits = [{"audit": k, "result": mark("pass" if r[k] else "FAIL")}
              for k in ("antisymmetric", "transitive", "acyclic")]
    if r.get("regression") is not None:
        mismatches = r["regression"]["mismatches"]
        audits.append({"audit": f"second reference {r['regression']['reference']}",
                       "result": mark("FAIL" if mismatches else "pass")})
    lines = [
        f"rank {r['rank']}: {len(r['classes'])} class(es), {'total' if r['total'] else 'partial'} order",
        "covering relations: " + _pairs(r["hasse"]),
        "incomparable: " + (", ".join(f"{a} ~ {b}" for a, b in r["incomparable"]) or "(none)"),
        _table(audits, ["audit", "result"]),
    ]
    return "\n".join(lines)


def witness_chain_table(r: Report, mark: Callable[[str], str] = str) -> str:
    rows = [{"galaxy": c["name"], "presentation": c["presentation"],
             "sandwich": mark("pass" if c["sandwich"] else "FAIL"),
             "non-principal": mark("pass" if c["non_principal"] else "FAIL")} for c in r["chain"]]
    agreed = sum(1 for p in r["pairwise"] if p["verdict"] == "Yes")
    lines = [
        f"witness chain of {len(rows)} galaxies around {r['around']} at rank {r['rank']}",
        _table(rows, ["galaxy", "presentation", "sandwich", "non-principal"]),
        f"{agreed}/{len(r['pairwise'])} closeness verdicts confirmed; chain {mark('verified' if r['ok'] else 'FAILED')}",
    ]
    return "\n".join(lines)


def check_table(r: Report, mark: Callable[[str], str] = str) -> str:
    rows = [{"check": c["check"], "rank": c["rank"], "result": mark("pass" if c["ok"] else "FAIL")}
            for c in r["checks"]]
    return _table(rows, ["check", "rank", "result"])


def oracle_table(r: Report, mark: Callable[[str], str] = str) -> str:
    head = (f"depth {r['depth']}: {r['pairs_checked']} pair(s), {r.get('skipped', 0)} skipped, "
            f"{len(r['mismatches'])} mismatch(es) {mark('pass' if r['ok'] else 'FAIL')}")
    if not r["mismatches"]:
        return head
    return head + "\n" + _table(r["mismatches"], ["x", "y", "search", "oracle"])


_PLAIN = {
    "validate": validation_table,
    "unroll": unroll_table,
    "sections": sections_table,
    "boundary": boundary_table,
    "locally-finite": local_finiteness_table,
    "escape-walk": escape_table,
}
_MARKED = {
    "distance": distance_table,
    "classify": partition_table,
    "order": order_table,
    "witness-chain": witness_chain_table,
    "check": check_table,
    "oracle-check": oracle_table,
}


def render_table(name: str, report: Report, mark: Callable[[str], str] = str) -> str:
    if name in _PLAIN:
        return _PLAIN[name](report)
    if name in _MARKED:
        return _MARKED[name](report, mark)
    raise ValueError(f"no table renderer for report: {name}")
