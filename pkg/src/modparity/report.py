"""JSON/TSV emitters for audit reports and the matplotlib figures."""

from __future__ import annotations

import io
import json
import os
from collections import Counter

from .ingest import ROW_COLUMNS, Report

# Frozen so that TSV reports can be diffed across runs and versions.
TSV_COLUMNS = ROW_COLUMNS
MEREL_COLUMNS = ("N", "u", "v", "criterion", "eisenstein_dims", "agree")
NS_COLUMNS = ("label", "conductor", "u", "predicted_odd", "actual_odd", "agree")
COMPOSITE_COLUMNS = ("label", "conductor", "failures")


def to_json(report: Report) -> str:
    return json.dumps(report.as_dict(), indent=2, sort_keys=False) + "\n"


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return ",".join(str(x) for x in v)
    return str(v)


def _table(out: io.StringIO, name: str, columns, rows) -> None:
    out.write(f"#table\t{name}\n")
    out.write("\t".join(columns) + "\n")
    for r in rows:
        out.write("\t".join(_cell(r.get(c)) for c in columns) + "\n")
    out.write("\n")


def to_tsv(report: Report) -> str:
    out = io.StringIO()
    _table(out, "rows", TSV_COLUMNS, report.rows)
    _table(out, "composite", COMPOSITE_COLUMNS, report.composite)
    _table(out, "merel", MEREL_COLUMNS, report.merel)
    _table(out, "neumann_setzer", NS_COLUMNS, report.neumann_setzer)
    w = report.watkins
    _table(out, "watkins", ("checked", "excluded_two_torsion", "violations"),
           [{"checked": len(w.checked), "excluded_two_torsion": len(w.excluded), "violations": w.violations}])
    _table(out, "summary", ("key", "value"),
           [{"key": k, "value": json.dumps(v) if isinstance(v, dict) else v} for k, v in report.summary.items()])
    return out.getvalue()


def render_figures(report: Report, outdir: str) -> list[str]:
    """Write PNG figures next to the report; returns the paths written."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(outdir, exist_ok=True)
    paths = []

    rules = Counter(r["rule"] or "error" for r in report.rows)
    fig, ax = plt.subplots(figsize=(7, 3.5))
    names = sorted(rules)
    ax.barh(names, [rules[n] for n in names], color="#4c72b0")
    ax.set_xlabel("curves")
    ax.set_title("Audit rows by deciding rule")
    fig.tight_layout()
    paths.append(_save(fig, outdir, "rules.png"))

    odd_prime = Counter()
    for r in report.rows:
        if r["degree_parity_actual"] == "odd" and r["rule"] in ("CASE_3B",):
            odd_prime[r["conductor"] % 8] += 1
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(range(8), [odd_prime[i] for i in range(8)], color="#55a868")
    ax.set_xticks(range(8))
    ax.set_xlabel("N mod 8")
    ax.set_ylabel("odd-degree curves")
    ax.set_title("Prime level, no 2-torsion, odd degree")
    fig.tight_layout()
    paths.append(_save(fig, outdir, "odd_degree_mod8.png"))

    if report.merel:
        fig, ax = plt.subplots(figsize=(7, 3.5))
        xs = [r["N"] for r in report.merel]
        ys = [max(r["eisenstein_dims"] or [0]) for r in report.merel]
        colors = ["#c44e52" if r["criterion"] else "#8172b2" for r in report.merel]
        ax.scatter(xs, ys, c=colors, s=14)
        ax.set_xlabel("prime N = 1 mod 8")
        ax.set_ylabel("Eisenstein factor dimension")
        ax.set_title("Eisenstein factor size (red: criterion says not Z_2)")
        fig.tight_layout()
        paths.append(_save(fig, outdir, "eisenstein_dims.png"))

    agree = Counter(r["agreement"] for r in report.rows)
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    keys = ["agree", "disagree", "n/a"]
    ax.bar(keys, [agree.get(k, 0) for k in keys], color=["#55a868", "#c44e52", "#999999"])
    ax.set_title("Predicted vs recorded degree parity")
    fig.tight_layout()
    paths.append(_save(fig, outdir, "agreement.png"))
    return paths


def _save(fig, outdir: str, name: str) -> str:
    import matplotlib.pyplot as plt
    path = os.path.join(outdir, name)
    fig.savefig(path, dpi=110, metadata={"Software": None})
    plt.close(fig)
    return path
