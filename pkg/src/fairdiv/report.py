"""Run reports: JSON and text rendering, CSV tables, and matplotlib figures.

Exact rationals are serialized as "p/q" strings. Human-readable output may
show decimal approximations, always marked with a tilde; figures are plotted
from float approximations since they are presentation only.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from .core import Allocation, Instance, allocation_to_json, rat_str
from .fairness import QuotaReport, Verdict, Witness
from .shares import SHARE_KINDS, ShareReport


def _approx(value: Fraction) -> str:
    return f"{rat_str(value)} (~{float(value):.6g})"


def witness_to_json(w: Witness) -> dict:
    data: dict[str, Any] = {
        "agents": list(w.agents),
        "margin": rat_str(w.margin),
        "violated": w.violated,
    }
    if w.items:
        data["items"] = list(w.items)
    if w.prefix is not None:
        data["prefix"] = w.prefix
    return data


def verdict_entry(notion: str, params: dict, verdict: Verdict | QuotaReport) -> dict:
    entry: dict[str, Any] = {"notion": notion}
    entry.update({k: rat_str(v) if isinstance(v, Fraction) else v for k, v in params.items()})
    if isinstance(verdict, QuotaReport):
        entry["satisfied"] = verdict.satisfied
        entry["quotas"] = [rat_str(q) for q in verdict.quotas]
        entry["counts"] = list(verdict.counts)
        entry["lower_ok"] = list(verdict.lower_ok)
        entry["upper_ok"] = list(verdict.upper_ok)
    else:
        entry["satisfied"] = verdict.satisfied
        entry["witnesses"] = [witness_to_json(w) for w in verdict.witnesses]
    return entry


def share_report_to_json(report: ShareReport) -> dict:
    rows = []
    for row in report.rows:
        data: dict[str, Any] = {"agent": row.agent}
        for kind in SHARE_KINDS:
            data[kind] = rat_str(getattr(row, kind))
        if row.omms_pair is not None:
            data["omms_pair"] = list(row.omms_pair)
        if row.mms_partition is not None:
            data["mms_partition"] = [list(p) for p in row.mms_partition]
        if row.wmms_partition is not None:
            data["wmms_partition"] = [list(p) for p in row.wmms_partition]
        if row.aps_collection is not None:
            data["aps_collection"] = [
                {"bundle": list(bundle), "weight": rat_str(weight)}
                for bundle, weight in row.aps_collection
            ]
        rows.append(data)
    return {"agents": rows}


@dataclass
class RunReport:
    """Everything one CLI invocation produced, renderable as JSON or text."""

    instance: Instance
    algorithm: str | None = None
    params: dict = field(default_factory=dict)
    allocation: Allocation | None = None
    optima: Sequence[Allocation] | None = None
    verdicts: list[dict] = field(default_factory=list)
    shares: ShareReport | None = None
    elapsed_ms: float | None = None

    def to_json(self) -> dict:
        data: dict[str, Any] = {
            "instance": {
                "agents": self.instance.n,
                "items": self.instance.m,
                "weights": [rat_str(w) for w in self.instance.weights],
                "identical_items": self.instance.identical_items,
                "binary": self.instance.binary,
            }
        }
        if self.algorithm is not None:
            data["algorithm"] = self.algorithm
            data["params"] = {
                k: rat_str(v) if isinstance(v, Fraction) else v
                for k, v in self.params.items()
            }
        if self.allocation is not None:
            data["allocation"] = allocation_to_json(self.allocation)
        if self.optima is not None:
            data["optima"] = [allocation_to_json(a) for a in self.optima]
        if self.verdicts:
            data["verdicts"] = self.verdicts
            data["all_satisfied"] = all(v["satisfied"] for v in self.verdicts)
        if self.shares is not None:
            data["shares"] = share_report_to_json(self.shares)
        if self.elapsed_ms is not None:
            data["elapsed_ms"] = round(self.elapsed_ms, 3)
        return data

    def to_text(self) -> str:
        inst = self.instance
        lines = [
            f"instance: {inst.n} agents, {inst.m} items"
            + (" [identical]" if inst.identical_items else "")
            + (" [binary]" if inst.binary else ""),
            "weights: " + ", ".join(rat_str(w) for w in inst.weights),
        ]
        if self.algorithm is not None:
            shown = " ".join(f"{k}={rat_str(v) if isinstance(v, Fraction) else v}"
                             for k, v in self.params.items())
            lines.append(f"algorithm: {self.algorithm}" + (f" ({shown})" if shown else ""))
        if self.allocation is not None:
            for i, bundle in enumerate(self.allocation.bundles):
                items = ", ".join(str(g) for g in sorted(bundle)) or "-"
                value = sum((inst.utilities[i][g] for g in bundle), Fraction(0))
                lines.append(f"  agent {i}: items [{items}]  value {_approx(value)}")
        if self.optima is not None:
            lines.append(f"optima: {len(self.optima)} allocation(s)")
            for alloc in self.optima:
                lines.append("  " + " | ".join(
                    "{" + ",".join(map(str, sorted(b))) + "}" for b in alloc.bundles))
        for entry in self.verdicts:
            status = "PASS" if entry["satisfied"] else "FAIL"
            extra = ""
            if "witnesses" in entry and not entry["satisfied"]:
                first = next(w for w in entry["witnesses"] if w["violated"])
                extra = f"  (agents {first['agents']}, margin {first['margin']})"
            lines.append(f"verify {entry['notion']}: {status}{extra}")
        if self.shares is not None:
            header = "agent  " + "  ".join(k.rjust(8) for k in SHARE_KINDS)
            lines.append(header)
            for row in self.shares.rows:
                cells = "  ".join(rat_str(getattr(row, k)).rjust(8) for k in SHARE_KINDS)
                lines.append(f"{row.agent:>5}  {cells}")
        if self.elapsed_ms is not None:
            lines.append(f"elapsed: {self.elapsed_ms:.1f} ms")
        return "\n".join(lines)


def write_shares_csv(path: Path, inst: Instance, report: ShareReport,
                     alloc: Allocation | None = None) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        header = ["agent", "weight", "utility"] + list(SHARE_KINDS)
        writer.writerow(header)
        for row in report.rows:
            utility = ""
            if alloc is not None:
                utility = rat_str(
                    sum((inst.utilities[row.agent][g] for g in alloc.bundles[row.agent]),
                        Fraction(0))
                )
            writer.writerow(
                [row.agent, rat_str(inst.weights[row.agent]), utility]
                + [rat_str(getattr(row, kind)) for kind in SHARE_KINDS]
            )


def write_verdicts_csv(path: Path, verdicts: list[dict]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["notion", "params", "satisfied", "violations"])
        for entry in verdicts:
            params = " ".join(
                f"{k}={entry[k]}" for k in ("x", "y", "alpha", "kind") if k in entry
            )
            violations = ""
            if "witnesses" in entry:
                violations = sum(1 for w in entry["witnesses"] if w["violated"])
            writer.writerow([entry["notion"], params, entry["satisfied"], violations])


def render_figures(outdir: Path, inst: Instance, alloc: Allocation,
                   report: ShareReport) -> list[Path]:
    """Render the share/utility bar chart and the weighted-envy heatmap."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    paths = []
    agents = list(range(inst.n))
    utilities = [
        float(sum((inst.utilities[i][g] for g in alloc.bundles[i]), Fraction(0)))
        for i in agents
    ]

    fig, ax = plt.subplots(figsize=(8, 4.5))
    width = 0.14
    ax.bar([i - 2.5 * width for i in agents], utilities, width, label="utility",
           color="#333333")
    for k, kind in enumerate(SHARE_KINDS):
        values = [float(getattr(report.rows[i], kind)) for i in agents]
        ax.bar([i + (k - 1.5) * width for i in agents], values, width, label=kind)
    ax.set_xticks(agents)
    ax.set_xlabel("agent")
    ax.set_ylabel("value")
    ax.set_title("bundle utility vs share thresholds")
    ax.legend(fontsize=8)
    fig.tight_layout()
    share_path = outdir / "shares.png"
    fig.savefig(share_path, dpi=150)
    plt.close(fig)
    paths.append(share_path)

    envy = [[0.0] * inst.n for _ in range(inst.n)]
    for i in agents:
        for j in agents:
            if i == j:
                continue
            value_j = sum((inst.utilities[i][g] for g in alloc.bundles[j]), Fraction(0))
            value_i = sum((inst.utilities[i][g] for g in alloc.bundles[i]), Fraction(0))
            envy[i][j] = float(max(
                Fraction(0), value_j / inst.weights[j] - value_i / inst.weights[i]
            ))
    fig, ax = plt.subplots(figsize=(5, 4.5))
    image = ax.imshow(envy, cmap="Reds")
    ax.set_xlabel("envied agent j")
    ax.set_ylabel("agent i")
    ax.set_title("weighted envy max{0, u_i(A_j)/w_j - u_i(A_i)/w_i}")
    ax.set_xticks(agents)
    ax.set_yticks(agents)
    for i in agents:
        for j in agents:
            ax.text(j, i, f"{envy[i][j]:.3g}", ha="center", va="center", fontsize=8)
    fig.colorbar(image, ax=ax)
    fig.tight_layout()
    envy_path = outdir / "envy.png"
    fig.savefig(envy_path, dpi=150)
    plt.close(fig)
    paths.append(envy_path)
    return paths
