"""Figure builders for the dead-core laboratory's CSV reports.

Every numeric shown in a figure comes verbatim from the CSV or the manifest;
the renderer computes nothing scientific.  Fitted-slope annotations carry
the exact CSV cell text, so they can be compared string-for-string with the
source column.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["PlotJob", "RenderResult", "SchemaError", "render", "SCHEMAS"]


class SchemaError(ValueError):
    """CSV header does not match the documented schema, or no data rows."""


SCHEMAS = {
    "growth": ["r", "sup", "fitted_exponent", "target"],
    "gradient": ["r", "sup_grad", "fitted_exponent", "target"],
    "l2avg": ["r", "s_value", "slope", "target"],
    "heatmap": ["x", "y", "u", "interior"],
    "liouville": ["mode", "R", "px", "py", "boundary_sup", "sup_ratio", "u_probe", "v_probe"],
    "game": [
        "x0", "y0", "mean", "sd", "ci95", "mean_exit_time", "truncated",
        "n_walks", "dpp_value", "osc_payoff", "threshold", "consistent",
    ],
}


@dataclass
class PlotJob:
    kind: str
    inputs: list
    out: Path
    manifest: Optional[Path] = None

    def __post_init__(self):
        if self.kind not in SCHEMAS:
            raise SchemaError(f"unknown plot kind {self.kind!r}")
        self.inputs = [Path(p) for p in self.inputs]
        self.out = Path(self.out)
        if self.manifest is not None:
            self.manifest = Path(self.manifest)


@dataclass
class RenderResult:
    out: Path
    annotations: dict = field(default_factory=dict)


def _read_csv(path: Path, kind: str):
    """Header-checked CSV load; cells stay strings to keep them verbatim."""
    if not path.exists():
        raise SchemaError(f"input CSV not found: {path}")
    with open(path) as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path} is empty")
    header = rows[0]
    if header != SCHEMAS[kind]:
        raise SchemaError(
            f"{path} header {header} does not match the {kind} schema {SCHEMAS[kind]}"
        )
    data = rows[1:]
    if not data:
        raise SchemaError(f"{path} has a header but no data rows")
    return header, data


def _column(data, header, name):
    i = header.index(name)
    return [row[i] for row in data]


def _floats(cells):
    return np.array([float(c) for c in cells])


def _load_manifest(job: PlotJob) -> dict:
    if job.manifest is None:
        return {}
    if not job.manifest.exists():
        raise SchemaError(f"manifest not found: {job.manifest}")
    return json.loads(job.manifest.read_text())


def _loglog_fit_figure(job, value_col, slope_col, title, ylabel):
    header, data = _read_csv(job.inputs[0], job.kind)
    manifest = _load_manifest(job)
    r = _floats(_column(data, header, "r"))
    v = _floats(_column(data, header, value_col))
    slope_text = _column(data, header, slope_col)[0]
    target_text = _column(data, header, "target")[0]
    slope = float(slope_text)
    target = float(target_text)

    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    ax.loglog(r, v, "o", color="tab:blue", label="measured")
    anchor = v[-1] if v[-1] > 0 else 1.0
    ref = anchor * (r / r[-1]) ** slope
    tref = anchor * (r / r[-1]) ** target
    ax.loglog(r, ref, "-", color="tab:blue", alpha=0.7,
              label=f"fitted slope = {slope_text}")
    ax.loglog(r, tref, "--", color="tab:red", alpha=0.7,
              label=f"reference slope = {target_text}")
    ax.set_xlabel("r")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(job.out, dpi=130)
    plt.close(fig)
    annotations = {
        "fitted_slope": slope_text,
        "target": target_text,
    }
    if manifest:
        annotations["manifest_command"] = manifest.get("command", "")
    return RenderResult(job.out, annotations)


def _render_growth(job):
    return _loglog_fit_figure(job, "sup", "fitted_exponent",
                              "growth of sup u over balls at the free boundary",
                              "sup u")


def _render_gradient(job):
    return _loglog_fit_figure(job, "sup_grad", "fitted_exponent",
                              "gradient decay at the free boundary", "sup |grad u|")


def _render_l2avg(job):
    return _loglog_fit_figure(job, "s_value", "slope",
                              "L2 average of |grad u|^gamma |D2 u|", "S(r)")


def _render_heatmap(job):
    header, data = _read_csv(job.inputs[0], job.kind)
    manifest = _load_manifest(job)
    x = _floats(_column(data, header, "x"))
    y = _floats(_column(data, header, "y"))
    u = _floats(_column(data, header, "u"))
    inter = _floats(_column(data, header, "interior")) > 0.5
    xs = np.unique(x)
    ys = np.unique(y)
    grid = u.reshape(len(xs), len(ys))
    u_tol = float(manifest.get("report", {}).get("u_tol", 1e-7)) if manifest else 1e-7
    dead = float((u[inter] <= u_tol).sum()) / max(int(inter.sum()), 1)

    fig, ax = plt.subplots(figsize=(5.2, 4.6))
    im = ax.pcolormesh(xs, ys, grid.T, shading="nearest", cmap="viridis")
    fig.colorbar(im, ax=ax, label="u")
    dead_text = f"dead core = {100.0 * dead:.1f}%"
    ax.set_title("solution field")
    ax.text(0.02, 0.02, dead_text, transform=ax.transAxes, color="white",
            fontsize=9, bbox=dict(facecolor="black", alpha=0.5))
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    fig.savefig(job.out, dpi=130)
    plt.close(fig)
    return RenderResult(job.out, {"dead_core": dead_text})


def _render_liouville(job):
    header, data = _read_csv(job.inputs[0], job.kind)
    probes = {}
    for row in data:
        key = (row[header.index("px")], row[header.index("py")])
        probes.setdefault(key, []).append(
            (
                float(row[header.index("R")]),
                float(row[header.index("u_probe")]),
                row[header.index("v_probe")],
            )
        )
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    floor = 1e-16
    for key, pts in probes.items():
        pts.sort()
        Rs = [p[0] for p in pts]
        us = [max(p[1], floor) for p in pts]
        ax.semilogy(Rs, us, "o-", label=f"u at ({key[0]}, {key[1]})")
        vs = [p[2] for p in pts]
        if all(v != "nan" for v in vs):
            ax.semilogy(Rs, [max(float(v), floor) for v in vs], "--", alpha=0.6,
                        label=f"v_R at ({key[0]}, {key[1]})")
    ax.set_xlabel("R")
    ax.set_ylabel("probe value")
    ax.set_title("entire-solution collapse under the growth hypothesis")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(job.out, dpi=130)
    plt.close(fig)
    return RenderResult(job.out, {"n_probes": str(len(probes))})


def _render_game(job):
    header, data = _read_csv(job.inputs[0], job.kind)
    row = data[0]
    mean = float(row[header.index("mean")])
    ci = float(row[header.index("ci95")])
    value = float(row[header.index("dpp_value")])
    mean_text = row[header.index("mean")]
    value_text = row[header.index("dpp_value")]

    fig, ax = plt.subplots(figsize=(4.6, 4.0))
    ax.errorbar([0.0], [mean], yerr=[1.96 * ci if ci > 0 else 0.0], fmt="o",
                capsize=6, label=f"Monte Carlo mean = {mean_text}")
    ax.axhline(value, color="tab:red", linestyle="--",
               label=f"DPP value = {value_text}")
    ax.set_xlim(-1, 1)
    ax.set_xticks([])
    ax.set_ylabel("payoff")
    ax.set_title("tug-of-war empirical mean vs value function")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(job.out, dpi=130)
    plt.close(fig)
    return RenderResult(job.out, {"mean": mean_text, "dpp_value": value_text})


_RENDERERS = {
    "growth": _render_growth,
    "gradient": _render_gradient,
    "l2avg": _render_l2avg,
    "heatmap": _render_heatmap,
    "liouville": _render_liouville,
    "game": _render_game,
}


def render(job: PlotJob) -> RenderResult:
    return _RENDERERS[job.kind](job)
