"""SVG rendering of mechanisms and convergence traces."""
from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .linkage import Fixed, Linkage, SimulationResult, Trajectory, structure  # noqa: E402

plt.rcParams["svg.hashsalt"] = "linksym"
plt.rcParams["svg.fonttype"] = "none"

BAR_WIDTH = 1.0
TRAJ_WIDTH = 2.5
EFFECTOR_WIDTH = 4.0
_PALETTE = ("tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple", "tab:brown", "tab:pink", "tab:olive", "tab:cyan")


def _save(fig, out) -> Path:
    out = Path(out)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
    return out


def render_mechanism(
    linkage: Linkage,
    sim: SimulationResult,
    out,
    target: Optional[Trajectory] = None,
    phase: int = 0,
) -> Path:
    """Bars at one crank phase over the joint paths; the effector path is drawn thickest."""
    if not sim.buildable or not sim.per_joint:
        raise ValueError("cannot render an unbuildable mechanism")
    order = linkage.ids
    pos = {jid: tr.samples[phase % len(tr)] for jid, tr in sim.per_joint.items()}
    fig, ax = plt.subplots(figsize=(6, 6))
    moving = [j.id for j in linkage.joints if not isinstance(j, Fixed)]
    for k, jid in enumerate(moving):
        pts = sim.per_joint[jid].samples
        eff = jid == linkage.target
        ax.plot(
            pts[:, 0],
            pts[:, 1],
            color=_PALETTE[k % len(_PALETTE)],
            lw=EFFECTOR_WIDTH if eff else TRAJ_WIDTH,
            alpha=1.0 if eff else 0.7,
            zorder=3 if eff else 2,
            gid=f"traj-{jid}",
            label=f"{jid} (effector)" if eff else jid,
        )
    for k, body in enumerate(structure(linkage).links):
        ids = sorted(body, key=order.index)
        pts = np.array([pos[i] for i in ids])
        if len(ids) > 2:
            pts = np.vstack([pts, pts[:1]])
        ax.plot(pts[:, 0], pts[:, 1], color="0.3", lw=BAR_WIDTH, marker="o", ms=3, zorder=4, gid=f"bar-{k}")
    if target is not None:
        t = target.samples
        ax.plot(t[:, 0], t[:, 1], color="black", lw=1.5, ls="--", zorder=5, gid="target", label="target")
    ax.set_aspect("equal", "datalim")
    ax.set_title(linkage.name)
    ax.legend(loc="best", fontsize=7)
    return _save(fig, out)


def render_trace(traces: Sequence[Sequence[float]], out, title: str = "") -> Path:
    """Best objective per round, one line per sample."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for k, tr in enumerate(traces):
        ax.plot(np.arange(len(tr)), tr, marker="o", ms=3, color=_PALETTE[k % len(_PALETTE)], gid=f"sample-{k}", label=f"sample {k}")
    ax.set_xlabel("round")
    ax.set_ylabel("best Chamfer")
    if title:
        ax.set_title(title)
    if traces:
        ax.legend(loc="best", fontsize=7)
    return _save(fig, out)
