"""Certified perturbation radius for the qualitative sketch.

``stability_margin`` returns the largest ``eps`` (found by bisection) such
that moving every coordinate of every sample by at most ``eps`` cannot
change any hysteretic token class, region membership, guard side,
guard-crossing gate or self-intersection status. Under such a perturbation
the sketch and the event kind counts are unchanged. Closed traces must be
perturbed consistently, so that the first and last samples stay equal.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..linkage import Trajectory
from .config import LiftingConfig
from .events import is_closed
from .geometry import Guard, Region, orientations, segment_distances, segment_pairs
from .proxies import proxies as compute_proxies

SQRT2 = math.sqrt(2.0)


def _class_gap(x: np.ndarray, margin: float) -> np.ndarray:
    """Distance of each value to the nearest class boundary of the dead band."""
    return np.abs(np.abs(x) - margin)


class _Certifier:
    def __init__(self, traj: Trajectory, regions: Sequence[Region], guards: Sequence[Guard], config: LiftingConfig):
        self.cfg = config
        self.dt = config.dt
        pts = traj.samples
        self.pts = pts
        self.closed = is_closed(traj)
        px = compute_proxies(traj, config.dt, config.singular_speed)
        self.v = px.velocities
        self.a = px.accelerations
        self.s = px.speeds
        n = pts.shape[0]
        # per-coordinate velocity sensitivity in units of eps
        self.cv = np.full(n, 1.0 / self.dt)
        self.cv[0] = self.cv[-1] = 2.0 / self.dt
        self.ca = 4.0 / (self.dt * self.dt)
        self.regions = list(regions)
        self.guards = list(guards)

        self.mono_gap = np.minimum(
            _class_gap(self.v[:, 0], config.mono_margin), _class_gap(self.v[:, 1], config.mono_margin)
        )

        # region membership and segment/box separation for outside segments
        self.region_clear = []
        for r in self.regions:
            clear = float(np.min(r.boundary_clearance(pts)))
            inside = r.contains(pts)
            both_out = ~inside[:-1] & ~inside[1:]
            idx = np.flatnonzero(both_out)
            if idx.size:
                hits = r.segment_hits(pts[idx], pts[idx + 1])
                if np.any(hits):
                    clear = 0.0
                else:
                    corners = np.array(
                        [[r.xmin, r.ymin], [r.xmax, r.ymin], [r.xmax, r.ymax], [r.xmin, r.ymax], [r.xmin, r.ymin]]
                    )
                    seg = np.vstack([pts[idx], pts[idx + 1]]).reshape(2, -1, 2).transpose(1, 0, 2)
                    best = np.inf
                    for e in range(4):
                        quad = np.stack([seg[:, 0], seg[:, 1], np.repeat(corners[e : e + 1], len(idx), 0), np.repeat(corners[e + 1 : e + 2], len(idx), 0)], axis=1)
                        flat = quad.reshape(-1, 2)
                        ii = np.arange(len(idx)) * 4
                        best = min(best, float(np.min(segment_distances(flat, ii, ii + 2))))
                    clear = min(clear, best / SQRT2)
            self.region_clear.append(clear)

        # guards: side of every sample, and the speed gate at crossings
        self.guard_terms = []
        for g in self.guards:
            nrm = g.normal
            w = abs(nrm[0]) + abs(nrm[1])
            d = g.signed_distance(pts)
            side = d >= 0
            cross = np.flatnonzero(side[1:] != side[:-1]) + 1
            gate = np.abs(np.abs(self.v[cross] @ nrm) - config.guard_min_normal_speed)
            self.guard_terms.append((w, float(np.min(np.abs(d))), cross, gate))

        # self-intersection status of every non-adjacent segment pair
        n_seg = n - 1
        i, j = segment_pairs(n_seg, self.closed)
        self.sint_ok = True
        if i.size:
            o = orientations(pts, i, j)
            s = [np.sign(x) for x in o]
            proper = (s[0] * s[1] < 0) & (s[2] * s[3] < 0)
            rest = ~proper
            self.sep_dist = segment_distances(pts, i[rest], j[rest]) if np.any(rest) else np.array([np.inf])
            # touching or overlapping pairs have no room at all
            if np.any(self.sep_dist <= 0.0):
                self.sint_ok = False
            pi, pj = i[proper], j[proper]
            self.prop_o = [np.abs(x[proper]) for x in o]
            a, b, c, d = pts[pi], pts[pi + 1], pts[pj], pts[pj + 1]
            ln = lambda u: np.hypot(u[:, 0], u[:, 1])
            self.prop_len = [
                (ln(b - a), ln(c - a)),
                (ln(b - a), ln(d - a)),
                (ln(d - c), ln(a - c)),
                (ln(d - c), ln(b - c)),
            ]
        else:
            self.sep_dist = np.array([np.inf])
            self.prop_o = []
            self.prop_len = []

    def ok(self, eps: float) -> bool:
        cfg = self.cfg
        dv = self.cv * eps
        if np.any(self.mono_gap <= dv):
            return False
        # curvature raw class on interior samples (endpoints copy neighbours)
        v, a = self.v[1:-1], self.a[1:-1]
        dvi = dv[1:-1]
        da = self.ca * eps
        num = v[:, 0] * a[:, 1] - v[:, 1] * a[:, 0]
        dn = (np.abs(v[:, 0]) + np.abs(v[:, 1])) * da + (np.abs(a[:, 0]) + np.abs(a[:, 1])) * dvi + 2.0 * dvi * da
        s = self.s[1:-1]
        s_lo = s - SQRT2 * dvi
        s_hi = s + SQRT2 * dvi
        floor = cfg.singular_speed ** (1.0 / 3.0)
        if np.any(s_lo <= floor):
            return False
        tol = cfg.curvature_tol
        with np.errstate(divide="ignore", invalid="ignore"):
            kappa = num / s**3
            pos = kappa > tol
            neg = kappa < -tol
            band = ~pos & ~neg
            lower_pos = (num - dn) / s_hi**3
            upper_neg = (num + dn) / s_hi**3
            band_hi = (np.abs(num) + dn) / s_lo**3
        if np.any(pos & ~((num - dn > 0) & (lower_pos > tol))):
            return False
        if np.any(neg & ~((num + dn < 0) & (upper_neg < -tol))):
            return False
        if np.any(band & ~(band_hi < tol)):
            return False
        for clear in self.region_clear:
            if not clear > eps:
                return False
        for w, dmin, cross, gate in self.guard_terms:
            if not dmin > eps * w:
                return False
            if cross.size and np.any(gate <= dv[cross] * w):
                return False
        if not self.sint_ok:
            return False
        r = SQRT2 * eps
        if not np.min(self.sep_dist) > 2.0 * r:
            return False
        for o, (l1, l2) in zip(self.prop_o, self.prop_len):
            if o.size and np.any(o <= 2.0 * r * l1 + 2.0 * r * l2 + 4.0 * r * r):
                return False
        return True


def stability_margin(
    traj: Trajectory,
    regions: Sequence[Region] = (),
    guards: Sequence[Guard] = (),
    config: LiftingConfig = LiftingConfig(),
    iterations: int = 80,
) -> float:
    cert = _Certifier(traj, regions, guards, config)
    if not cert.ok(0.0):
        return 0.0
    hi = 1.0 + float(np.ptp(traj.samples))
    if cert.ok(hi):
        return hi
    lo = 0.0
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if cert.ok(mid):
            lo = mid
        else:
            hi = mid
    return lo
