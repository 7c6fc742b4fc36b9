from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class LiftingConfig:
    """Thresholds for both lifting variants.

    Segmentation: heading change up to 2 deg is straight, 30 deg gentle,
    45 deg sharp, anything larger a U-turn; speeds below 1.5e-4 are pauses.
    Compositional lifting: unit time step, 1e-3 dead band on curvature,
    guard crossings need 1e-4 normal speed and 5 samples of separation, 10%
    of self-intersections are kept, event windows are padded by half a sample
    and intervals closer than 1e-12 are merged.
    """

    dr: bool = True
    cl: bool = True
    dt: float = 1.0
    pause_speed: float = 1.5e-4
    straight_deg: float = 2.0
    gentle_deg: float = 30.0
    sharp_deg: float = 45.0
    heading_bins: int = 8
    curvature_tol: float = 1e-3
    mono_margin: float = 1e-4
    guard_min_normal_speed: float = 1e-4
    guard_min_separation: int = 5
    sint_keep_fraction: float = 0.1
    merge_tol: float = 1e-12
    region_pad: float = 0.05
    singular_speed: float = 1e-12
    seed: int = 0

    @property
    def sint_stride(self) -> int:
        return math.ceil(1.0 / self.sint_keep_fraction)
