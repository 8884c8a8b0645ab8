"""Synthetic problem instances with a realistic southern-Sweden shape.

Generated forests mimic the published case-study profile: 250 stands
dominated by spruce (80%), pine (15%) or deciduous trees (5%), stand areas
between 0.47 and 7.66 ha with mean 1.73 ha, and all three assortments
present to some extent in every stand.  Demand defaults to a period-uniform
table at a configurable fraction of the mean annual yield.

All draws run through the package's keyed Philox streams, so an instance is
a pure function of its seed and parameters.
"""

from __future__ import annotations

import numpy as np

from .model import Assortment, DemandTable, ProblemInstance, StandRecord, validate_instance
from .rng import KeyedStream

DEFAULT_ASSORTMENTS = ("pine", "spruce", "deciduous")
DEFAULT_DOMINANCE = (0.15, 0.80, 0.05)

_AREA_MIN, _AREA_MAX, _AREA_MEAN = 0.47, 7.66, 1.73


def synthesize_instance(
    seed: int,
    n_stands: int = 250,
    n_periods: int = 12,
    assortment_names: tuple[str, ...] = DEFAULT_ASSORTMENTS,
    dominance_shares: tuple[float, ...] = DEFAULT_DOMINANCE,
    density_range_m3_ha: tuple[float, float] = (150.0, 350.0),
    dominant_share_range: tuple[float, float] = (0.65, 0.85),
    sd_fraction_range: tuple[float, float] = (0.08, 0.20),
    demand_fill_rate: float = 0.85,
) -> ProblemInstance:
    """Deterministically generate a validated instance from a seed."""
    n_a = len(assortment_names)
    if len(dominance_shares) != n_a:
        raise ValueError("one dominance share per assortment is required")

    # Right-skewed areas on [min, max] via a power transform of uniforms;
    # the exponent pins the expected mean at 1.73 ha.
    gamma = (_AREA_MAX - _AREA_MIN) / (_AREA_MEAN - _AREA_MIN) - 1.0
    u = KeyedStream(seed, tag="synth/area").uniforms(n_stands)
    areas = _AREA_MIN + (_AREA_MAX - _AREA_MIN) * u**gamma

    density = KeyedStream(seed, tag="synth/density").uniform(
        *density_range_m3_ha, n_stands
    )
    dominant = KeyedStream(seed, tag="synth/dominant").choice_index(
        np.asarray(dominance_shares), n_stands
    )
    main_share = KeyedStream(seed, tag="synth/main-share").uniform(
        *dominant_share_range, n_stands
    )
    # Split the remainder across the other assortments from uniform weights.
    split = KeyedStream(seed, tag="synth/split").uniforms(n_stands * (n_a - 1)).reshape(
        n_stands, n_a - 1
    )
    sd_frac = KeyedStream(seed, tag="synth/sd").uniform(
        *sd_fraction_range, n_stands * n_a
    ).reshape(n_a, n_stands)

    shares = np.zeros((n_a, n_stands))
    for j in range(n_stands):
        others = [a for a in range(n_a) if a != dominant[j]]
        weights = split[j] + 0.1  # keep every assortment present
        weights /= weights.sum()
        shares[dominant[j], j] = main_share[j]
        for pos, a in enumerate(others):
            shares[a, j] = (1.0 - main_share[j]) * weights[pos]

    means = shares * (areas * density)[None, :]
    sds = means * sd_frac

    demand_per_period = demand_fill_rate * means.sum(axis=1) / n_periods
    demand = np.tile(np.round(demand_per_period, 1)[:, None], (1, n_periods))

    stands = tuple(
        StandRecord(j + 1, float(areas[j]), means[:, j].copy(), sds[:, j].copy())
        for j in range(n_stands)
    )
    assortments = tuple(Assortment(a + 1, assortment_names[a]) for a in range(n_a))
    return validate_instance(
        ProblemInstance(stands, assortments, n_periods, DemandTable(demand))
    )
