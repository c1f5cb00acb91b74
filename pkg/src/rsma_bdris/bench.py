"""Wall-clock timing of aligned-attack generation per architecture."""
from __future__ import annotations

import time

import numpy as np

from .attack import aligned_reflection
from .channel import Scenario, complex_gaussian


def time_attacks(dims=(50, 100, 200), group_size=5, repeats=25, seed=0, scenario=None):
    """Best-of-``repeats`` seconds per (D, architecture) for the aligned attack."""
    scenario = scenario or Scenario()
    rng = np.random.default_rng(seed)
    M, U = scenario.num_antennas, scenario.num_users
    times = {}
    for D in dims:
        G = complex_gaussian(rng, (D, M), 1.0)
        g = complex_gaussian(rng, (U, D), 1.0)
        archs = ("single", "group", "fully")
        for arch in archs:
            aligned_reflection(arch, G, g, scenario.weights, group_size)  # warm-up
            times[(D, arch)] = np.inf
        # interleave architectures so load drift hits all of them alike
        for _ in range(repeats):
            for arch in archs:
                t0 = time.perf_counter()
                aligned_reflection(arch, G, g, scenario.weights, group_size)
                times[(D, arch)] = min(times[(D, arch)], time.perf_counter() - t0)
    return times


def report(times, out=print) -> bool:
    """Print the timing table; True when group-connected beats fully connected at every D."""
    dims = sorted({d for d, _ in times})
    out(f"{'D':>5} {'single [s]':>12} {'group [s]':>12} {'fully [s]':>12}")
    ok = True
    for D in dims:
        out(f"{D:>5} {times[(D, 'single')]:>12.5f} {times[(D, 'group')]:>12.5f} {times[(D, 'fully')]:>12.5f}")
        ok &= times[(D, "group")] < times[(D, "fully")]
    out("group < fully at every D: " + ("yes" if ok else "no"))
    return ok
