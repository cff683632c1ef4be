"""Shared random generators for the test suite.

Oracles stay in the test modules they anchor; this file only holds input
generation so every module draws comparable random cases.
"""

import numpy as np

from cadlag_rough import algebra


def random_lie(rng, d, scale=1.0):
    v = scale * rng.standard_normal(d)
    a = scale * rng.standard_normal((d, d))
    return algebra.Lie2Element(v, a)


def random_group(rng, d, scale=1.0):
    return algebra.exp2(random_lie(rng, d, scale))


def random_jump_path(rng, d, n_jumps, t_max=1.0, scale=1.0):
    """Pure-jump cadlag skeleton: constant between jumps, jump at each sample."""
    from cadlag_rough import cadlag

    times = np.sort(rng.uniform(0.0, t_max, n_jumps))
    # keep jump times distinct and away from 0
    times = np.unique(np.round(times, 9))
    times = times[times > 1e-6]
    values = [np.zeros(d)]
    for _ in range(len(times)):
        values.append(values[-1] + scale * rng.standard_normal(d))
    all_times = np.concatenate([[0.0], times, [t_max + 0.1]])
    values.append(values[-1])
    mask = np.zeros(len(all_times), dtype=bool)
    mask[1:-1] = True
    return cadlag.CadlagPath(all_times, np.array(values), jump_mask=mask)
