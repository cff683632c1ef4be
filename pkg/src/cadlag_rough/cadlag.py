"""Cadlag paths with marked jumps, path functions and jump interpolation.

A sampled path holds strictly increasing times and one value row per time.
jump_mask[i] says the increment into sample i is a genuine jump (traversed
instantaneously); unmarked increments belong to the continuous part and are
read as linear chords.  Pure-jump skeletons mark every change; discrete
skeletons of continuous processes carry an all-False mask, so the caller
decides which changes are jumps.

interpolate() realizes the fictitious-time construction: jumps are ordered by
decreasing size (ties toward earlier time), jump k gets a time window of
length delta * r_base^k in a stretched clock, the window is filled with
samples of the path function, and the stretched clock is mapped back to the
original horizon.  The returned TimeChange recovers the original path by
composition.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CadlagPath", "PathFunction", "TimeChange", "linear_phi", "loglinear_phi",
    "hoff_phi", "custom_phi", "interpolate", "apply_time_change", "value_at",
    "write_path_csv", "read_path_csv",
]


def _as_times(times):
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.shape[0] < 1:
        raise ValueError("times must be a non-empty 1-d array")
    if t.shape[0] > 1 and not np.all(np.diff(t) > 0):
        raise ValueError("times must be strictly increasing")
    return t


@dataclass
class CadlagPath:
    """Sampled cadlag path in R^d with an explicit jump mask."""

    times: np.ndarray
    values: np.ndarray
    jump_mask: np.ndarray = field(default=None)

    def __post_init__(self):
        self.times = _as_times(self.times)
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != self.times.shape[0]:
            raise ValueError("values and times disagree in length")
        self.values = v
        if self.jump_mask is None:
            # default semantics: piecewise-constant skeleton, every change jumps
            mask = np.zeros(len(self.times), dtype=bool)
            if len(self.times) > 1:
                mask[1:] = np.any(self.values[1:] != self.values[:-1], axis=1)
            self.jump_mask = mask
        else:
            mask = np.asarray(self.jump_mask, dtype=bool)
            if mask.shape != self.times.shape:
                raise ValueError("jump_mask must match times in shape")
            mask = mask.copy()
            mask[0] = False
            self.jump_mask = mask

    @property
    def n(self):
        return self.times.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    @property
    def t_end(self):
        return float(self.times[-1])

    def jump_indices(self):
        """Indices whose incoming increment is a marked, non-trivial jump."""
        idx = np.nonzero(self.jump_mask)[0]
        if idx.size == 0:
            return idx
        sz = np.linalg.norm(self.values[idx] - self.values[idx - 1], axis=1)
        return idx[sz > 0.0]


def value_at(path: CadlagPath, t):
    """Evaluate the path at times t (scalar or array).

    Jump increments are constant until their jump time; continuous increments
    are linear chords.  Right-continuous at jumps, clamped outside the span.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.empty((t_arr.shape[0], path.d))
    times, values, mask = path.times, path.values, path.jump_mask
    idx = np.searchsorted(times, t_arr, side="right") - 1
    idx = np.clip(idx, 0, len(times) - 1)
    for row, (i, s) in enumerate(zip(idx, t_arr)):
        if i >= len(times) - 1:
            out[row] = values[-1]
            continue
        if s <= times[i]:
            out[row] = values[i]
            continue
        if mask[i + 1]:
            out[row] = values[i]
        else:
            w = (s - times[i]) / (times[i + 1] - times[i])
            out[row] = (1.0 - w) * values[i] + w * values[i + 1]
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return out[0]
    return out


# --------------------------------------------------------------------------
# path functions
# --------------------------------------------------------------------------


@dataclass
class PathFunction:
    """Interpolation rule for a jump x -> y, parametrized over [0, 1].

    kind is one of linear, loglinear, hoff, custom.  q and eta declare the
    variation order of the interpolating paths and its modulus constant; the
    area map gives the log-signature area of the full traversal and must be
    consistent with sample (checked numerically in the tests).
    """

    kind: str
    q: float = 1.0
    eta: float = 1.0
    order: tuple = None
    default_samples: int = 8
    sample_fn: object = None
    area_fn: object = None
    domain_fn: object = None

    def admissible(self, x, y) -> bool:
        if self.domain_fn is not None:
            return bool(self.domain_fn(x, y))
        return True

    def sample(self, x, y, s: float) -> np.ndarray:
        """Point at parameter s in [0, 1] of the traversal from x to y."""
        x = np.asarray(x, float)
        y = np.asarray(y, float)
        if self.kind in ("linear", "loglinear"):
            # log-linear in the abelian vector group is the chord
            return x + s * (y - x)
        if self.kind == "hoff":
            return _hoff_sample(x, y, s, self._axes(len(x)))
        return np.asarray(self.sample_fn(x, y, s), float)

    def area_map(self, dx) -> np.ndarray:
        """Antisymmetric log area of the full traversal of a jump dx."""
        dx = np.asarray(dx, float)
        d = dx.shape[0]
        if self.kind in ("linear", "loglinear"):
            return np.zeros((d, d))
        if self.kind == "hoff":
            axes = self._axes(d)
            a = np.zeros((d, d))
            for pos_i in range(d):
                for pos_j in range(pos_i + 1, d):
                    i, j = axes[pos_i], axes[pos_j]
                    a[i, j] = 0.5 * dx[i] * dx[j]
                    a[j, i] = -a[i, j]
            return a
        if self.area_fn is not None:
            a = np.asarray(self.area_fn(dx), float)
            return 0.5 * (a - a.T)
        return _sampled_area(self, dx)

    def breakpoints(self, d: int):
        """Mandatory interior parameters (corner points of the traversal)."""
        if self.kind == "hoff":
            return tuple(k / d for k in range(1, d))
        return ()

    def _axes(self, d):
        if self.order is None:
            return tuple(range(d))
        if sorted(self.order) != list(range(d)):
            raise ValueError(f"hoff axis order {self.order} is not a "
                             f"permutation of 0..{d - 1}")
        return tuple(self.order)


def _hoff_sample(x, y, s, axes):
    d = len(x)
    dx = y - x
    out = x.astype(float).copy()
    pos = min(int(np.floor(s * d)), d - 1)
    frac = s * d - pos
    for k in range(pos):
        out[axes[k]] += dx[axes[k]]
    out[axes[pos]] += frac * dx[axes[pos]]
    return out


def _sampled_area(phi, dx, n_samples=256):
    """Left-point area of the sampled traversal, for custom path functions."""
    d = dx.shape[0]
    zero = np.zeros(d)
    params = np.union1d(np.linspace(0.0, 1.0, n_samples + 1),
                        phi.breakpoints(d))
    pts = np.array([phi.sample(zero, dx, s) for s in params])
    inc = np.diff(pts, axis=0)
    rel = pts[:-1] - pts[0]
    raw = np.einsum("ki,kj->ij", rel, inc)
    return 0.5 * (raw - raw.T)


def linear_phi() -> PathFunction:
    return PathFunction("linear", q=1.0, eta=1.0, default_samples=8)


def loglinear_phi() -> PathFunction:
    return PathFunction("loglinear", q=1.0, eta=1.0, default_samples=8)


def hoff_phi(order=None) -> PathFunction:
    # 1-variation of the axis path is at most sqrt(d) * |jump|, d <= 16
    return PathFunction("hoff", q=1.0, eta=4.0, order=order, default_samples=8)


def custom_phi(sample_fn, area_fn=None, q=1.0, eta=1.0, domain_fn=None,
               default_samples=32) -> PathFunction:
    return PathFunction("custom", q=q, eta=eta, sample_fn=sample_fn,
                        area_fn=area_fn, domain_fn=domain_fn,
                        default_samples=default_samples)


# --------------------------------------------------------------------------
# time changes
# --------------------------------------------------------------------------


@dataclass
class TimeChange:
    """Piecewise-linear monotone clock map given by knot pairs.

    source is non-decreasing (duplicated entries encode an instantaneous
    stretch, i.e. a jump of the map), target is strictly increasing.  forward
    evaluates right-continuously, inverse is the continuous inverse with
    plateaus over the stretched windows.
    """

    source: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.source, dtype=float)
        t = np.asarray(self.target, dtype=float)
        if s.shape != t.shape or s.ndim != 1 or s.shape[0] < 2:
            raise ValueError("source and target must be equal-length 1-d arrays")
        if not np.all(np.diff(s) >= 0):
            raise ValueError("source must be non-decreasing")
        if not np.all(np.diff(t) > 0):
            raise ValueError("target must be strictly increasing")
        self.source = s
        self.target = t

    @classmethod
    def identity(cls, t_end: float) -> "TimeChange":
        knots = np.array([0.0, float(t_end)])
        return cls(knots, knots.copy())

    def forward(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty_like(t_arr)
        src, tgt = self.source, self.target
        for row, s in enumerate(t_arr):
            j = np.searchsorted(src, s, side="right")
            if j <= 0:
                out[row] = tgt[0]
            elif j >= len(src):
                out[row] = tgt[-1]
            else:
                i = j - 1
                if src[j] > src[i] and s > src[i]:
                    w = (s - src[i]) / (src[j] - src[i])
                    out[row] = (1.0 - w) * tgt[i] + w * tgt[j]
                else:
                    out[row] = tgt[i]
        if np.isscalar(t) or np.asarray(t).ndim == 0:
            return float(out[0])
        return out

    def inverse(self, s):
        res = np.interp(np.asarray(s, dtype=float), self.target, self.source)
        if np.isscalar(s) or np.asarray(s).ndim == 0:
            return float(res)
        return res

    def sup_deviation(self) -> float:
        """max_t |forward(t) - t|, attained at knots for piecewise-linear maps."""
        return float(np.max(np.abs(self.target - self.source)))

    def has_jumps(self) -> bool:
        return bool(np.any(np.diff(self.source) == 0))


def apply_time_change(path: CadlagPath, tc: TimeChange,
                      direction: str = "forward") -> CadlagPath:
    """Compose a sampled path with a clock map.

    forward returns z(t) = path(tc.forward(t)) sampled on the pulled-back
    knot set; inverse returns z(s) = path(tc.inverse(s)), a pure relabeling
    of sample times.  Both are exact at sample points.
    """
    if direction == "inverse":
        new_times = np.asarray(tc.forward(path.times), dtype=float)
        return CadlagPath(new_times, path.values.copy(),
                          jump_mask=path.jump_mask.copy())
    if direction != "forward":
        raise ValueError("direction must be 'forward' or 'inverse'")
    pulled = tc.inverse(path.times)
    new_times, first_idx = np.unique(np.round(pulled, 12), return_index=True)
    values = np.empty((len(new_times), path.d))
    mask = np.zeros(len(new_times), dtype=bool)
    for row, t in enumerate(new_times):
        values[row] = value_at(path, tc.forward(t))
    if len(new_times) > 1:
        changed = np.any(values[1:] != values[:-1], axis=1)
        # a collapsed stretch of the source clock is an instantaneous jump
        collapsed = np.diff(first_idx) > 1
        inherited = path.jump_mask[first_idx[1:]]
        mask[1:] = changed & (collapsed | inherited)
    return CadlagPath(new_times, values, jump_mask=mask)


# --------------------------------------------------------------------------
# fictitious-time interpolation
# --------------------------------------------------------------------------


def interpolate(path: CadlagPath, phi: PathFunction, delta: float = 1.0,
                n_samples: int = None, r_base: float = 0.5,
                rescale: bool = True):
    """Continuous realization of the path with jumps opened into windows.

    Jumps are ranked by decreasing Euclidean size with ties toward the
    earlier time; jump of rank k obtains a stretched window of length
    delta * r_base**k filled with n_samples subsegments of phi (corner
    parameters of the traversal are always included).  The stretched clock is
    affinely mapped back onto [0, t_end] unless rescale is False.

    Returns (continuous_path, time_change); composing the continuous path
    with the time change recovers the input at its sample times, and the
    clock moves points by at most sum_k delta * r_base**k.
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if not 0.0 < r_base < 1.0:
        raise ValueError("r_base must lie in (0, 1)")
    if n_samples is None:
        n_samples = phi.default_samples
    if n_samples < 2:
        raise ValueError("need at least 2 samples per jump window")

    jumps = path.jump_indices()
    sizes = np.linalg.norm(path.values[jumps] - path.values[jumps - 1], axis=1) \
        if jumps.size else np.zeros(0)
    # rank by decreasing size; ties go to the earlier jump
    rank_order = np.lexsort((path.times[jumps], -sizes)) if jumps.size else []
    window = {}
    for rank, pos in enumerate(rank_order, start=1):
        window[int(jumps[pos])] = delta * r_base ** rank

    for i in jumps:
        if not phi.admissible(path.values[i - 1], path.values[i]):
            raise ValueError(f"jump at t={path.times[i]} outside the domain "
                             f"of the {phi.kind} path function")

    out_times = []
    out_values = []
    src_knots = []
    tgt_knots = []
    offset = 0.0
    for i in range(path.n):
        t_i = path.times[i]
        if i in window:
            w = window[i]
            offset += w
            tau = t_i + offset
            params = np.union1d(np.linspace(0.0, 1.0, n_samples + 1),
                                phi.breakpoints(path.d))
            x_prev = path.values[i - 1]
            x_cur = path.values[i]
            for s in params:
                out_times.append(tau - w + s * w)
                out_values.append(phi.sample(x_prev, x_cur, float(s)))
            src_knots.extend([t_i, t_i])
            tgt_knots.extend([tau - w, tau])
        else:
            tau = t_i + offset
            out_times.append(tau)
            out_values.append(path.values[i].copy())
            src_knots.append(t_i)
            tgt_knots.append(tau)

    out_times = np.asarray(out_times)
    out_values = np.asarray(out_values)
    src_knots = np.asarray(src_knots)
    tgt_knots = np.asarray(tgt_knots)

    if rescale and offset > 0.0 and path.t_end > 0.0:
        scale = path.t_end / (path.t_end + offset)
        out_times = out_times * scale
        tgt_knots = tgt_knots * scale

    cont = CadlagPath(out_times, out_values,
                      jump_mask=np.zeros(len(out_times), dtype=bool))
    return cont, TimeChange(src_knots, tgt_knots)


# --------------------------------------------------------------------------
# CSV round trip
# --------------------------------------------------------------------------
# Path files use the header t,v1..vd[,m11..mdd][,jump] with floats written to
# 17 significant digits, so a write/read round trip is bit-exact.


def _write_table(fh, columns, arrays):
    fh.write(",".join(columns) + "\n")
    stacked = np.column_stack(arrays)
    for row in stacked:
        fh.write(",".join("%.17g" % v for v in row) + "\n")


def write_path_csv(path: CadlagPath, file) -> None:
    cols = ["t"] + [f"v{k + 1}" for k in range(path.d)] + ["jump"]
    arrays = [path.times] + [path.values[:, k] for k in range(path.d)] \
        + [path.jump_mask.astype(float)]
    if hasattr(file, "write"):
        _write_table(file, cols, arrays)
    else:
        with open(file, "w") as fh:
            _write_table(fh, cols, arrays)


def _read_table(file):
    if hasattr(file, "read"):
        content = file.read()
    else:
        with open(file) as fh:
            content = fh.read()
    lines = [ln for ln in content.strip().splitlines() if ln.strip()]
    header = [c.strip() for c in lines[0].split(",")]
    data = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",",
                      ndmin=2)
    return header, data


def read_path_csv(file) -> CadlagPath:
    header, data = _read_table(file)
    if header[0] != "t":
        raise ValueError("path CSV must start with a t column")
    vcols = [k for k, name in enumerate(header) if name.startswith("v")]
    jcols = [k for k, name in enumerate(header) if name == "jump"]
    times = data[:, 0]
    values = data[:, vcols]
    mask = data[:, jcols[0]].astype(bool) if jcols else None
    return CadlagPath(times, values, jump_mask=mask)


def path_metadata(path: CadlagPath) -> str:
    return json.dumps({"d": path.d, "n": path.n,
                       "jumps": int(len(path.jump_indices()))})
