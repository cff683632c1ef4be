"""Level-2 lifts of sampled paths and operations on rough paths.

A RoughPath2 stores the running step-2 signature from time 0 as stacked
arrays (vecs holds x_t - x_0, mats the level-2 tensor).  Chord concatenation
of skeleton increments gives the canonical (Marcus) lift: every increment is
lifted as exp of its level-1 chord, so jump increments carry no area and the
antisymmetric part of the accumulated level-2 matches left-point Ito sums of
the skeleton.

young_pair builds the joint lift of a rough path with a lower-variation
perturbation on the merged grid; cross blocks equal left-point
Riemann-Stieltjes sums because both inputs traverse each cell simultaneously.
translate is the additive shift T_h, implemented by direct accumulation and
equal to the plus map applied to young_pair.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import algebra
from .algebra import G2Element, Lie2Element, exp2, hom_norm, log2
from .cadlag import CadlagPath, PathFunction, TimeChange, _as_times

__all__ = [
    "RoughPath2", "lift_piecewise_linear", "marcus_lift", "young_pair",
    "translate", "plus_map", "is_marcus_like", "log_increments",
    "interpolate_rough", "write_rough_csv", "read_rough_csv",
]


@dataclass
class RoughPath2:
    """Sampled G2-valued path: running signature plus a jump mask."""

    times: np.ndarray
    vecs: np.ndarray
    mats: np.ndarray
    jump_mask: np.ndarray = field(default=None)
    marcus_like: bool = True

    def __post_init__(self):
        self.times = _as_times(self.times)
        v = np.asarray(self.vecs, dtype=float)
        m = np.asarray(self.mats, dtype=float)
        n = self.times.shape[0]
        if v.ndim != 2 or v.shape[0] != n:
            raise ValueError("vecs must have shape (n, d)")
        d = v.shape[1]
        if d < 1 or d > algebra.MAX_DIM:
            raise ValueError(f"dimension {d} outside supported range")
        if m.shape != (n, d, d):
            raise ValueError("mats must have shape (n, d, d)")
        self.vecs = v
        self.mats = m
        if self.jump_mask is None:
            self.jump_mask = np.zeros(n, dtype=bool)
        else:
            mask = np.asarray(self.jump_mask, dtype=bool).copy()
            if mask.shape != self.times.shape:
                raise ValueError("jump_mask must match times in shape")
            mask[0] = False
            self.jump_mask = mask

    @property
    def n(self):
        return self.times.shape[0]

    @property
    def d(self):
        return self.vecs.shape[1]

    @property
    def t_end(self):
        return float(self.times[-1])

    def point(self, i: int) -> G2Element:
        return G2Element(self.vecs[i], self.mats[i])

    def increment(self, i: int, j: int) -> G2Element:
        """Group increment between samples i and j, in fused form."""
        dv = self.vecs[j] - self.vecs[i]
        return G2Element(dv, self.mats[j] - self.mats[i]
                         - np.outer(self.vecs[i], dv))

    def jump_indices(self):
        idx = np.nonzero(self.jump_mask)[0]
        if idx.size == 0:
            return idx
        keep = [i for i in idx
                if hom_norm(self.increment(i - 1, i)) > 0.0]
        return np.asarray(keep, dtype=int)


def _accumulate(u, a):
    """Running signature of increments with logs (u_k, a_k).

    vecs[k] = sum of u up to k; mats via the group product
    M_{k+1} = M_k + a_k + u_k (x) u_k / 2 + V_k (x) u_k.
    """
    m, d = u.shape
    vecs = np.zeros((m + 1, d))
    np.cumsum(u, axis=0, out=vecs[1:])
    v_before = np.zeros((m, d))
    v_before[1:] = vecs[1:m]
    terms = a + 0.5 * np.einsum("ki,kj->kij", u, u) \
        + np.einsum("ki,kj->kij", v_before, u)
    mats = np.zeros((m + 1, d, d))
    np.cumsum(terms, axis=0, out=mats[1:])
    return vecs, mats


def lift_piecewise_linear(path: CadlagPath) -> RoughPath2:
    """Chord-concatenation lift exp(dx_1) (x) ... (x) exp(dx_k)."""
    u = np.diff(path.values, axis=0)
    a = np.zeros((u.shape[0], path.d, path.d))
    vecs, mats = _accumulate(u, a)
    return RoughPath2(path.times.copy(), vecs, mats,
                      jump_mask=path.jump_mask.copy(), marcus_like=True)


def marcus_lift(path: CadlagPath) -> RoughPath2:
    """Marcus lift of a sampled semimartingale skeleton.

    Identical to lift_piecewise_linear: chords fix jumps to pure level-1
    increments and the accumulated area equals the left-point Ito sums.
    """
    return lift_piecewise_linear(path)


def log_increments(rough: RoughPath2):
    """Logs of the one-step increments: (u, area) with shapes (n-1, d), (n-1, d, d)."""
    u = np.diff(rough.vecs, axis=0)
    q = np.diff(rough.mats, axis=0) \
        - np.einsum("ki,kj->kij", rough.vecs[:-1], u)
    a = 0.5 * (q - q.transpose(0, 2, 1))
    return u, a


def is_marcus_like(rough: RoughPath2, tol: float = 1e-12) -> bool:
    """True when every marked jump increment has vanishing log area."""
    idx = np.nonzero(rough.jump_mask)[0]
    if idx.size == 0:
        return True
    u, a = log_increments(rough)
    return bool(np.all(np.abs(a[idx - 1]) <= tol))


def max_geometric_defect(rough: RoughPath2) -> float:
    sym = 0.5 * (rough.mats + rough.mats.transpose(0, 2, 1))
    outer = 0.5 * np.einsum("ki,kj->kij", rough.vecs, rough.vecs)
    return float(np.max(np.abs(sym - outer))) if rough.n else 0.0


# --------------------------------------------------------------------------
# refinement and joint lifts
# --------------------------------------------------------------------------


def _refine(rough: RoughPath2, new_times):
    """Rough path on the union grid.

    Interior points of jump cells sit at the left value; interior points of
    continuous cells follow the geodesic exp(s log(increment)).
    """
    union = np.union1d(rough.times, new_times)
    n = union.shape[0]
    d = rough.d
    vecs = np.empty((n, d))
    mats = np.empty((n, d, d))
    mask = np.zeros(n, dtype=bool)
    idx = np.searchsorted(rough.times, union, side="right") - 1
    idx = np.clip(idx, 0, rough.n - 1)
    for row, t in enumerate(union):
        i = idx[row]
        if t == rough.times[i] or i >= rough.n - 1:
            vecs[row] = rough.vecs[i]
            mats[row] = rough.mats[i]
            mask[row] = rough.jump_mask[i] and t == rough.times[i]
        elif rough.jump_mask[i + 1]:
            vecs[row] = rough.vecs[i]
            mats[row] = rough.mats[i]
        else:
            frac = (t - rough.times[i]) / (rough.times[i + 1] - rough.times[i])
            inc = log2(rough.increment(i, i + 1), tol=1e-6)
            g = algebra.group_mul(rough.point(i), exp2(inc.scale(frac)))
            vecs[row] = g.vec
            mats[row] = g.mat
    return RoughPath2(union, vecs, mats, jump_mask=mask,
                      marcus_like=rough.marcus_like)


def young_pair(rough: RoughPath2, h: CadlagPath) -> RoughPath2:
    """Joint lift S2(x, h) on the merged grid.

    Each merged cell is traversed simultaneously (jumps take the Marcus
    convention), so the hh block is the chord lift of h and the cross blocks
    are the left-point Young sums of x against h.
    """
    if abs(h.times[0] - rough.times[0]) > 0 or abs(h.t_end - rough.t_end) > 0:
        raise ValueError("young_pair requires matching time horizons")
    merged = np.union1d(rough.times, h.times)
    xr = _refine(rough, merged)
    from .cadlag import value_at
    hv = np.asarray([value_at(h, t) for t in merged])
    # at h's jump times the left limit belongs to the previous cell, which
    # value_at already encodes; increments below are plain differences
    ux, ax = log_increments(xr)
    uh = np.diff(hv, axis=0)
    d1, d2 = rough.d, h.d
    m = merged.shape[0] - 1
    u = np.concatenate([ux, uh], axis=1)
    a = np.zeros((m, d1 + d2, d1 + d2))
    a[:, :d1, :d1] = ax
    vecs, mats = _accumulate(u, a)
    h_mask = np.zeros(merged.shape[0], dtype=bool)
    pos = np.searchsorted(merged, h.times)
    h_mask[pos] = h.jump_mask
    mask = xr.jump_mask | h_mask
    return RoughPath2(merged, vecs, mats, jump_mask=mask,
                      marcus_like=rough.marcus_like)


def plus_map(joint: RoughPath2, d: int) -> RoughPath2:
    """Step-2 plus map: level 1 adds the blocks, level 2 sums all four blocks."""
    if joint.d != 2 * d:
        raise ValueError("joint lift must have dimension 2 d")
    vecs = joint.vecs[:, :d] + joint.vecs[:, d:]
    mats = (joint.mats[:, :d, :d] + joint.mats[:, :d, d:]
            + joint.mats[:, d:, :d] + joint.mats[:, d:, d:])
    return RoughPath2(joint.times.copy(), vecs, mats,
                      jump_mask=joint.jump_mask.copy(),
                      marcus_like=joint.marcus_like)


def translate(rough: RoughPath2, h: CadlagPath) -> RoughPath2:
    """Translation T_h: level 1 shifts by h, level 2 gains the Young cross terms.

    Direct accumulation of joint increments; algebraically identical to
    plus_map(young_pair(rough, h), d).
    """
    if h.d != rough.d:
        raise ValueError("translate requires matching dimensions")
    if abs(h.times[0] - rough.times[0]) > 0 or abs(h.t_end - rough.t_end) > 0:
        raise ValueError("translate requires matching time horizons")
    merged = np.union1d(rough.times, h.times)
    xr = _refine(rough, merged)
    from .cadlag import value_at
    hv = np.asarray([value_at(h, t) for t in merged])
    ux, ax = log_increments(xr)
    uh = np.diff(hv, axis=0)
    vecs, mats = _accumulate(ux + uh, ax)
    h_mask = np.zeros(merged.shape[0], dtype=bool)
    pos = np.searchsorted(merged, h.times)
    h_mask[pos] = h.jump_mask
    return RoughPath2(merged, vecs, mats, jump_mask=xr.jump_mask | h_mask,
                      marcus_like=rough.marcus_like)


# --------------------------------------------------------------------------
# fictitious-time interpolation of rough paths
# --------------------------------------------------------------------------


def interpolate_rough(rough: RoughPath2, phi: PathFunction, delta: float = 1.0,
                      n_samples: int = None, r_base: float = 0.5,
                      rescale: bool = True):
    """Continuous rough path with jump increments opened into phi windows.

    Log-linear windows traverse exp(s log(jump)) and reproduce the original
    endpoint exactly.  Vector path functions (linear, hoff, custom) require
    Marcus-like jumps; their windows are chord lifts of the sampled
    traversal, so a traversal with area (hoff) shifts the level-2 component
    downstream, which is the intended modified-lift semantics.

    Returns (continuous RoughPath2, TimeChange).
    """
    if delta <= 0.0:
        raise ValueError("delta must be positive")
    if not 0.0 < r_base < 1.0:
        raise ValueError("r_base must lie in (0, 1)")
    if n_samples is None:
        n_samples = phi.default_samples
    if n_samples < 2:
        raise ValueError("need at least 2 samples per jump window")

    jumps = rough.jump_indices()
    if phi.kind != "loglinear" and jumps.size and not is_marcus_like(rough):
        raise ValueError(f"{phi.kind} interpolation requires Marcus-like "
                         "jumps; use the log-linear path function")

    sizes = np.asarray([hom_norm(rough.increment(i - 1, i)) for i in jumps])
    rank_order = np.lexsort((rough.times[jumps], -sizes)) if jumps.size else []
    window = {}
    for rank, pos in enumerate(rank_order, start=1):
        window[int(jumps[pos])] = delta * r_base ** rank

    u_inc, a_inc = log_increments(rough)

    out_times = [rough.times[0]]
    logs_u = []
    logs_a = []
    offset = 0.0
    src_knots = [rough.times[0]]
    tgt_knots = [rough.times[0]]
    d = rough.d
    for i in range(1, rough.n):
        t_i = rough.times[i]
        if i in window:
            w = window[i]
            offset += w
            tau = t_i + offset
            params = np.union1d(np.linspace(0.0, 1.0, n_samples + 1),
                                phi.breakpoints(d))
            # corner sample pins the pre-jump plateau at the window start
            out_times.append(tau - w)
            logs_u.append(np.zeros(d))
            logs_a.append(np.zeros((d, d)))
            if phi.kind == "loglinear":
                lvec, larea = u_inc[i - 1], a_inc[i - 1]
                for k in range(len(params) - 1):
                    ds = params[k + 1] - params[k]
                    out_times.append(tau - w + params[k + 1] * w)
                    logs_u.append(ds * lvec)
                    logs_a.append(ds * larea)
            else:
                x0, x1 = rough.vecs[i - 1], rough.vecs[i]
                pts = np.asarray([phi.sample(x0, x1, float(s)) for s in params])
                for k in range(len(params) - 1):
                    out_times.append(tau - w + params[k + 1] * w)
                    logs_u.append(pts[k + 1] - pts[k])
                    logs_a.append(np.zeros((d, d)))
            src_knots.extend([t_i, t_i])
            tgt_knots.extend([tau - w, tau])
        else:
            tau = t_i + offset
            out_times.append(tau)
            logs_u.append(u_inc[i - 1])
            logs_a.append(a_inc[i - 1])
            src_knots.append(t_i)
            tgt_knots.append(tau)

    out_times = np.asarray(out_times)
    src_knots = np.asarray(src_knots)
    tgt_knots = np.asarray(tgt_knots)
    if rescale and offset > 0.0 and rough.t_end > 0.0:
        scale = rough.t_end / (rough.t_end + offset)
        out_times = out_times * scale
        tgt_knots = tgt_knots * scale

    vecs, mats = _accumulate(np.asarray(logs_u).reshape(-1, d),
                             np.asarray(logs_a).reshape(-1, d, d))
    cont = RoughPath2(out_times, vecs, mats,
                      jump_mask=np.zeros(len(out_times), dtype=bool),
                      marcus_like=True)
    return cont, TimeChange(src_knots, tgt_knots)


# --------------------------------------------------------------------------
# CSV round trip
# --------------------------------------------------------------------------


def rough_metadata(rough: RoughPath2) -> dict:
    return {
        "d": rough.d,
        "n": rough.n,
        "marcus_like": bool(rough.marcus_like),
        "jump_indices": [int(i) for i in np.nonzero(rough.jump_mask)[0]],
    }


def write_rough_csv(rough: RoughPath2, file, meta_file=None) -> None:
    """Write t, v1..vd, m11..mdd rows plus a JSON metadata side file."""
    d = rough.d
    cols = ["t"] + [f"v{k + 1}" for k in range(d)] \
        + [f"m{i + 1}{j + 1}" for i in range(d) for j in range(d)]
    arrays = [rough.times] + [rough.vecs[:, k] for k in range(d)] \
        + [rough.mats[:, i, j] for i in range(d) for j in range(d)]
    from .cadlag import _write_table
    if hasattr(file, "write"):
        _write_table(file, cols, arrays)
    else:
        with open(file, "w") as fh:
            _write_table(fh, cols, arrays)
        if meta_file is None:
            meta_file = str(file) + ".meta.json"
    if meta_file is not None:
        with open(meta_file, "w") as fh:
            json.dump(rough_metadata(rough), fh, indent=1)


def read_rough_csv(file, meta_file=None) -> RoughPath2:
    from .cadlag import _read_table
    header, data = _read_table(file)
    if header[0] != "t":
        raise ValueError("rough CSV must start with a t column")
    vcols = [k for k, name in enumerate(header)
             if name.startswith("v") and name != "v"]
    mcols = [k for k, name in enumerate(header) if name.startswith("m")]
    d = len(vcols)
    if len(mcols) != d * d:
        raise ValueError("rough CSV needs d^2 level-2 columns")
    times = data[:, 0]
    vecs = data[:, vcols]
    mats = data[:, mcols].reshape(-1, d, d)
    mask = None
    marcus = True
    meta_path = meta_file
    if meta_path is None and not hasattr(file, "read"):
        candidate = str(file) + ".meta.json"
        import os
        meta_path = candidate if os.path.exists(candidate) else None
    if meta_path is not None:
        with open(meta_path) as fh:
            meta = json.load(fh)
        marcus = bool(meta.get("marcus_like", True))
        mask = np.zeros(len(times), dtype=bool)
        mask[np.asarray(meta.get("jump_indices", []), dtype=int)] = True
    return RoughPath2(times, vecs, mats, jump_mask=mask, marcus_like=marcus)
