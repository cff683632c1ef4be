"""Semimartingale simulation and path functionals.

Models are small frozen configs; simulate() turns (model, n, seed) into a
sampled path with a jump mask.  Randomness comes from a counter-based
generator keyed by (seed, stream index), so Monte Carlo batches can draw
sample k from stream (seed, k) in any order, on any number of workers, and
always see the same numbers.

Levy paths keep the diffusion on the regular grid: jump times are drawn from
exponential gaps and inserted as extra grid points whose incoming increment
is the jump alone, while the Brownian and drift parts accrue into the next
regular sample.  The skeleton therefore separates jump increments from
diffusion increments exactly, at the cost of freezing the continuous part
between regular grid points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cadlag import CadlagPath, PathFunction, value_at

__all__ = [
    "BrownianMotion", "LevyFinite", "RandomWalk", "NullArray",
    "MartingaleCLT", "SamplePath", "stream", "model_from_spec", "simulate",
    "bracket", "bracket_final", "jump_truncate", "approximate",
    "dyadic_partition", "ucv_surrogate", "null_array_check",
]


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based generator for sample `index` of experiment `seed`."""
    key = [int(seed) % (1 << 64), int(index) % (1 << 64)]
    return np.random.Generator(np.random.Philox(key=key))


def model_from_spec(spec: dict):
    """Build a model from a plain config dict (CLI and experiment configs).

    kind selects the class; remaining keys are constructor fields.  A
    brownian spec may give "rho" instead of "sigma" for an equicorrelated
    mixing matrix.
    """
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "brownian":
        rho = spec.pop("rho", None)
        if rho is not None:
            d = int(spec.get("d", 1))
            cov = np.full((d, d), float(rho)) + (1.0 - rho) * np.eye(d)
            spec["sigma"] = np.linalg.cholesky(cov)
        return BrownianMotion(**spec)
    if kind == "levy":
        return LevyFinite(**spec)
    if kind == "walk":
        return RandomWalk(**spec)
    if kind == "null_array":
        base = spec.pop("base", {})
        if isinstance(base, dict):
            base = LevyFinite(**base)
        return NullArray(base=base, **spec)
    if kind == "martingale_clt":
        return MartingaleCLT(**spec)
    raise ValueError(f"unknown model kind {kind!r}")


def _draw_jumps(rng, law, size: int, d: int) -> np.ndarray:
    if callable(law):
        out = np.asarray(law(rng, size), dtype=float)
        if out.shape != (size, d):
            raise ValueError("jump law returned shape "
                             f"{out.shape}, expected {(size, d)}")
        return out
    kind = law.get("kind", "normal")
    scale = float(law.get("scale", 1.0))
    if kind == "normal":
        return scale * rng.normal(size=(size, d))
    if kind == "uniform":
        return scale * rng.uniform(-1.0, 1.0, size=(size, d))
    if kind == "rademacher":
        return scale * rng.choice([-1.0, 1.0], size=(size, d))
    raise ValueError(f"unknown jump law kind {kind!r}")


def _increment_law(rng, law, size: int, d: int) -> np.ndarray:
    """Unit-variance step laws for walk-type models."""
    if callable(law):
        return np.asarray(law(rng, size), dtype=float).reshape(size, d)
    if law == "rademacher":
        return rng.choice([-1.0, 1.0], size=(size, d))
    if law == "gaussian":
        return rng.normal(size=(size, d))
    if law == "uniform":
        return rng.uniform(-math.sqrt(3.0), math.sqrt(3.0), size=(size, d))
    raise ValueError(f"unknown increment law {law!r}")


def _mixing(sigma, d: int) -> np.ndarray:
    s = np.asarray(sigma, dtype=float)
    if s.ndim == 0:
        return float(s) * np.eye(d)
    if s.shape != (d, d):
        raise ValueError(f"sigma must be scalar or ({d}, {d})")
    return s


def _psd_factor(a: np.ndarray) -> np.ndarray:
    """L with L L^T = a, exact for singular PSD inputs (no jitter)."""
    w, V = np.linalg.eigh(a)
    return V * np.sqrt(np.clip(w, 0.0, None))


@dataclass(frozen=True)
class BrownianMotion:
    """Brownian motion dX = sigma dW; sigma scalar or (d, d) mixing matrix."""

    sigma: object = 1.0
    d: int = 1
    T: float = 1.0
    name = "brownian"

    def validate(self):
        _mixing(self.sigma, self.d)
        if self.T <= 0:
            raise ValueError("T must be positive")


@dataclass(frozen=True)
class LevyFinite:
    """Finite-activity Levy process: drift + diffusion + compound Poisson.

    diffusion is the covariance matrix of the Brownian part (PSD); jumps
    arrive at rate lam with sizes drawn from jump_law, a dict like
    {"kind": "normal", "scale": 0.3} or a callable (rng, k) -> (k, d).
    """

    drift: object = 0.0
    diffusion: object = 0.0
    lam: float = 0.0
    jump_law: object = None
    d: int = 1
    T: float = 1.0
    name = "levy"

    def validate(self):
        b = np.broadcast_to(np.asarray(self.drift, float), (self.d,))
        a = np.asarray(self.diffusion, dtype=float)
        if a.ndim == 0:
            a = float(a) * np.eye(self.d)
        if a.shape != (self.d, self.d):
            raise ValueError("diffusion must be scalar or (d, d)")
        if not np.allclose(a, a.T, atol=1e-12):
            raise ValueError("diffusion matrix must be symmetric")
        if np.linalg.eigvalsh(a).min() < -1e-10:
            raise ValueError("diffusion matrix must be positive semidefinite")
        if self.lam < 0:
            raise ValueError("jump intensity must be nonnegative")
        if self.lam > 0 and self.jump_law is None:
            raise ValueError("jump_law required when lam > 0")
        if self.T <= 0:
            raise ValueError("T must be positive")
        return b, a


@dataclass(frozen=True)
class RandomWalk:
    """Donsker-rescaled walk: m = n-1 steps of variance 1/m each."""

    law: object = "rademacher"
    scaling: object = "sqrt"
    d: int = 1
    T: float = 1.0
    name = "walk"

    def step_scale(self, m: int) -> float:
        if self.scaling == "sqrt":
            return 1.0 / math.sqrt(m)
        return float(self.scaling(m)) if callable(self.scaling) \
            else float(self.scaling)

    def validate(self):
        if self.T <= 0:
            raise ValueError("T must be positive")


@dataclass(frozen=True)
class NullArray:
    """Triangular array whose row-n steps are Levy increments over T/(n-1).

    Row sums reproduce the base process in law; the steps satisfy the
    null-array smallness condition sup_k E[|xi_nk| /\\ 1] -> 0 as rows grow.
    """

    base: LevyFinite = field(default_factory=LevyFinite)
    name = "null_array"

    @property
    def d(self):
        return self.base.d

    @property
    def T(self):
        return self.base.T

    def validate(self):
        self.base.validate()


@dataclass(frozen=True)
class MartingaleCLT:
    """Scaled Rademacher array with deterministic bracket limit t * Id."""

    d: int = 1
    T: float = 1.0
    name = "martingale_clt"

    def validate(self):
        if self.T <= 0:
            raise ValueError("T must be positive")


@dataclass
class SamplePath:
    """Simulated skeleton plus provenance (model, seed, stream, grid)."""

    path: CadlagPath
    model: str
    seed: int
    index: int
    n: int
    grid: np.ndarray

    @property
    def times(self):
        return self.path.times

    @property
    def values(self):
        return self.path.values

    @property
    def jump_mask(self):
        return self.path.jump_mask

    @property
    def d(self):
        return self.path.d


def _jump_times(rng, lam: float, T: float, grid: np.ndarray) -> np.ndarray:
    """Exponential-gap arrival times in (0, T), nudged off the grid."""
    if lam <= 0:
        return np.empty(0)
    out = []
    t = rng.exponential(1.0 / lam)
    while t < T:
        out.append(t)
        t += rng.exponential(1.0 / lam)
    if not out:
        return np.empty(0)
    taus = np.asarray(out)
    # collisions with the regular grid would break strict monotonicity
    eps = 1e-9 * T
    hit = np.isin(np.round(taus / eps), np.round(grid / eps))
    taus[hit] += eps
    return taus[taus < T]


def simulate(model, n: int, seed: int, index: int = 0) -> SamplePath:
    """Sample one path of the model on an n-point regular grid."""
    if n < 2:
        raise ValueError("need at least 2 grid points")
    if not hasattr(model, "validate"):
        raise TypeError(f"unknown model type {type(model).__name__}")
    model.validate()
    rng = stream(seed, index)
    grid = np.linspace(0.0, model.T, n)
    m = n - 1
    dt = model.T / m

    if isinstance(model, BrownianMotion):
        L = _mixing(model.sigma, model.d)
        inc = rng.normal(size=(m, model.d)) @ L.T * math.sqrt(dt)
        values = np.vstack([np.zeros(model.d), np.cumsum(inc, axis=0)])
        path = CadlagPath(grid, values, jump_mask=np.zeros(n, dtype=bool))
        return SamplePath(path, model.name, seed, index, n, grid)

    if isinstance(model, LevyFinite):
        b, a = model.validate()
        L = _psd_factor(a)
        diff = rng.normal(size=(m, model.d)) @ L.T * math.sqrt(dt)
        base = np.vstack([np.zeros(model.d),
                          np.cumsum(diff + b * dt, axis=0)])
        taus = _jump_times(rng, model.lam, model.T, grid)
        jumps = _draw_jumps(rng, model.jump_law, taus.size, model.d) \
            if taus.size else np.zeros((0, model.d))
        times = np.concatenate([grid, taus])
        order = np.argsort(times, kind="stable")
        times = times[order]
        mask = np.concatenate([np.zeros(n, bool), np.ones(taus.size, bool)])
        mask = mask[order]
        # continuous part frozen at the last regular point, jumps cumulative
        last_reg = np.searchsorted(grid, times, side="right") - 1
        values = base[last_reg]
        if taus.size:
            jump_cum = np.zeros((times.size, model.d))
            jrows = np.nonzero(mask)[0]
            jump_cum[jrows] = jumps[np.argsort(taus, kind="stable")]
            values = values + np.cumsum(jump_cum, axis=0)
        path = CadlagPath(times, values, jump_mask=mask)
        return SamplePath(path, model.name, seed, index, n, grid)

    if isinstance(model, RandomWalk):
        steps = _increment_law(rng, model.law, m, model.d)
        values = np.vstack([np.zeros(model.d),
                            np.cumsum(model.step_scale(m) * steps, axis=0)])
        path = CadlagPath(grid, values, jump_mask=_all_jump_mask(n))
        return SamplePath(path, model.name, seed, index, n, grid)

    if isinstance(model, NullArray):
        b, a = model.base.validate()
        L = _psd_factor(a)
        h = model.T / m
        steps = b * h + rng.normal(size=(m, model.d)) @ L.T * math.sqrt(h)
        counts = rng.poisson(model.base.lam * h, size=m)
        total = int(counts.sum())
        if total:
            all_jumps = _draw_jumps(rng, model.base.jump_law, total, model.d)
            split = np.repeat(np.arange(m), counts)
            for k in range(total):
                steps[split[k]] += all_jumps[k]
        values = np.vstack([np.zeros(model.d), np.cumsum(steps, axis=0)])
        path = CadlagPath(grid, values, jump_mask=_all_jump_mask(n))
        return SamplePath(path, model.name, seed, index, n, grid)

    if isinstance(model, MartingaleCLT):
        steps = rng.choice([-1.0, 1.0], size=(m, model.d)) / math.sqrt(m)
        values = np.vstack([np.zeros(model.d), np.cumsum(steps, axis=0)])
        path = CadlagPath(grid, values, jump_mask=_all_jump_mask(n))
        return SamplePath(path, model.name, seed, index, n, grid)

    raise TypeError(f"unknown model type {type(model).__name__}")


def _all_jump_mask(n: int) -> np.ndarray:
    mask = np.ones(n, dtype=bool)
    mask[0] = False
    return mask


def _as_path(x) -> CadlagPath:
    return x.path if isinstance(x, SamplePath) else x


# --------------------------------------------------------------------------
# path functionals
# --------------------------------------------------------------------------


def bracket(x) -> CadlagPath:
    """Running realized covariation sum(dX (x) dX), flattened to d^2 columns.

    Every skeleton increment contributes, jump or chord: this is the
    discrete bracket of the sampled path.  Reshape a row to (d, d) or use
    bracket_final for the endpoint matrix.
    """
    p = _as_path(x)
    dv = np.diff(p.values, axis=0)
    outer = dv[:, :, None] * dv[:, None, :]
    run = np.vstack([np.zeros((1, p.d * p.d)),
                     np.cumsum(outer.reshape(-1, p.d * p.d), axis=0)])
    return CadlagPath(p.times, run, jump_mask=p.jump_mask.copy())


def bracket_final(x) -> np.ndarray:
    p = _as_path(x)
    dv = np.diff(p.values, axis=0)
    return np.einsum("ki,kj->ij", dv, dv)


def jump_truncate(x, delta: float):
    """Cap marked jumps at magnitude delta, keeping their direction.

    Removes (1 - delta/|dX|)^+ dX from every jump; increments with
    |dX| <= delta are untouched, and so is the continuous part.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    p = _as_path(x)
    dv = np.diff(p.values, axis=0)
    removed = np.zeros_like(dv)
    jrows = np.nonzero(p.jump_mask[1:])[0]
    if jrows.size:
        sz = np.linalg.norm(dv[jrows], axis=1)
        big = jrows[sz > delta]
        if big.size:
            factor = 1.0 - delta / np.linalg.norm(dv[big], axis=1)
            removed[big] = factor[:, None] * dv[big]
    values = p.values - np.vstack([np.zeros(p.d),
                                   np.cumsum(removed, axis=0)])
    out = CadlagPath(p.times, values, jump_mask=p.jump_mask.copy())
    if isinstance(x, SamplePath):
        return SamplePath(out, x.model, x.seed, x.index, x.n, x.grid)
    return out


def _check_partition(p: CadlagPath, D) -> np.ndarray:
    D = np.asarray(D, dtype=float)
    if D.ndim != 1 or D.size < 2:
        raise ValueError("partition needs at least 2 points")
    if not np.all(np.diff(D) > 0):
        raise ValueError("partition must be strictly increasing")
    pos = np.searchsorted(p.times, D)
    pos = np.clip(pos, 0, p.n - 1)
    ok = np.abs(p.times[pos] - D) <= 1e-9 * max(1.0, p.times[-1])
    if not np.all(ok):
        raise ValueError("partition points must lie on the path grid")
    return p.times[pos]


def approximate(x, D, scheme: str = "piecewise_constant",
                phi: PathFunction = None):
    """Partition-level approximation of a sampled path.

    piecewise_constant freezes the path between partition points (all
    increments become jumps); phi_interp traverses phi across each cell,
    emitting the interior breakpoints of the traversal, and is continuous.
    """
    p = _as_path(x)
    D = _check_partition(p, D)
    vals = value_at(p, D)
    if scheme == "piecewise_constant":
        out = CadlagPath(D, vals, jump_mask=_all_jump_mask(D.size))
    elif scheme == "phi_interp":
        if phi is None:
            raise ValueError("phi_interp needs a path function")
        inner = phi.breakpoints(p.d)
        times, rows = [D[0]], [vals[0]]
        for k in range(D.size - 1):
            for s in inner:
                times.append(D[k] + s * (D[k + 1] - D[k]))
                rows.append(phi.sample(vals[k], vals[k + 1], s))
            times.append(D[k + 1])
            rows.append(vals[k + 1])
        out = CadlagPath(np.asarray(times), np.asarray(rows),
                         jump_mask=np.zeros(len(times), dtype=bool))
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    if isinstance(x, SamplePath):
        return SamplePath(out, x.model, x.seed, x.index, x.n, D)
    return out


def dyadic_partition(x: SamplePath, k: int) -> np.ndarray:
    """2^k-cell sub-partition of the sample's regular grid."""
    cells = x.grid.size - 1
    step = cells // (1 << k)
    if step < 1 or cells % (1 << k):
        raise ValueError(f"grid with {cells} cells has no 2^{k} split")
    return x.grid[::step]


# --------------------------------------------------------------------------
# diagnostics
# --------------------------------------------------------------------------


def _drift_variation(model) -> float:
    if isinstance(model, LevyFinite):
        b = np.broadcast_to(np.asarray(model.drift, float), (model.d,))
        return float(np.sum(np.abs(b)) * model.T)
    if isinstance(model, NullArray):
        return _drift_variation(model.base)
    return 0.0


def ucv_surrogate(model, ns, samples: int, seed: int) -> dict:
    """sup_n E[trace bracket + drift variation] over the mesh ladder.

    A bounded value across rows is the numerical stand-in for the uniformly
    controlled variations condition; it certifies nothing but flags models
    whose bracket mass grows with refinement.
    """
    per_n = {}
    for n in ns:
        acc = 0.0
        for k in range(samples):
            sp = simulate(model, n, seed, index=k)
            acc += float(np.trace(bracket_final(sp)))
        per_n[int(n)] = acc / samples + _drift_variation(model)
    return {"per_n": per_n, "sup": max(per_n.values())}


def null_array_check(model, ns, samples: int, seed: int) -> list:
    """E[|step| /\\ 1] per row; must decay toward 0 along the ladder."""
    out = []
    for j, n in enumerate(ns):
        acc = 0.0
        cnt = 0
        for k in range(samples):
            sp = simulate(model, n, seed, index=j * samples + k)
            steps = np.diff(sp.values, axis=0)
            acc += float(np.minimum(np.linalg.norm(steps, axis=1), 1.0).sum())
            cnt += steps.shape[0]
        out.append(acc / cnt)
    return out
