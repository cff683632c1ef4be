"""Step-2 truncated tensor algebra and the free nilpotent group of step 2.

Elements are truncated at tensor level 2, so a group element is determined by
its increment vector (level 1) and a d x d matrix (level 2).  Group elements
satisfy the geometricity constraint sym(mat) = vec (x) vec / 2; their logs are
Lie elements (vector, antisymmetric area).  Dimension d is a runtime value,
capped at MAX_DIM so level-2 storage stays O(d^2)-small.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MAX_DIM = 16

# default tolerance for the geometricity guard in log2
GEOMETRIC_TOL = 1e-8


def _check_dim(d):
    if d < 1 or d > MAX_DIM:
        raise ValueError(f"dimension {d} outside supported range 1..{MAX_DIM}")


def _as_vec(v):
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("vec must be one-dimensional")
    _check_dim(v.shape[0])
    return v


def _as_mat(m, d):
    m = np.asarray(m, dtype=float)
    if m.shape != (d, d):
        raise ValueError(f"mat must have shape ({d}, {d}), got {m.shape}")
    return m


@dataclass(frozen=True)
class Tensor2:
    """Generic element of the step-2 truncated tensor algebra.

    Carries a scalar, a level-1 vector and a level-2 matrix with no
    geometricity constraint, e.g. for Ito-type (non-geometric) intermediates.
    """

    scalar: float
    vec: np.ndarray
    mat: np.ndarray

    def __post_init__(self):
        v = _as_vec(self.vec)
        object.__setattr__(self, "scalar", float(self.scalar))
        object.__setattr__(self, "vec", v)
        object.__setattr__(self, "mat", _as_mat(self.mat, v.shape[0]))

    @property
    def d(self):
        return self.vec.shape[0]

    def add(self, other: "Tensor2") -> "Tensor2":
        return Tensor2(self.scalar + other.scalar, self.vec + other.vec,
                       self.mat + other.mat)

    def mul(self, other: "Tensor2") -> "Tensor2":
        # truncated tensor product: drop everything above level 2
        return Tensor2(
            self.scalar * other.scalar,
            self.scalar * other.vec + other.scalar * self.vec,
            self.scalar * other.mat + other.scalar * self.mat
            + np.outer(self.vec, other.vec),
        )

    def scale(self, c: float) -> "Tensor2":
        return Tensor2(c * self.scalar, c * self.vec, c * self.mat)


@dataclass(frozen=True)
class G2Element:
    """Group element: level-1 vector and level-2 matrix, scalar part 1."""

    vec: np.ndarray
    mat: np.ndarray

    def __post_init__(self):
        v = _as_vec(self.vec)
        object.__setattr__(self, "vec", v)
        object.__setattr__(self, "mat", _as_mat(self.mat, v.shape[0]))

    @property
    def d(self):
        return self.vec.shape[0]

    def as_tensor(self) -> Tensor2:
        return Tensor2(1.0, self.vec, self.mat)


@dataclass(frozen=True)
class Lie2Element:
    """Lie element: level-1 vector and exactly antisymmetric area matrix.

    The constructor keeps only the strict upper triangle of the supplied area
    and mirrors it, so area + area.T == 0 holds exactly in floating point.
    """

    vec: np.ndarray
    area: np.ndarray = field(default=None)

    def __post_init__(self):
        v = _as_vec(self.vec)
        d = v.shape[0]
        a = np.zeros((d, d)) if self.area is None else _as_mat(self.area, d)
        upper = np.triu(a, 1)
        object.__setattr__(self, "vec", v)
        object.__setattr__(self, "area", upper - upper.T)

    @property
    def d(self):
        return self.vec.shape[0]

    def add(self, other: "Lie2Element") -> "Lie2Element":
        return Lie2Element(self.vec + other.vec, self.area + other.area)

    def scale(self, c: float) -> "Lie2Element":
        return Lie2Element(c * self.vec, c * self.area)


def identity(d: int) -> G2Element:
    _check_dim(d)
    return G2Element(np.zeros(d), np.zeros((d, d)))


def group_mul(g: G2Element, h: G2Element) -> G2Element:
    """Truncated tensor product of two group elements."""
    return G2Element(g.vec + h.vec, g.mat + h.mat + np.outer(g.vec, h.vec))


def group_inv(g: G2Element) -> G2Element:
    """Group inverse: (1 + v + m)^-1 truncated at level 2."""
    return G2Element(-g.vec, -g.mat + np.outer(g.vec, g.vec))


def exp2(x: Lie2Element) -> G2Element:
    """Group exponential: exp(v + a) = 1 + v + a + v (x) v / 2."""
    return G2Element(x.vec.copy(), x.area + 0.5 * np.outer(x.vec, x.vec))


def geometric_defect(g: G2Element) -> float:
    """Max-abs deviation of sym(mat) from vec (x) vec / 2."""
    sym = 0.5 * (g.mat + g.mat.T)
    return float(np.max(np.abs(sym - 0.5 * np.outer(g.vec, g.vec))))


def log2(g: G2Element, tol: float = GEOMETRIC_TOL) -> Lie2Element:
    """Group logarithm.  Rejects non-geometric input beyond `tol`."""
    defect = geometric_defect(g)
    if not defect <= tol:
        raise ValueError(
            f"log2: element is not geometric (symmetric-part defect {defect:.3e} "
            f"exceeds tolerance {tol:.1e})")
    return Lie2Element(g.vec.copy(), 0.5 * (g.mat - g.mat.T))


def cbh(a: Lie2Element, b: Lie2Element) -> Lie2Element:
    """Campbell-Baker-Hausdorff product, exact at step 2.

    log(exp(a) exp(b)) = a + b + [a1, b1]/2 where a1, b1 are the level-1
    parts; higher brackets vanish in the step-2 quotient.
    """
    half_bracket = 0.5 * (np.outer(a.vec, b.vec) - np.outer(b.vec, a.vec))
    return Lie2Element(a.vec + b.vec, a.area + b.area + half_bracket)


def dilate(g: G2Element, lam: float) -> G2Element:
    """Dilation: level k scales by lam^k."""
    return G2Element(lam * g.vec, lam * lam * g.mat)


def hom_norm(g: G2Element) -> float:
    """Homogeneous norm N(g) = max(|vec|_2, sqrt(2 * |upper(area)|_F)).

    area is the antisymmetric part of mat (the log area); upper(area) keeps
    the strict upper triangle, so a pure-area element with coefficient c on
    one basis plane has norm sqrt(2 c).  Equivalent to the intrinsic group
    norm; this normalization makes exp of a unit vector and exp of a
    half-coefficient unit plane both have norm 1.
    """
    a = 0.5 * (g.mat - g.mat.T)
    upper_sq = 0.0
    d = a.shape[0]
    if d > 1:
        iu = np.triu_indices(d, 1)
        upper_sq = float(np.sum(a[iu] ** 2))
    level1 = float(np.linalg.norm(g.vec))
    level2 = float(np.sqrt(2.0 * np.sqrt(upper_sq)))
    return max(level1, level2)


def group_incr(g: G2Element, h: G2Element) -> G2Element:
    """Increment g^-1 h in fused form.

    Algebraically equal to group_mul(group_inv(g), h) but evaluates
    h.mat - g.mat before any outer product, so identical inputs give the
    identity exactly (the homogeneous norm takes a fourth root of level-2
    entries, which would amplify cancellation residue).
    """
    dv = h.vec - g.vec
    return G2Element(dv, h.mat - g.mat - np.outer(g.vec, dv))


def hom_dist(g: G2Element, h: G2Element) -> float:
    """Left-invariant homogeneous distance N(g^-1 h)."""
    return hom_norm(group_incr(g, h))
