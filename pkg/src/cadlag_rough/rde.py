"""Differential equations driven by sampled rough paths.

The continuous-driver scheme is a step-2 log-ODE: per grid increment with
log (u, a) the state advances along the frozen field

    W(y) = sum_i u_i V_i(y) + sum_{i<j} a_ij [V_i, V_j](y)

integrated over unit time by classical RK4.  With the log-linear path
function a jump increment is pure level-1, so the jump rule reduces to the
flow along sum dx_i V_i, which is exactly the direct jump-diffusion scheme;
the two solvers therefore agree to integrator error.

Substeps per increment: base * max(1, ceil(increment hom-norm / cap)).
Keeping the per-substep field magnitude near cap/base makes the fourth-order
error per unit increment around 1e-7 at the defaults (base 4, cap 0.25).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .cadlag import CadlagPath, PathFunction, TimeChange
from .lift import RoughPath2, interpolate_rough, log_increments

__all__ = [
    "VectorFields", "RdeSolution", "RdeBlowUp", "flow_exp",
    "solve_canonical_rde", "solve_marcus_sde", "stack_drivers", "flow_map",
    "linear_fields", "rotation_fields", "poly2_fields", "sine_fields",
    "zero_fields", "fields_from_spec",
]

BLOWUP_LIMIT = 1e12


class RdeBlowUp(RuntimeError):
    """State left the admissible region; .time holds the driver clock value."""

    def __init__(self, time):
        super().__init__(f"solution blew up near t={time}")
        self.time = float(time)


@dataclass
class VectorFields:
    """Driving fields V_1..V_d on R^e with explicit Jacobians.

    eval_fn(y) returns the (e, d) matrix of columns V_i(y); jac_fn(y) the
    (e, d, e) array with jac[r, i, s] = dV_i(y)_r / dy_s.  kernel, when set,
    names a compiled stepper payload.
    """

    e: int
    d: int
    eval_fn: callable
    jac_fn: callable
    gamma: float = math.inf
    kernel: tuple = None
    name: str = "custom"

    def eval(self, y):
        return np.asarray(self.eval_fn(np.asarray(y, dtype=float)), dtype=float)

    def jacobian(self, y):
        return np.asarray(self.jac_fn(np.asarray(y, dtype=float)), dtype=float)

    def bracket(self, y, i: int, j: int):
        """[V_i, V_j](y) = DV_j(y) V_i(y) - DV_i(y) V_j(y)."""
        V = self.eval(y)
        J = self.jacobian(y)
        return J[:, j, :] @ V[:, i] - J[:, i, :] @ V[:, j]

    def step_field(self, u, a):
        """The frozen log-ODE field for one increment with log (u, a)."""
        u = np.asarray(u, dtype=float)
        a = np.asarray(a, dtype=float)

        def W(y):
            V = self.eval(y)
            out = V @ u
            if np.any(a):
                J = self.jacobian(y)
                out = out + np.einsum("ij,rjs,si->r", a, J, V)
            return out

        return W


@dataclass
class RdeSolution:
    times: np.ndarray
    states: np.ndarray
    time_change: TimeChange = None
    diagnostics: dict = field(default_factory=dict)
    internal_times: np.ndarray = None
    internal_states: np.ndarray = None

    @property
    def y_end(self):
        return self.states[-1]


# --------------------------------------------------------------------------
# built-in fields
# --------------------------------------------------------------------------


def linear_fields(A, b=None) -> VectorFields:
    """Affine fields V_i(y) = A_i y + b_i; A has shape (d, e, e)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 3 or A.shape[1] != A.shape[2]:
        raise ValueError("A must have shape (d, e, e)")
    d, e = A.shape[0], A.shape[1]
    b = np.zeros((d, e)) if b is None else np.asarray(b, dtype=float)
    if b.shape != (d, e):
        raise ValueError("b must have shape (d, e)")
    jac = A.transpose(1, 0, 2).copy()
    return VectorFields(
        e, d,
        eval_fn=lambda y: (A @ y + b).T,
        jac_fn=lambda y: jac,
        kernel=("linear", A, b), name="linear")


def rotation_fields(omega: float = 1.0) -> VectorFields:
    """Single field generating a rotation of the plane at rate omega."""
    A = np.array([[[0.0, -omega], [omega, 0.0]]])
    return linear_fields(A)


def zero_fields(e: int, d: int) -> VectorFields:
    return linear_fields(np.zeros((d, e, e)))


def poly2_fields(c0, c1=None, c2=None) -> VectorFields:
    """Quadratic fields V_i(y)_r = c0[i,r] + c1[i,r,:].y + y.c2[i,r].y."""
    c0 = np.asarray(c0, dtype=float)
    d, e = c0.shape
    c1 = np.zeros((d, e, e)) if c1 is None else np.asarray(c1, dtype=float)
    if c2 is None:
        c2 = np.zeros((d, e, e, e))
    else:
        c2 = np.asarray(c2, dtype=float)
        c2 = 0.5 * (c2 + c2.transpose(0, 1, 3, 2))

    def ev(y):
        return (c0 + c1 @ y + np.einsum("iruv,u,v->ir", c2, y, y)).T

    def jac(y):
        return (c1 + 2.0 * np.einsum("irsv,v->irs", c2, y)).transpose(1, 0, 2)

    return VectorFields(e, d, eval_fn=ev, jac_fn=jac, name="poly2")


def sine_fields(a0, B) -> VectorFields:
    """Bounded twist fields V_i(y)_r = a0[i,r] + sum_s B[i,r,s] sin(y_s)."""
    a0 = np.asarray(a0, dtype=float)
    B = np.asarray(B, dtype=float)
    d, e = a0.shape
    if B.shape != (d, e, e):
        raise ValueError("B must have shape (d, e, e)")

    def ev(y):
        return (a0 + B @ np.sin(y)).T

    def jac(y):
        return (B * np.cos(y)[None, None, :]).transpose(1, 0, 2)

    return VectorFields(e, d, eval_fn=ev, jac_fn=jac,
                        kernel=("sine", a0, B), name="sine")


def fields_from_spec(spec) -> VectorFields:
    """Build fields from 'builtin:<name>' or a JSON object/file path."""
    if isinstance(spec, str) and spec.startswith("builtin:"):
        name = spec.split(":", 1)[1]
        if name == "rotation":
            return rotation_fields()
        if name == "linear":
            return linear_fields(np.array([[[1.0]]]))
        raise ValueError(f"unknown builtin field set '{name}'")
    if isinstance(spec, str):
        with open(spec) as fh:
            spec = json.load(fh)
    kind = spec.get("kind", "linear")
    if kind == "linear":
        return linear_fields(np.asarray(spec["A"], dtype=float),
                             None if "b" not in spec else
                             np.asarray(spec["b"], dtype=float))
    if kind == "poly2":
        return poly2_fields(np.asarray(spec["c0"], dtype=float),
                            spec.get("c1"), spec.get("c2"))
    if kind == "sine":
        return sine_fields(np.asarray(spec["a0"], dtype=float),
                           np.asarray(spec["B"], dtype=float))
    raise ValueError(f"unknown field kind '{kind}'")


# --------------------------------------------------------------------------
# integrators
# --------------------------------------------------------------------------


def flow_exp(W, y0, h: float = 1.0, substeps: int = 1):
    """Advance dz = W(z) dt over [0, h] with classical RK4 in fixed substeps."""
    if substeps < 1:
        raise ValueError("substeps must be at least 1")
    y = np.asarray(y0, dtype=float).copy()
    dt = h / substeps
    for _ in range(substeps):
        k1 = W(y)
        k2 = W(y + 0.5 * dt * k1)
        k3 = W(y + 0.5 * dt * k2)
        k4 = W(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > BLOWUP_LIMIT:
            raise RdeBlowUp(float("nan"))
    return y


def _log_norm(u, a):
    """Homogeneous size of an increment from its log (u antisym-area a)."""
    d = u.shape[0]
    iu = np.triu_indices(d, 1)
    lvl2 = math.sqrt(2.0 * math.sqrt(float(np.sum(a[iu] ** 2)))) \
        if iu[0].size else 0.0
    return max(float(np.linalg.norm(u)), lvl2)


def _substep_count(u, a, base, cap):
    return base * max(1, int(math.ceil(_log_norm(u, a) / cap)))


def _drive(fields: VectorFields, u, a, y0, base, cap, clock):
    """Trajectory over all increments; kernel fast path when available."""
    m = u.shape[0]
    if fields.kernel is not None and m:
        kind = fields.kernel[0]
        if kind == "linear":
            _, A, b = fields.kernel
            traj = kernels.rk4_linear_drive(u, a, A, b,
                                            np.asarray(y0, dtype=float),
                                            base, cap)
        else:
            _, a0, B = fields.kernel
            traj = kernels.rk4_sine_drive(u, a, a0, B,
                                          np.asarray(y0, dtype=float),
                                          base, cap)
        bad = ~np.all(np.isfinite(traj), axis=1)
        bad |= np.max(np.abs(np.where(np.isfinite(traj), traj, 0.0)),
                      axis=1) > BLOWUP_LIMIT
        if np.any(bad):
            raise RdeBlowUp(clock[int(np.argmax(bad))])
        return traj
    traj = np.empty((m + 1, fields.e))
    y = np.asarray(y0, dtype=float).copy()
    traj[0] = y
    for k in range(m):
        nsub = _substep_count(u[k], a[k], base, cap)
        W = fields.step_field(u[k], a[k])
        try:
            y = flow_exp(W, y, 1.0, nsub)
        except RdeBlowUp:
            raise RdeBlowUp(clock[k + 1]) from None
        traj[k + 1] = y
    return traj


def solve_canonical_rde(rough: RoughPath2, phi: PathFunction,
                        fields: VectorFields, y0,
                        base_substeps: int = 4, cap: float = 0.25,
                        n_samples: int = None) -> RdeSolution:
    """Solve dy = V(y) dx along the phi-opened driver, pulled back to the
    original clock.

    The driver is interpolated at unit window scale on an internal stretched
    clock (no rescaling), advanced by the log-ODE scheme, and the states are
    read off at the images of the original sample times.
    """
    if fields.d != rough.d:
        raise ValueError("driver dimension does not match the fields")
    y0 = np.asarray(y0, dtype=float)
    if y0.shape != (fields.e,):
        raise ValueError("y0 must have shape (e,)")
    cont, tc = interpolate_rough(rough, phi, delta=1.0, n_samples=n_samples,
                                 rescale=False)
    u, a = log_increments(cont)
    traj = _drive(fields, u, a, y0, base_substeps, cap, cont.times)
    targets = tc.forward(rough.times)
    idx = np.searchsorted(cont.times, targets)
    idx = np.clip(idx, 0, cont.n - 1)
    if np.max(np.abs(cont.times[idx] - targets)) > 1e-9:
        raise RuntimeError("internal clock misalignment")
    states = traj[idx]
    diag = {
        "steps": int(u.shape[0]),
        "substeps": int(sum(_substep_count(u[k], a[k], base_substeps, cap)
                            for k in range(u.shape[0]))),
        "max_increment_norm": float(max(
            (_log_norm(u[k], a[k]) for k in range(u.shape[0])), default=0.0)),
    }
    return RdeSolution(rough.times.copy(), states, time_change=tc,
                       diagnostics=diag, internal_times=cont.times,
                       internal_states=traj)


def solve_marcus_sde(path: CadlagPath, fields: VectorFields, y0,
                     base_substeps: int = 4, cap: float = 0.25) -> RdeSolution:
    """Jump-diffusion scheme on the sample skeleton: every increment flows
    along sum dx_i V_i for unit time (jumps use the same rule, which is the
    canonical jump convention)."""
    if fields.d != path.d:
        raise ValueError("driver dimension does not match the fields")
    y0 = np.asarray(y0, dtype=float)
    u = np.diff(path.values, axis=0)
    a = np.zeros((u.shape[0], path.d, path.d))
    traj = _drive(fields, u, a, y0, base_substeps, cap, path.times)
    diag = {
        "steps": int(u.shape[0]),
        "substeps": int(sum(_substep_count(u[k], a[k], base_substeps, cap)
                            for k in range(u.shape[0]))),
        "max_increment_norm": float(np.max(np.linalg.norm(u, axis=1)))
        if u.shape[0] else 0.0,
    }
    return RdeSolution(path.times.copy(), traj, diagnostics=diag)


def stack_drivers(V: VectorFields, W: VectorFields) -> VectorFields:
    """Fields for the chained system dy = V(y) dx, dz = W(z) dy.

    W must have V.e driving directions; the stacked state is (y, z) and
    U_i(y, z) = (V_i(y), W(z) V_i(y)).
    """
    if W.d != V.e:
        raise ValueError("W must be driven by the state of V")
    e, n, d = V.e, W.e, V.d

    def ev(x):
        y, z = x[:e], x[e:]
        Vy = V.eval(y)
        Wz = W.eval(z)
        return np.vstack([Vy, Wz @ Vy])

    def jac(x):
        y, z = x[:e], x[e:]
        Vy = V.eval(y)
        Jv = V.jacobian(y)
        Wz = W.eval(z)
        Jw = W.jacobian(z)
        out = np.zeros((e + n, d, e + n))
        out[:e, :, :e] = Jv
        # d/dy of W(z) V_i(y)
        out[e:, :, :e] = np.einsum("mk,kis->mis", Wz, Jv)
        # d/dz of W(z) V_i(y): sum_k dW_k(z)/dz * V_i(y)_k
        out[e:, :, e:] = np.einsum("mks,ki->mis", Jw, Vy)
        return out

    return VectorFields(e + n, d, eval_fn=ev, jac_fn=jac,
                        name=f"stack({V.name},{W.name})")


def flow_map(rough: RoughPath2, phi: PathFunction, fields: VectorFields,
             y0_grid, **opts):
    """Batch solve over a grid of initial states, sharing the driver."""
    return [solve_canonical_rde(rough, phi, fields, y0, **opts)
            for y0 in np.asarray(y0_grid, dtype=float)]
