"""Closed-loop dynamics: active leader, follower agents, neighbor-based
controller, reduced-order velocity observer, disturbance injection, and a
fixed-step integrator aligned to the switching schedule.

The leader is a double integrator driven by a known input policy; each of
the n followers is a double integrator driven by the neighbor-based rule

    u_i = u0 - k (v_i - vhat_i) - l [ sum_j a_ij (x_i - x_j) + b_i (x_i - x0) ]

where vhat_i is agent i's running estimate of the leader velocity,
updated through the first-order observer

    d/dt vhat_i = u0 - k0 [ sum_j a_ij (x_i - x_j) + b_i (x_i - x0) ]

with k0 = l / k**2 unless overridden.  In the error coordinates
xi = x - x0*1, eta = v - v0*1, zeta = k (vhat - v0*1) the loop is a
switched linear system dz/dt = F z (plus injected disturbance), which is
what the certificate module analyzes.

Integration is classical fixed-step RK4.  Steps never straddle a switch
instant: a step is truncated to land exactly on each mode boundary, and
samples are recorded on the uniform grid t = i*h only.  Spatial dimension
m >= 1 runs the scalar structure independently per coordinate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gains import Gains
from .topology import SwitchingSchedule, Topology, coupling_matrix, segments
from .waveforms import Waveform

#: relative fuzz when matching times against the sample grid; wide enough to
#: absorb accumulated roundoff from segment-boundary sums on long runs, and
#: still eight orders below the grid spacing
_GRID_FUZZ = 1e-7


class SimulationDiverged(RuntimeError):
    """State became non-finite; carries the time of the first bad value."""

    def __init__(self, time: float):
        super().__init__(f"state diverged (non-finite) at t={time:.6g}")
        self.time = time


class NoiseBoundViolation(RuntimeError):
    """A sampled disturbance exceeded the declared bound."""


@dataclass(frozen=True)
class LeaderPolicy:
    """Known leader input policy plus the leader's initial condition.

    ``u0`` holds one waveform per spatial dimension.
    """

    u0: tuple[Waveform, ...]
    x0: np.ndarray
    v0: np.ndarray

    def __post_init__(self):
        u0 = tuple(self.u0)
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float)).copy()
        v0 = np.atleast_1d(np.asarray(self.v0, dtype=float)).copy()
        if len(u0) != x0.size or x0.shape != v0.shape:
            raise ValueError("u0, x0, v0 must all have the spatial dimension m")
        x0.setflags(write=False)
        v0.setflags(write=False)
        object.__setattr__(self, "u0", u0)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "v0", v0)

    @property
    def m(self) -> int:
        return self.x0.size

    def u0_at(self, t: float) -> np.ndarray:
        return np.array([w(t) for w in self.u0])


@dataclass(frozen=True)
class SystemState:
    """Instantaneous joint state of leader, followers, and observers."""

    t: float
    x0: np.ndarray  # (m,)
    v0: np.ndarray  # (m,)
    x: np.ndarray  # (n, m)
    v: np.ndarray  # (n, m)
    vhat: np.ndarray  # (n, m)

    def __post_init__(self):
        x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        v0 = np.atleast_1d(np.asarray(self.v0, dtype=float))
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        v = np.atleast_2d(np.asarray(self.v, dtype=float))
        vhat = np.atleast_2d(np.asarray(self.vhat, dtype=float))
        m = x0.size
        n = x.shape[0]
        if v0.shape != (m,) or x.shape != (n, m) or v.shape != (n, m) or vhat.shape != (n, m):
            raise ValueError("inconsistent state shapes")
        for name, arr in (("x0", x0), ("v0", v0), ("x", x), ("v", v), ("vhat", vhat)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"state field {name} has non-finite entries")
            arr = arr.copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def m(self) -> int:
        return self.x0.size


@dataclass(frozen=True)
class NoiseModel:
    """Bounded disturbances on the follower position-rate and acceleration
    channels.

    Modes:
      * ``off``: identically zero.
      * ``waveform``: per-agent deterministic waveforms, one for each of the
        two channels, shared across spatial dimensions.
      * ``random``: uniform in [-delta, delta], redrawn each grid step from a
        seeded stream and held constant across the step's RK4 stages.
    """

    delta: float
    n: int
    position: tuple[Waveform, ...] | None = None
    accel: tuple[Waveform, ...] | None = None
    seed: int | None = None
    step: float | None = None

    def __post_init__(self):
        if self.delta < 0.0:
            raise ValueError("delta must be nonnegative")
        if self.mode == "waveform":
            if len(self.position) != self.n or len(self.accel) != self.n:
                raise ValueError("need one waveform per agent and channel")
        if self.mode == "random" and (self.seed is None or self.step is None):
            raise ValueError("random noise requires a seed and a grid step")

    @property
    def mode(self) -> str:
        if self.position is not None or self.accel is not None:
            return "waveform"
        if self.seed is not None:
            return "random"
        return "off"

    @property
    def held_per_step(self) -> bool:
        return self.mode == "random"

    @classmethod
    def off(cls, n: int) -> "NoiseModel":
        return cls(delta=0.0, n=n)

    @classmethod
    def broadcast(cls, w: Waveform, n: int, delta: float) -> "NoiseModel":
        """Same waveform on every agent and both channels."""
        return cls(delta=delta, n=n, position=(w,) * n, accel=(w,) * n)

    @classmethod
    def seeded_uniform(cls, delta: float, seed: int, n: int, step: float) -> "NoiseModel":
        return cls(delta=delta, n=n, seed=seed, step=step)

    def sample(self, t: float, m: int) -> tuple[np.ndarray, np.ndarray]:
        """Disturbance pair (d1, d2), each (n, m), at time t.

        For the random mode, t is keyed to its grid cell so repeated calls
        within one step return the held draw.
        """
        if self.mode == "off":
            zero = np.zeros((self.n, m))
            return zero, zero.copy()
        if self.mode == "waveform":
            d1 = np.array([w(t) for w in self.position])
            d2 = np.array([w(t) for w in self.accel])
            return (
                np.repeat(d1[:, None], m, axis=1),
                np.repeat(d2[:, None], m, axis=1),
            )
        idx = int(math.floor((t + _GRID_FUZZ * self.step) / self.step))
        rng = np.random.default_rng([self.seed, idx])
        draw = rng.uniform(-self.delta, self.delta, size=(2, self.n))
        return (
            np.repeat(draw[0][:, None], m, axis=1),
            np.repeat(draw[1][:, None], m, axis=1),
        )

    def check_bound(self, t: float) -> None:
        """Assert |d| <= delta for both channels at time t (no tolerance)."""
        d1, d2 = self.sample(t, 1)
        worst = max(np.abs(d1).max(), np.abs(d2).max())
        if worst > self.delta:
            raise NoiseBoundViolation(
                f"disturbance magnitude {worst:.6g} exceeds bound {self.delta:.6g} at t={t:.6g}"
            )


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly sampled run record (struct-of-arrays layout).

    ``err_x[s, i]`` and ``err_v[s, i]`` are the Euclidean position and
    velocity tracking errors of agent i at sample s.  ``V`` holds Lyapunov
    function samples when a certificate has been attached, else None.
    """

    times: np.ndarray  # (S,)
    x0: np.ndarray  # (S, m)
    v0: np.ndarray  # (S, m)
    x: np.ndarray  # (S, n, m)
    v: np.ndarray  # (S, n, m)
    vhat: np.ndarray  # (S, n, m)
    err_x: np.ndarray  # (S, n)
    err_v: np.ndarray  # (S, n)
    V: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        t = self.times
        if t.size < 1:
            raise ValueError("trajectory must hold at least one sample")
        if t.size > 1:
            steps = np.diff(t)
            if np.any(steps <= 0.0):
                raise ValueError("timestamps must be strictly increasing")
            if np.any(np.abs(steps - steps[0]) > _GRID_FUZZ * steps[0]):
                raise ValueError("sample step must be constant within a run")

    @property
    def n_samples(self) -> int:
        return self.times.size

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def m(self) -> int:
        return self.x.shape[2]

    def state_at(self, s: int) -> SystemState:
        return SystemState(
            t=float(self.times[s]),
            x0=self.x0[s],
            v0=self.v0[s],
            x=self.x[s],
            v=self.v[s],
            vhat=self.vhat[s],
        )

    def final_state(self) -> SystemState:
        return self.state_at(self.n_samples - 1)


def _neighbor_error(i: int, s: SystemState, topo: Topology) -> np.ndarray:
    """sum_j a_ij (x_i - x_j) + b_i (x_i - x0), using only local quantities."""
    acc = np.zeros(s.m)
    for j in range(topo.n):
        a_ij = topo.weights[i, j]
        if a_ij > 0.0:
            acc += a_ij * (s.x[i] - s.x[j])
    b_i = topo.leader_weights[i]
    if b_i > 0.0:
        acc += b_i * (s.x[i] - s.x0)
    return acc


def control_input(
    i: int, s: SystemState, topo: Topology, g: Gains, leader: LeaderPolicy
) -> np.ndarray:
    """Acceleration command for agent i from the neighbor-based rule."""
    if not 0 <= i < topo.n:
        raise ValueError(f"agent index {i} out of range for n={topo.n}")
    u0 = leader.u0_at(s.t)
    return u0 - g.k * (s.v[i] - s.vhat[i]) - g.l * _neighbor_error(i, s, topo)


def observer_rate(
    i: int, s: SystemState, topo: Topology, g: Gains, leader: LeaderPolicy
) -> np.ndarray:
    """Rate of agent i's leader-velocity estimate.

    The coupling coefficient is k0, which defaults to l / k**2.
    """
    if not 0 <= i < topo.n:
        raise ValueError(f"agent index {i} out of range for n={topo.n}")
    return leader.u0_at(s.t) - g.k0 * _neighbor_error(i, s, topo)


# ---------------------------------------------------------------------------
# flat-vector packing used by the integrator
# ---------------------------------------------------------------------------


def _pack(s: SystemState) -> np.ndarray:
    return np.concatenate(
        [s.x0, s.v0, s.x.reshape(-1), s.v.reshape(-1), s.vhat.reshape(-1)]
    )


def _unpack(t: float, flat: np.ndarray, n: int, m: int) -> SystemState:
    nm = n * m
    return SystemState(
        t=t,
        x0=flat[:m],
        v0=flat[m : 2 * m],
        x=flat[2 * m : 2 * m + nm].reshape(n, m),
        v=flat[2 * m + nm : 2 * m + 2 * nm].reshape(n, m),
        vhat=flat[2 * m + 2 * nm :].reshape(n, m),
    )


def _full_rhs(n: int, m: int, H: np.ndarray, g: Gains, leader: LeaderPolicy):
    nm = n * m
    k, l, k0 = g.k, g.l, g.k0

    def rhs(t: float, flat: np.ndarray, noise_at) -> np.ndarray:
        x0 = flat[:m]
        v0 = flat[m : 2 * m]
        x = flat[2 * m : 2 * m + nm].reshape(n, m)
        v = flat[2 * m + nm : 2 * m + 2 * nm].reshape(n, m)
        vhat = flat[2 * m + 2 * nm :].reshape(n, m)
        u0 = leader.u0_at(t)
        pos_err = H @ (x - x0)  # = L x + B (x - x0): row sums of L vanish
        d1, d2 = noise_at(t)
        return np.concatenate(
            [
                v0,
                u0,
                (v + d1).reshape(-1),
                (u0 - k * (v - vhat) - l * pos_err + d2).reshape(-1),
                (u0 - k0 * pos_err).reshape(-1),
            ]
        )

    return rhs


def _rk4_step(rhs, t: float, flat: np.ndarray, h: float, noise_at) -> np.ndarray:
    k1 = rhs(t, flat, noise_at)
    k2 = rhs(t + h / 2.0, flat + (h / 2.0) * k1, noise_at)
    k3 = rhs(t + h / 2.0, flat + (h / 2.0) * k2, noise_at)
    k4 = rhs(t + h, flat + h * k3, noise_at)
    return flat + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _noise_closure(nm_model: NoiseModel, t_step_start: float, m: int):
    """Per-step noise accessor: held draw for random noise, else stage-exact."""
    if nm_model.held_per_step:
        held = nm_model.sample(t_step_start, m)
        return lambda t: held
    return lambda t: nm_model.sample(t, m)


def step(
    s: SystemState,
    h: float,
    topo: Topology,
    g: Gains,
    leader: LeaderPolicy,
    noise: NoiseModel | None = None,
) -> SystemState:
    """One classical RK4 step of the coupled leader/follower/observer system.

    The topology must be constant over [s.t, s.t + h]; simulate() guarantees
    this by truncating steps at switch instants.
    """
    if h <= 0.0:
        raise ValueError("step size must be positive")
    noise = noise if noise is not None else NoiseModel.off(s.n)
    rhs = _full_rhs(s.n, s.m, coupling_matrix(topo), g, leader)
    out = _rk4_step(rhs, s.t, _pack(s), h, _noise_closure(noise, s.t, s.m))
    if not np.all(np.isfinite(out)):
        raise SimulationDiverged(s.t + h)
    return _unpack(s.t + h, out, s.n, s.m)


def _integrate(flat0, h, t_final, sched, rhs_per_mode, noise, m, on_sample):
    """Shared fixed-step driver: sub-steps land exactly on switch instants,
    samples are recorded on the grid t = i*h."""
    fuzz = _GRID_FUZZ * h
    n_samples = int(math.floor(t_final / h + fuzz))
    on_sample(0, flat0)
    recorded = 0
    flat = flat0
    for seg_start, seg_end, mode in segments(sched, t_final):
        rhs = rhs_per_mode[mode]
        t = seg_start
        while t < seg_end - fuzz:
            grid_next = (math.floor((t + fuzz) / h) + 1) * h
            t_next = min(grid_next, seg_end)
            flat = _rk4_step(rhs, t, flat, t_next - t, _noise_closure(noise, t, m))
            if not np.all(np.isfinite(flat)):
                raise SimulationDiverged(t_next)
            t = t_next
            idx = round(t / h)
            if abs(t - idx * h) <= fuzz and idx <= n_samples:
                noise.check_bound(idx * h)
                on_sample(idx, flat)
                recorded = max(recorded, idx)
    if recorded != n_samples:
        raise RuntimeError(
            f"internal sampling mismatch: recorded up to {recorded}, expected {n_samples}"
        )
    return n_samples


def simulate(
    initial: SystemState,
    sched: SwitchingSchedule,
    topo_family: list[Topology],
    g: Gains,
    leader: LeaderPolicy,
    noise: NoiseModel | None = None,
    h: float = 1e-3,
    t_final: float = 20.0,
) -> Trajectory:
    """Integrate the closed loop over a switching schedule.

    Requires h <= dwell/4 so switch instants are resolved.  Returns the
    trajectory sampled every h, with per-agent tracking error norms.
    """
    n, m = initial.n, initial.m
    noise = noise if noise is not None else NoiseModel.off(n)
    if h <= 0.0 or t_final <= 0.0:
        raise ValueError("h and t_final must be positive")
    if h > sched.dwell / 4.0 + _GRID_FUZZ * h:
        raise ValueError(
            f"step h={h:.6g} must not exceed dwell/4={sched.dwell / 4.0:.6g} "
            "so switch instants are resolved"
        )
    sched.validate_indices(len(topo_family))
    for topo in topo_family:
        if topo.n != n:
            raise ValueError("all topologies must match the agent count")
    if noise.n != n:
        raise ValueError("noise model agent count mismatch")
    if leader.m != m:
        raise ValueError("leader policy dimension mismatch")

    rhs_per_mode = [
        _full_rhs(n, m, coupling_matrix(topo), g, leader) for topo in topo_family
    ]
    S = int(math.floor(t_final / h + _GRID_FUZZ * h)) + 1
    times = np.arange(S) * h
    x0s = np.empty((S, m))
    v0s = np.empty((S, m))
    xs = np.empty((S, n, m))
    vs = np.empty((S, n, m))
    vhs = np.empty((S, n, m))

    nm = n * m

    def on_sample(idx: int, flat: np.ndarray) -> None:
        x0s[idx] = flat[:m]
        v0s[idx] = flat[m : 2 * m]
        xs[idx] = flat[2 * m : 2 * m + nm].reshape(n, m)
        vs[idx] = flat[2 * m + nm : 2 * m + 2 * nm].reshape(n, m)
        vhs[idx] = flat[2 * m + 2 * nm :].reshape(n, m)

    noise.check_bound(0.0)
    _integrate(_pack(initial), h, t_final, sched, rhs_per_mode, noise, m, on_sample)

    err_x = np.linalg.norm(xs - x0s[:, None, :], axis=2)
    err_v = np.linalg.norm(vs - v0s[:, None, :], axis=2)
    meta = {
        "n": n,
        "m": m,
        "h": h,
        "t_final": t_final,
        "gains": {"l": g.l, "k": g.k, "k0": g.k0},
        "noise_mode": noise.mode,
        "noise_delta": noise.delta,
        "noise_seed": noise.seed,
    }
    return Trajectory(
        times=times, x0=x0s, v0=v0s, x=xs, v=vs, vhat=vhs,
        err_x=err_x, err_v=err_v, metadata=meta,
    )


# ---------------------------------------------------------------------------
# error coordinates and the compact switched-linear form
# ---------------------------------------------------------------------------


def error_coordinates(s: SystemState, g: Gains) -> np.ndarray:
    """Stacked tracking-error vector z of length 3*n*m, dimension-major.

    Per spatial dimension d the block is (xi; eta; zeta) with
    xi = x - x0, eta = v - v0, zeta = k (vhat - v0).
    """
    blocks = []
    for d in range(s.m):
        xi = s.x[:, d] - s.x0[d]
        eta = s.v[:, d] - s.v0[d]
        zeta = g.k * (s.vhat[:, d] - s.v0[d])
        blocks.append(np.concatenate([xi, eta, zeta]))
    return np.concatenate(blocks)


def state_from_error_coordinates(
    z: np.ndarray, t: float, x0: np.ndarray, v0: np.ndarray, g: Gains
) -> SystemState:
    """Inverse of :func:`error_coordinates` given the leader state."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    m = x0.size
    z = np.asarray(z, dtype=float)
    if z.size % (3 * m) != 0:
        raise ValueError(f"error vector length {z.size} not divisible by 3*m")
    n = z.size // (3 * m)
    x = np.empty((n, m))
    v = np.empty((n, m))
    vhat = np.empty((n, m))
    for d in range(m):
        blk = z[3 * n * d : 3 * n * (d + 1)]
        x[:, d] = blk[:n] + x0[d]
        v[:, d] = blk[n : 2 * n] + v0[d]
        vhat[:, d] = blk[2 * n :] / g.k + v0[d]
    return SystemState(t=t, x0=x0, v0=v0, x=x, v=v, vhat=vhat)


def error_system_matrix(topo: Topology, g: Gains) -> np.ndarray:
    """Block matrix F of the compact error system dz/dt = F z (per dimension).

    Only valid for the default observer gain k0 = l / k**2, under which the
    observer block reduces to -(l/k) H.
    """
    if not g.is_default_k0:
        raise ValueError(
            "compact error form is only valid for the default observer gain "
            "k0 = l / k**2"
        )
    H = coupling_matrix(topo)
    n = topo.n
    Z = np.zeros((n, n))
    I = np.eye(n)
    return np.block(
        [
            [Z, I, Z],
            [-g.l * H, -g.k * I, I],
            [-(g.l / g.k) * H, Z, Z],
        ]
    )


@dataclass(frozen=True, eq=False)
class ErrorTrajectory:
    """Sampled run of the compact error system."""

    times: np.ndarray  # (S,)
    z: np.ndarray  # (S, 3*n*m)

    @property
    def n_samples(self) -> int:
        return self.times.size


def simulate_error_system(
    z0: np.ndarray,
    sched: SwitchingSchedule,
    topo_family: list[Topology],
    g: Gains,
    noise: NoiseModel | None = None,
    h: float = 1e-3,
    t_final: float = 20.0,
) -> ErrorTrajectory:
    """Integrate dz/dt = F z + (d1; d2; 0) with the same stepping scheme
    as :func:`simulate`, so the two runs agree sample-for-sample."""
    z0 = np.asarray(z0, dtype=float)
    n = topo_family[0].n
    if z0.size % (3 * n) != 0:
        raise ValueError(f"error vector length {z0.size} not divisible by 3n={3 * n}")
    m = z0.size // (3 * n)
    noise = noise if noise is not None else NoiseModel.off(n)
    if noise.n != n:
        raise ValueError("noise model agent count mismatch")
    if h <= 0.0 or t_final <= 0.0:
        raise ValueError("h and t_final must be positive")
    if h > sched.dwell / 4.0 + _GRID_FUZZ * h:
        raise ValueError(
            f"step h={h:.6g} must not exceed dwell/4={sched.dwell / 4.0:.6g} "
            "so switch instants are resolved"
        )
    sched.validate_indices(len(topo_family))

    mats = [error_system_matrix(topo, g) for topo in topo_family]

    def make_rhs(F: np.ndarray):
        def rhs(t: float, z: np.ndarray, noise_at) -> np.ndarray:
            d1, d2 = noise_at(t)
            out = np.empty_like(z)
            for d in range(m):
                blk = z[3 * n * d : 3 * n * (d + 1)]
                inject = np.concatenate([d1[:, d], d2[:, d], np.zeros(n)])
                out[3 * n * d : 3 * n * (d + 1)] = F @ blk + inject
            return out

        return rhs

    rhs_per_mode = [make_rhs(F) for F in mats]
    S = int(math.floor(t_final / h + _GRID_FUZZ * h)) + 1
    zs = np.empty((S, z0.size))

    def on_sample(idx: int, flat: np.ndarray) -> None:
        zs[idx] = flat

    noise.check_bound(0.0)
    _integrate(z0, h, t_final, sched, rhs_per_mode, noise, m, on_sample)
    return ErrorTrajectory(times=np.arange(S) * h, z=zs)
