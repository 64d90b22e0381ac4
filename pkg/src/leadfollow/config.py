"""Scenario configuration: validated TOML loading and built-in presets.

A scenario file is one TOML document with sections ``run``, ``topology``
(an array of tables, one per switching mode), ``schedule``, ``gains``,
``leader``, ``followers``, and optionally ``noise``.  Loading validates
the whole file and reports every problem found, not just the first; see
``presets/paper.toml`` for a fully annotated example.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import waveforms
from .dynamics import LeaderPolicy, NoiseModel, SystemState
from .gains import DEFAULT_MARGIN, Gains, synthesize_gains
from .spectral import spectral_bounds
from .topology import SwitchingSchedule, Topology, coupling_matrix, is_jointly_connected
from .waveforms import Sinusoid, Waveform, cosine


class ConfigError(ValueError):
    """Carries the full list of validation problems for a scenario file."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("invalid scenario configuration:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully validated scenario: topology family, schedule, gains policy,
    leader policy, follower initial conditions, noise, and run settings."""

    topologies: tuple[Topology, ...]
    schedule: SwitchingSchedule
    gains: Gains | None  # None when gains are synthesized from the spectrum
    synthesize: bool
    margin: float
    leader: LeaderPolicy
    x: np.ndarray  # (n, m) initial follower positions
    v: np.ndarray  # (n, m) initial follower velocities
    vhat: np.ndarray  # (n, m) initial leader-velocity estimates
    noise_mode: str  # off | waveform | random
    noise_delta: float
    noise_position: tuple[Waveform, ...] | None
    noise_accel: tuple[Waveform, ...] | None
    noise_seed: int | None
    h: float
    t_final: float
    m: int

    @property
    def n(self) -> int:
        return self.topologies[0].n

    def resolve_gains(self) -> Gains:
        """Explicit gains, or gains synthesized from the connected modes."""
        if not self.synthesize:
            return self.gains
        connected = [
            coupling_matrix(t) for t in self.topologies if is_jointly_connected(t)
        ]
        if not connected:
            raise ValueError("cannot synthesize gains: no jointly connected mode")
        lo, hi = spectral_bounds(connected)
        return synthesize_gains(lo, hi, self.margin)

    def build_noise(self) -> NoiseModel:
        if self.noise_mode == "off":
            return NoiseModel.off(self.n)
        if self.noise_mode == "waveform":
            return NoiseModel(
                delta=self.noise_delta,
                n=self.n,
                position=self.noise_position,
                accel=self.noise_accel,
            )
        return NoiseModel.seeded_uniform(
            delta=self.noise_delta, seed=self.noise_seed, n=self.n, step=self.h
        )

    def initial_state(self) -> SystemState:
        return SystemState(
            t=0.0, x0=self.leader.x0, v0=self.leader.v0,
            x=self.x, v=self.v, vhat=self.vhat,
        )


def preset_paper_example(noise: bool = False) -> ScenarioConfig:
    """The four-follower benchmark scenario.

    Two switching modes alternate every 0.2 s: mode 0 is the connected graph
    with edges 1-2, 1-3, 2-4 and the leader attached to agent 1; mode 1 has
    edges 1-2 and 3-4 with the leader attached to agents 1 and 3.  Gains are
    k=200, l=40 with the default observer coupling, and the leader input is
    cos(t).  With ``noise`` a sin(50 t) disturbance of amplitude 1 is applied
    to both channels of every agent.

    Initial conditions are not part of the benchmark statement and use the
    documented defaults x(0) = (1, 2, 3, 4), v(0) = vhat(0) = 0, leader at
    the origin at rest, h = 1e-3, horizon 20 s.
    """
    a1 = np.array(
        [
            [0, 1, 1, 0],
            [1, 0, 0, 1],
            [1, 0, 0, 0],
            [0, 1, 0, 0],
        ],
        dtype=float,
    )
    a2 = np.array(
        [
            [0, 1, 0, 0],
            [1, 0, 0, 0],
            [0, 0, 0, 1],
            [0, 0, 1, 0],
        ],
        dtype=float,
    )
    topologies = (
        Topology(n=4, weights=a1, leader_weights=np.array([1.0, 0, 0, 0])),
        Topology(n=4, weights=a2, leader_weights=np.array([1.0, 0, 1.0, 0])),
    )
    schedule = SwitchingSchedule(entries=((0, 0.2), (1, 0.2)), dwell=0.2, cycle=True)
    leader = LeaderPolicy(u0=(cosine(),), x0=np.zeros(1), v0=np.zeros(1))
    if noise:
        w = Sinusoid(amplitude=1.0, omega=50.0, phase=0.0)
        noise_fields = dict(
            noise_mode="waveform",
            noise_delta=1.0,
            noise_position=(w,) * 4,
            noise_accel=(w,) * 4,
            noise_seed=None,
        )
    else:
        noise_fields = dict(
            noise_mode="off",
            noise_delta=0.0,
            noise_position=None,
            noise_accel=None,
            noise_seed=None,
        )
    return ScenarioConfig(
        topologies=topologies,
        schedule=schedule,
        gains=Gains(l=40.0, k=200.0),
        synthesize=False,
        margin=DEFAULT_MARGIN,
        leader=leader,
        x=np.array([[1.0], [2.0], [3.0], [4.0]]),
        v=np.zeros((4, 1)),
        vhat=np.zeros((4, 1)),
        h=1e-3,
        t_final=20.0,
        m=1,
        **noise_fields,
    )


def preset_path(noise: bool = False) -> Path:
    """Filesystem path of the shipped preset scenario file."""
    name = "paper_noisy.toml" if noise else "paper.toml"
    return Path(resources.files("leadfollow").joinpath("presets", name))


# ---------------------------------------------------------------------------
# TOML loading
# ---------------------------------------------------------------------------


def load_config(path) -> ScenarioConfig:
    """Parse and validate a scenario file.

    Raises ConfigError listing every validation problem (with field paths),
    or a parse error with line and column information for malformed TOML.
    """
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    return config_from_mapping(doc)


def config_from_mapping(doc: dict) -> ScenarioConfig:
    errors: list[str] = []

    def fail(msg: str) -> None:
        errors.append(msg)

    for section in ("run", "topology", "schedule", "gains", "leader", "followers"):
        if section not in doc:
            fail(f"{section}: required section is missing")
    if errors:
        raise ConfigError(errors)

    run = doc["run"]
    h = _number(run, "run", "h", errors, positive=True)
    t_final = _number(run, "run", "t_final", errors, positive=True)
    m = run.get("m", 1)
    if not isinstance(m, int) or m < 1:
        fail("run.m: must be a positive integer")
        m = 1

    # --- topology family
    topo_tables = doc["topology"]
    if not isinstance(topo_tables, list) or not topo_tables:
        fail("topology: must be a nonempty array of tables")
        raise ConfigError(errors)
    topologies: list[Topology] = []
    n = None
    for i, tbl in enumerate(topo_tables):
        w = tbl.get("weights")
        b = tbl.get("leader_weights")
        if w is None or b is None:
            fail(f"topology[{i}]: needs 'weights' and 'leader_weights'")
            continue
        try:
            w_arr = np.array(w, dtype=float)
            b_arr = np.array(b, dtype=float)
            size = len(b_arr)
            if n is None:
                n = size
            elif size != n:
                fail(f"topology[{i}]: agent count {size} differs from mode 0's {n}")
                continue
            topologies.append(Topology(n=size, weights=w_arr, leader_weights=b_arr))
        except ValueError as exc:
            fail(f"topology[{i}]: {exc}")
    if n is None:
        raise ConfigError(errors)

    # --- schedule
    sched_tbl = doc["schedule"]
    dwell = _number(sched_tbl, "schedule", "dwell", errors, positive=True)
    cycle = sched_tbl.get("cycle", True)
    if not isinstance(cycle, bool):
        fail("schedule.cycle: must be a boolean")
        cycle = True
    entries = sched_tbl.get("entries")
    schedule = None
    if not isinstance(entries, list) or not entries:
        fail("schedule.entries: must be a nonempty array of [mode, duration] pairs")
    else:
        parsed = []
        for pos, pair in enumerate(entries):
            if (
                not isinstance(pair, list)
                or len(pair) != 2
                or not isinstance(pair[0], int)
                or not isinstance(pair[1], (int, float))
            ):
                fail(f"schedule.entries[{pos}]: expected [mode index, duration]")
                continue
            idx, dur = pair[0], float(pair[1])
            if not 0 <= idx < len(topologies):
                fail(
                    f"schedule.entries[{pos}]: mode index {idx} outside family "
                    f"of size {len(topologies)}"
                )
            if dwell is not None and dur < dwell:
                fail(
                    f"schedule.entries[{pos}]: duration {dur} is below the "
                    f"dwell time {dwell}"
                )
            parsed.append((idx, dur))
        if dwell is not None and len(parsed) == len(entries) and not errors:
            schedule = SwitchingSchedule(
                entries=tuple(parsed), dwell=dwell, cycle=cycle
            )

    if h is not None and dwell is not None and h > dwell / 4.0:
        fail(f"run.h: step {h} must not exceed dwell/4 = {dwell / 4.0}")

    # --- gains
    gains_tbl = doc["gains"]
    synthesize = bool(gains_tbl.get("synthesize", False))
    margin = gains_tbl.get("margin", DEFAULT_MARGIN)
    gains = None
    if synthesize and ("k" in gains_tbl or "l" in gains_tbl):
        fail("gains: give either explicit k and l or synthesize=true, not both")
    elif synthesize:
        if not isinstance(margin, (int, float)) or margin < 0:
            fail("gains.margin: must be a nonnegative number")
    else:
        k = _number(gains_tbl, "gains", "k", errors, positive=True)
        l = _number(gains_tbl, "gains", "l", errors, positive=True)
        k0 = gains_tbl.get("k0")
        if k0 is not None and (not isinstance(k0, (int, float)) or k0 <= 0):
            fail("gains.k0: must be a positive number")
            k0 = None
        if k is not None and l is not None:
            gains = Gains(l=l, k=k, k0=float(k0) if k0 is not None else None)

    # --- leader
    leader_tbl = doc["leader"]
    leader = None
    x0 = _vector(leader_tbl, "leader", "x0", m, errors)
    v0 = _vector(leader_tbl, "leader", "v0", m, errors)
    u0_tbl = leader_tbl.get("u0")
    u0 = None
    if not isinstance(u0_tbl, dict):
        fail("leader.u0: required waveform table is missing")
    else:
        try:
            u0 = waveforms.from_mapping(u0_tbl)
        except (ValueError, KeyError) as exc:
            fail(f"leader.u0: {exc}")
    if x0 is not None and v0 is not None and u0 is not None:
        leader = LeaderPolicy(u0=(u0,) * m, x0=x0, v0=v0)

    # --- followers
    fol = doc["followers"]
    x = _matrix(fol, "followers", "x", n, m, errors)
    v = _matrix(fol, "followers", "v", n, m, errors)
    vhat = _matrix(fol, "followers", "vhat", n, m, errors)

    # --- noise (optional)
    noise_tbl = doc.get("noise", {"mode": "off"})
    mode = noise_tbl.get("mode", "off")
    delta = noise_tbl.get("delta", 0.0)
    position = accel = None
    seed = None
    if mode not in ("off", "waveform", "random"):
        fail(f"noise.mode: unknown mode {mode!r}")
    if not isinstance(delta, (int, float)) or delta < 0:
        fail("noise.delta: must be a nonnegative number")
        delta = 0.0
    delta = float(delta)
    if mode == "waveform":
        position, accel = _noise_waveforms(noise_tbl, n, delta, errors)
    elif mode == "random":
        seed = noise_tbl.get("seed")
        if not isinstance(seed, int):
            fail("noise.seed: random noise requires an integer seed")

    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(
        topologies=tuple(topologies),
        schedule=schedule,
        gains=gains,
        synthesize=synthesize,
        margin=float(margin),
        leader=leader,
        x=x,
        v=v,
        vhat=vhat,
        noise_mode=mode,
        noise_delta=delta,
        noise_position=position,
        noise_accel=accel,
        noise_seed=seed,
        h=h,
        t_final=t_final,
        m=m,
    )


def _number(tbl, section, key, errors, positive=False):
    val = tbl.get(key)
    if not isinstance(val, (int, float)) or isinstance(val, bool):
        errors.append(f"{section}.{key}: required number is missing or non-numeric")
        return None
    val = float(val)
    if positive and not val > 0:
        errors.append(f"{section}.{key}: must be positive, got {val}")
        return None
    return val


def _vector(tbl, section, key, m, errors):
    val = tbl.get(key)
    try:
        arr = np.array(val, dtype=float)
    except (TypeError, ValueError):
        arr = None
    if arr is None or arr.shape != (m,):
        errors.append(f"{section}.{key}: expected a length-{m} array")
        return None
    return arr


def _matrix(tbl, section, key, n, m, errors):
    val = tbl.get(key)
    try:
        arr = np.array(val, dtype=float)
    except (TypeError, ValueError):
        arr = None
    if arr is None or arr.shape != (n, m):
        errors.append(f"{section}.{key}: expected an {n}x{m} nested array")
        return None
    return arr


def _noise_waveforms(noise_tbl, n, delta, errors):
    """Waveform-mode noise: one broadcast table, or per-agent arrays."""

    def parse_list(key):
        tables = noise_tbl.get(key)
        if not isinstance(tables, list) or len(tables) != n:
            errors.append(f"noise.{key}: expected an array of {n} waveform tables")
            return None
        out = []
        for i, t in enumerate(tables):
            try:
                out.append(waveforms.from_mapping(t))
            except (ValueError, KeyError, TypeError) as exc:
                errors.append(f"noise.{key}[{i}]: {exc}")
                return None
        return tuple(out)

    if "waveform" in noise_tbl:
        try:
            w = waveforms.from_mapping(noise_tbl["waveform"])
        except (ValueError, KeyError, TypeError) as exc:
            errors.append(f"noise.waveform: {exc}")
            return None, None
        position = accel = (w,) * n
    elif "position" in noise_tbl and "accel" in noise_tbl:
        position = parse_list("position")
        accel = parse_list("accel")
        if position is None or accel is None:
            return None, None
    else:
        errors.append(
            "noise: waveform mode needs a 'waveform' table or 'position' and "
            "'accel' arrays"
        )
        return None, None

    for label, group in (("position", position), ("accel", accel)):
        for i, w in enumerate(group):
            bound = w.amplitude_bound()
            if bound is not None and bound > delta:
                errors.append(
                    f"noise.{label}[{i}]: amplitude bound {bound} exceeds "
                    f"declared delta {delta}"
                )
    return position, accel
