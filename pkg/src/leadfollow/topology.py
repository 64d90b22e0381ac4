"""Follower graphs, leader attachment, and switching schedules.

A network mode is a weighted undirected graph over the n followers plus a
nonnegative attachment weight from each follower to the leader.  The mode
is "jointly connected" when every connected component of the follower
graph contains at least one agent with a positive leader weight; this is
the condition under which the coupling matrix ``H = L + diag(b)`` is
positive definite and tracking can be certified.

Switching between modes is described by a dwell-time schedule: an ordered
list of (mode index, duration) entries, optionally repeated forever.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ScheduleExhausted(ValueError):
    """Raised when a non-cycling schedule is queried past its end."""


@dataclass(frozen=True)
class Topology:
    """One interconnection mode: follower weights plus leader attachment.

    Attributes:
        n: number of follower agents.
        weights: (n, n) symmetric nonnegative coupling weights, zero diagonal.
        leader_weights: length-n nonnegative leader attachment weights.
    """

    n: int
    weights: np.ndarray
    leader_weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        b = np.asarray(self.leader_weights, dtype=float)
        if self.n < 1:
            raise ValueError("agent count must be positive")
        if w.shape != (self.n, self.n):
            raise ValueError(f"weights must be {self.n}x{self.n}, got {w.shape}")
        if b.shape != (self.n,):
            raise ValueError(f"leader_weights must have length {self.n}, got {b.shape}")
        if not np.array_equal(w, w.T):
            raise ValueError("weights must be exactly symmetric")
        if np.any(np.diag(w) != 0.0):
            raise ValueError("weights must have zero diagonal")
        if np.any(w < 0.0) or np.any(b < 0.0):
            raise ValueError("weights and leader_weights must be nonnegative")
        w = w.copy()
        b = b.copy()
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "leader_weights", b)


def laplacian(topo: Topology) -> np.ndarray:
    """Weighted graph Laplacian L = D - A of the follower graph.

    Row sums are zero by construction.
    """
    w = topo.weights
    return np.diag(w.sum(axis=1)) - w


def coupling_matrix(topo: Topology) -> np.ndarray:
    """Laplacian plus the diagonal of leader attachment weights."""
    return laplacian(topo) + np.diag(topo.leader_weights)


def is_jointly_connected(topo: Topology) -> bool:
    """True iff every follower component contains a leader-attached agent.

    Components are taken over edges with strictly positive weight; union-find
    over the upper triangle.
    """
    parent = list(range(topo.n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(topo.n):
        for j in range(i + 1, topo.n):
            if topo.weights[i, j] > 0.0:
                parent[find(i)] = find(j)

    attached = {find(i) for i in range(topo.n) if topo.leader_weights[i] > 0.0}
    return all(find(i) in attached for i in range(topo.n))


@dataclass(frozen=True)
class SwitchingSchedule:
    """Piecewise-constant mode assignment with a dwell-time guarantee.

    Attributes:
        entries: ordered (mode index, duration seconds) pairs.
        dwell: minimum time between switches; every duration must be >= dwell.
        cycle: whether the entry list repeats periodically.
    """

    entries: tuple[tuple[int, float], ...]
    dwell: float
    cycle: bool = True

    def __post_init__(self):
        entries = tuple((int(i), float(d)) for i, d in self.entries)
        object.__setattr__(self, "entries", entries)
        if not entries:
            raise ValueError("schedule must have at least one entry")
        if not self.dwell > 0.0:
            raise ValueError("dwell must be positive")
        for pos, (_, dur) in enumerate(entries):
            if dur < self.dwell:
                raise ValueError(
                    f"entry {pos}: duration {dur} is below the dwell time {self.dwell}"
                )

    @property
    def period(self) -> float:
        return sum(d for _, d in self.entries)

    def validate_indices(self, n_topologies: int) -> None:
        for pos, (idx, _) in enumerate(self.entries):
            if not 0 <= idx < n_topologies:
                raise ValueError(
                    f"entry {pos}: mode index {idx} outside family of size {n_topologies}"
                )


def topology_at(sched: SwitchingSchedule, time: float) -> int:
    """Mode index active at the given instant.

    Right-continuous: at a switch time the new mode is already active.
    Raises ScheduleExhausted for times past the end of a non-cycling schedule.
    """
    if time < 0.0:
        raise ValueError("time must be nonnegative")
    period = sched.period
    if sched.cycle:
        time = time % period
    elif time >= period:
        raise ScheduleExhausted(f"schedule ends at t={period}, queried t={time}")
    acc = 0.0
    for idx, dur in sched.entries:
        acc += dur
        if time < acc:
            return idx
    return sched.entries[-1][0]  # time == period after fp roundoff


def segments(sched: SwitchingSchedule, t_final: float):
    """Yield (t_start, t_end, mode index) covering [0, t_final].

    Consecutive entries with equal mode index are not merged; each schedule
    entry produces one segment.  Raises ScheduleExhausted if a non-cycling
    schedule ends before t_final.
    """
    if t_final <= 0.0:
        raise ValueError("t_final must be positive")
    t = 0.0
    while t < t_final:
        for idx, dur in sched.entries:
            t_end = min(t + dur, t_final)
            if t_end > t:
                yield (t, t_end, idx)
            t = t + dur
            if t >= t_final:
                return
        if not sched.cycle:
            raise ScheduleExhausted(
                f"schedule ends at t={sched.period}, run requires t_final={t_final}"
            )
