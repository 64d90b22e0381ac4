"""Deterministic scalar waveforms for leader inputs and disturbances.

The set is deliberately closed (constant, sinusoid, polynomial) so that a
scenario file reproduces bit-for-bit: no expression parsing, no hidden
state.  Each waveform evaluates at any t >= 0 and, where meaningful,
reports a global amplitude bound used to validate disturbance declarations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Constant:
    value: float

    def __call__(self, t: float) -> float:
        return self.value

    def amplitude_bound(self) -> float:
        return abs(self.value)


@dataclass(frozen=True)
class Sinusoid:
    """amplitude * sin(omega * t + phase)."""

    amplitude: float
    omega: float
    phase: float = 0.0

    def __call__(self, t: float) -> float:
        return self.amplitude * math.sin(self.omega * t + self.phase)

    def amplitude_bound(self) -> float:
        return abs(self.amplitude)


@dataclass(frozen=True)
class Polynomial:
    """coeffs[0] + coeffs[1]*t + coeffs[2]*t**2 + ...  Unbounded in general."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if not self.coeffs:
            raise ValueError("polynomial needs at least one coefficient")

    def __call__(self, t: float) -> float:
        acc = 0.0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def amplitude_bound(self) -> float | None:
        if len(self.coeffs) == 1:
            return abs(self.coeffs[0])
        return None  # unbounded on [0, inf)


Waveform = Constant | Sinusoid | Polynomial


def cosine(amplitude: float = 1.0, omega: float = 1.0) -> Sinusoid:
    """Cosine expressed as a phase-shifted sinusoid."""
    return Sinusoid(amplitude=amplitude, omega=omega, phase=math.pi / 2.0)


def from_mapping(spec: dict) -> Waveform:
    """Build a waveform from a parsed config table.

    Recognized kinds: ``constant`` (value), ``sinusoid`` (amplitude, omega,
    phase optional), ``polynomial`` (coeffs).
    """
    if "kind" not in spec:
        raise ValueError("waveform table requires a 'kind' key")
    kind = spec["kind"]
    if kind == "constant":
        return Constant(float(spec["value"]))
    if kind == "sinusoid":
        return Sinusoid(
            amplitude=float(spec["amplitude"]),
            omega=float(spec["omega"]),
            phase=float(spec.get("phase", 0.0)),
        )
    if kind == "polynomial":
        return Polynomial(tuple(spec["coeffs"]))
    raise ValueError(f"unknown waveform kind {kind!r}")


def to_mapping(w: Waveform) -> dict:
    """Inverse of :func:`from_mapping`, for report serialization."""
    if isinstance(w, Constant):
        return {"kind": "constant", "value": w.value}
    if isinstance(w, Sinusoid):
        return {"kind": "sinusoid", "amplitude": w.amplitude, "omega": w.omega, "phase": w.phase}
    if isinstance(w, Polynomial):
        return {"kind": "polynomial", "coeffs": list(w.coeffs)}
    raise TypeError(f"not a waveform: {w!r}")
