"""Photonic component library and netlist composition.

Elements are applied in list order (physical propagation order), so the
composed mode matrix of ``[A, B]`` is ``U_B @ U_A``.  Loss elements do not
enter the unitary; their transmissions are factored into a per-mode record
which downstream code applies through the detection loss channel.  That
factoring is exact when loss sits at the circuit boundaries, which is where
this device concentrates it (output couplers and filters).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .fock import ModeUnitary

__all__ = [
    "PhaseShifter",
    "Coupler",
    "Loss",
    "CircuitSpec",
    "ThermoOpticCalibration",
    "phase_shifter_unitary",
    "coupler_unitary",
    "mzi_unitary",
    "compose",
    "power_to_phase",
    "mzi_circuit",
    "circuit_to_json",
    "circuit_from_json",
]


@dataclass(frozen=True)
class PhaseShifter:
    """Phase e^{i*theta} applied to one mode."""

    mode: int
    theta: float

    kind = "phase_shifter"


@dataclass(frozen=True)
class Coupler:
    """Directional coupler between two modes.

    Matrix [[cos k, i sin k], [i sin k, cos k]] on (mode_i, mode_j); the
    default mixing angle pi/4 gives the 50:50 splitter.
    """

    mode_i: int
    mode_j: int
    mixing: float = math.pi / 4

    kind = "coupler"

    def __post_init__(self):
        if self.mode_i == self.mode_j:
            raise ValueError("coupler modes must be distinct")


@dataclass(frozen=True)
class Loss:
    """Scalar intensity transmission on one mode."""

    mode: int
    transmission: float

    kind = "loss"

    def __post_init__(self):
        if not 0.0 <= self.transmission <= 1.0:
            raise ValueError("transmission must lie in [0, 1]")


Element = PhaseShifter | Coupler | Loss


@dataclass(frozen=True)
class CircuitSpec:
    """Ordered netlist of elements over a fixed number of modes."""

    mode_count: int
    elements: tuple[Element, ...]

    def __post_init__(self):
        if self.mode_count < 1:
            raise ValueError("mode_count must be >= 1")
        elements = tuple(self.elements)
        for el in elements:
            modes = (el.mode,) if not isinstance(el, Coupler) else (el.mode_i, el.mode_j)
            for m in modes:
                if not 0 <= m < self.mode_count:
                    raise ValueError(f"element {el} references invalid mode {m}")
        object.__setattr__(self, "elements", elements)


@dataclass(frozen=True)
class ThermoOpticCalibration:
    """Linear phase response to heater electrical power: theta0 + kappa*P."""

    theta0: float = 0.0
    rad_per_mw: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.rad_per_mw) or self.rad_per_mw == 0.0:
            raise ValueError("rad_per_mw must be finite and nonzero")


def phase_shifter_unitary(theta: float) -> ModeUnitary:
    """diag(1, e^{i*theta}) on a mode pair (phase on the second mode)."""
    return ModeUnitary(np.diag([1.0, np.exp(1j * theta)]))


def coupler_unitary(mixing: float = math.pi / 4) -> ModeUnitary:
    """[[cos k, i sin k], [i sin k, cos k]]; mixing pi/4 is the 50:50 case."""
    c, s = math.cos(mixing), math.sin(mixing)
    return ModeUnitary(np.array([[c, 1j * s], [1j * s, c]]))


def mzi_unitary(theta: float, mixing: float = math.pi / 4) -> ModeUnitary:
    """Mach-Zehnder transfer matrix: coupler * phase(theta) * coupler.

    Bar-port transmission |U[0,0]|^2 equals sin^2(theta/2) for ideal 50:50
    couplers, so theta = (2n+1)*pi/2 realizes a 50:50 beamsplitter.
    """
    h = coupler_unitary(mixing)
    return h @ phase_shifter_unitary(theta) @ h


def mzi_circuit(theta: float, mixing: float = math.pi / 4, mode_count: int = 2) -> CircuitSpec:
    """Standard two-mode MZI netlist with the internal phase on mode 1."""
    return CircuitSpec(
        mode_count=mode_count,
        elements=(
            Coupler(0, 1, mixing),
            PhaseShifter(1, theta),
            Coupler(0, 1, mixing),
        ),
    )


def compose(spec: CircuitSpec) -> tuple[ModeUnitary, np.ndarray]:
    """Fold a netlist into (mode unitary, per-mode intensity transmissions)."""
    m = spec.mode_count
    u = np.eye(m, dtype=complex)
    transmissions = np.ones(m)
    for el in spec.elements:
        if isinstance(el, PhaseShifter):
            step = np.eye(m, dtype=complex)
            step[el.mode, el.mode] = np.exp(1j * el.theta)
            u = step @ u
        elif isinstance(el, Coupler):
            step = np.eye(m, dtype=complex)
            two = coupler_unitary(el.mixing).matrix
            idx = np.ix_((el.mode_i, el.mode_j), (el.mode_i, el.mode_j))
            step[idx] = two
            u = step @ u
        elif isinstance(el, Loss):
            transmissions[el.mode] *= el.transmission
        else:
            raise TypeError(f"unknown element type {type(el).__name__}")
    return ModeUnitary(u), transmissions


def power_to_phase(cal: ThermoOpticCalibration, electrical_power_mw: float) -> float:
    """Heater phase at the given electrical drive power."""
    if electrical_power_mw < 0:
        raise ValueError("electrical power must be >= 0")
    return cal.theta0 + cal.rad_per_mw * electrical_power_mw


# --- JSON netlist serialization ------------------------------------------
#
# Document shape: {"mode_count": int, "elements": [{"kind": str,
# "modes": [int, ...], "param": float | null}, ...]}.  "param" holds the
# phase for phase shifters, the mixing angle for couplers and the
# transmission for loss elements.


def circuit_to_dict(spec: CircuitSpec) -> dict:
    elements = []
    for el in spec.elements:
        if isinstance(el, PhaseShifter):
            elements.append({"kind": el.kind, "modes": [el.mode], "param": el.theta})
        elif isinstance(el, Coupler):
            elements.append({"kind": el.kind, "modes": [el.mode_i, el.mode_j], "param": el.mixing})
        else:
            elements.append({"kind": el.kind, "modes": [el.mode], "param": el.transmission})
    return {"mode_count": spec.mode_count, "elements": elements}


def circuit_from_dict(doc: dict) -> CircuitSpec:
    try:
        mode_count = int(doc["mode_count"])
        raw_elements = doc["elements"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed circuit document: {exc}") from exc
    elements: list[Element] = []
    for i, entry in enumerate(raw_elements):
        kind = entry.get("kind")
        modes = entry.get("modes", [])
        param = entry.get("param")
        if kind == "phase_shifter":
            if len(modes) != 1:
                raise ValueError(f"element {i}: phase_shifter takes one mode")
            elements.append(PhaseShifter(modes[0], float(param if param is not None else 0.0)))
        elif kind == "coupler":
            if len(modes) != 2:
                raise ValueError(f"element {i}: coupler takes two modes")
            elements.append(Coupler(modes[0], modes[1], float(param if param is not None else math.pi / 4)))
        elif kind == "loss":
            if len(modes) != 1:
                raise ValueError(f"element {i}: loss takes one mode")
            elements.append(Loss(modes[0], float(param if param is not None else 1.0)))
        else:
            raise ValueError(f"element {i}: unknown kind {kind!r}")
    return CircuitSpec(mode_count=mode_count, elements=tuple(elements))


def circuit_to_json(spec: CircuitSpec) -> str:
    return json.dumps(circuit_to_dict(spec), indent=2)


def circuit_from_json(text: str) -> CircuitSpec:
    return circuit_from_dict(json.loads(text))


def bind_first_phase(spec: CircuitSpec, theta: float) -> CircuitSpec:
    """Copy of the netlist with the first phase shifter's phase set to theta.

    Scan recipes treat the first phase shifter as the swept interferometer
    phase; the standard MZI netlist has exactly one.
    """
    elements = list(spec.elements)
    for i, el in enumerate(elements):
        if isinstance(el, PhaseShifter):
            elements[i] = PhaseShifter(el.mode, theta)
            return CircuitSpec(spec.mode_count, tuple(elements))
    raise ValueError("netlist has no phase shifter to bind")
