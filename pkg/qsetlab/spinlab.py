"""
Spin singlet statistics.

The singlet is (|z+;z-> - |z-;z+>)/sqrt(2) in the basis order
(++, +-, -+, --). Measurement along an axis a uses the projectors
(1 + s a.sigma)/2 applied to the state vector; the state itself is never
rotated.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np

from .errors import InvalidAxis, InvalidSampleSize, check_seed

logger = logging.getLogger(__name__)

TOLERANCE = 1e-12

OUTCOMES: Tuple[Tuple[str, str], ...] = (("+", "+"), ("+", "-"), ("-", "+"), ("-", "-"))
SIGN = {"+": 1, "-": -1}

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
IDENTITY = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class SingletState:
    amplitudes: Tuple[complex, complex, complex, complex]

    def __post_init__(self) -> None:
        amps = tuple(complex(a) for a in self.amplitudes)
        object.__setattr__(self, "amplitudes", amps)
        if len(amps) != 4:
            raise ValueError("a two-spin state has four amplitudes")
        if abs(self.norm() - 1.0) > TOLERANCE:
            raise ValueError(f"state is not normalized (norm {self.norm()})")
        if abs(amps[0]) > TOLERANCE or abs(amps[3]) > TOLERANCE or abs(amps[1] + amps[2]) > TOLERANCE:
            raise ValueError("state is not antisymmetric")

    def amplitude(self, s1: str, s2: str) -> complex:
        return self.amplitudes[OUTCOMES.index((s1, s2))]

    def norm(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes))

    def vector(self) -> np.ndarray:
        return np.array(self.amplitudes, dtype=complex)


@dataclass(frozen=True)
class Axis:
    direction: Tuple[float, float, float]

    def __post_init__(self) -> None:
        direction = tuple(float(v) for v in self.direction)
        if len(direction) != 3:
            raise InvalidAxis(f"axis needs three components, got {len(direction)}")
        norm = math.sqrt(sum(v * v for v in direction))
        if abs(norm - 1.0) > TOLERANCE:
            raise InvalidAxis(f"axis {direction} is not a unit vector (norm {norm:.15g})")
        object.__setattr__(self, "direction", direction)

    @classmethod
    def of(cls, x: float, y: float, z: float) -> "Axis":
        return cls((x, y, z))

    @classmethod
    def normalized(cls, vector: Sequence[float]) -> "Axis":
        v = np.asarray(vector, dtype=float)
        if v.shape != (3,):
            raise InvalidAxis(f"axis needs three components, got {v.size}")
        norm = np.linalg.norm(v)
        if norm == 0 or not np.isfinite(norm):
            raise InvalidAxis("axis direction must be a non-zero finite vector")
        return cls(tuple(v / norm))

    def __neg__(self) -> "Axis":
        return Axis(tuple(-v for v in self.direction))

    def dot(self, other: "Axis") -> float:
        return float(np.dot(self.direction, other.direction))

    def projector(self, sign: str) -> np.ndarray:
        spin = sum(c * p for c, p in zip(self.direction, PAULI))
        return (IDENTITY + SIGN[sign] * spin) / 2


@dataclass(frozen=True)
class OutcomeTally:
    counts: Dict[Tuple[str, str], int]
    total: int

    def __post_init__(self) -> None:
        if any(v < 0 for v in self.counts.values()):
            raise ValueError("counts must be non-negative")
        if sum(self.counts.values()) != self.total:
            raise ValueError("counts do not sum to total")

    def __getitem__(self, outcome: Tuple[str, str]) -> int:
        return self.counts.get(outcome, 0)

    def frequencies(self) -> Dict[Tuple[str, str], float]:
        return {o: self[o] / self.total for o in OUTCOMES}


def singlet_state() -> SingletState:
    r = 1 / math.sqrt(2)
    return SingletState((0, r, -r, 0))


def joint_distribution(a: Axis, b: Axis) -> Dict[Tuple[str, str], float]:
    psi = singlet_state().vector()
    distribution = {}
    for s1, s2 in OUTCOMES:
        operator = np.kron(a.projector(s1), b.projector(s2))
        p = float(np.real(np.vdot(psi, operator @ psi)))
        # rounding leaves ~1e-17 residue on impossible outcomes
        distribution[(s1, s2)] = 0.0 if abs(p) < 1e-15 else min(max(p, 0.0), 1.0)
    return distribution


def correlation(a: Axis, b: Axis) -> float:
    return sum(SIGN[s1] * SIGN[s2] * p for (s1, s2), p in joint_distribution(a, b).items())


def sample_outcomes(a: Axis, b: Axis, n: int, seed: int) -> OutcomeTally:
    if n <= 0:
        raise InvalidSampleSize(f"number of samples must be positive, got {n}")
    distribution = joint_distribution(a, b)
    probabilities = np.array([distribution[o] for o in OUTCOMES])
    probabilities /= probabilities.sum()
    counts = np.random.default_rng(check_seed(seed)).multinomial(n, probabilities)
    logger.debug("sampled %d pairs with seed %d: %s", n, seed, counts.tolist())
    return OutcomeTally({o: int(c) for o, c in zip(OUTCOMES, counts)}, n)


def empirical_correlation(tally: OutcomeTally) -> float:
    return sum(SIGN[s1] * SIGN[s2] * tally[(s1, s2)] for s1, s2 in OUTCOMES) / tally.total
