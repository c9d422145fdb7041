"""
Quasi-metric spaces and the axiom audit.

A quasi-metric space is a carrier qset X with a distance d such that

    1. X is non-empty
    2. d is total on X x X and real valued
    3. d(x,y) = 0 iff x ~ y
    4. d(x,y) > 0 iff not x ~ y
    5. d(x,y) = d(y,x)
    6. d(x,z) <= d(x,y) + d(y,z)

``audit_axioms`` checks every item over all pairs and triples of a finite
carrier and lists every violation with its witnesses.

Tolerance policy: epsilon relaxes only the checks that can suffer from
rounding (zero distance between indistinguishables, symmetry, triangle).
Positivity between distinguishable members is checked exactly, so a space
that passes at epsilon passes at every larger epsilon.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .core import Handle, Universe, indistinguishable, members
from .errors import NotInCarrier
from .settings import settings

logger = logging.getLogger(__name__)

DistanceTable = Mapping[Tuple[Handle, Handle], float]
DistanceFunction = Callable[[Handle, Handle], float]

TRIANGLE_BUDGET = 1 << 22

AXIOMS = {
    1: "carrier is non-empty",
    2: "distance is total and real valued",
    3: "d(x,y) = 0 iff x ~ y",
    4: "d(x,y) > 0 iff not x ~ y",
    5: "d(x,y) = d(y,x)",
    6: "d(x,z) <= d(x,y) + d(y,z)",
}


@dataclass(frozen=True)
class QuasiMetricSpace:
    universe: Universe
    carrier: Handle
    distance: Union[DistanceTable, DistanceFunction] = field(repr=False)
    name: str = ""

    @classmethod
    def from_table(cls, universe: Universe, carrier: Handle, table: DistanceTable,
                   symmetric: bool = False, name: str = "") -> "QuasiMetricSpace":
        """
        Dense space from explicit entries. Missing diagonal entries are 0;
        with ``symmetric`` each entry also fills its mirror unless that one
        is given explicitly.
        """
        points = members(universe, carrier)
        dense: Dict[Tuple[Handle, Handle], float] = {}
        for (x, y), value in table.items():
            dense[(x, y)] = float(value)
        if symmetric:
            for (x, y), value in list(dense.items()):
                dense.setdefault((y, x), value)
        for x in points:
            dense.setdefault((x, x), 0.0)
        return cls(universe, carrier, dense, name)

    @classmethod
    def from_function(cls, universe: Universe, carrier: Handle, function: DistanceFunction,
                      name: str = "") -> "QuasiMetricSpace":
        return cls(universe, carrier, function, name)

    def points(self) -> List[Handle]:
        return sorted(members(self.universe, self.carrier))

    def d(self, x: Handle, y: Handle) -> float:
        if callable(self.distance):
            return float(self.distance(x, y))
        # undefined entries surface as item 2 violations in the audit
        return float(self.distance.get((x, y), float("nan")))


@dataclass(frozen=True)
class Violation:
    axiom: int
    witnesses: Tuple[Handle, ...]
    values: Tuple[float, ...]

    def to_record(self) -> Dict[str, object]:
        return {
            "axiom": self.axiom,
            "witnesses": [int(h) for h in self.witnesses],
            "values": [float(v) for v in self.values],
        }

    def __str__(self) -> str:
        witnesses = ", ".join(str(h) for h in self.witnesses)
        values = ", ".join(f"{v:.12g}" for v in self.values)
        return f"axiom {self.axiom} ({AXIOMS[self.axiom]}): witnesses ({witnesses}) values ({values})"


@dataclass(frozen=True)
class CongruenceViolation:
    """x ~ x' but d(x,y) != d(x',y); witnesses are (x, x', y), values the two distances."""
    witnesses: Tuple[Handle, Handle, Handle]
    values: Tuple[float, float]

    def to_record(self) -> Dict[str, object]:
        return {
            "derived": "congruence",
            "witnesses": [int(h) for h in self.witnesses],
            "values": [float(v) for v in self.values],
        }

    def __str__(self) -> str:
        x, x2, y = self.witnesses
        return (
            f"congruence: {x} ~ {x2} but d({x},{y}) = {self.values[0]:.12g}, "
            f"d({x2},{y}) = {self.values[1]:.12g}"
        )


@dataclass
class AuditReport:
    passed: bool
    violations: List[Violation]
    congruence: List[CongruenceViolation] = field(default_factory=list)
    carrier_size: int = 0
    pairs_checked: int = 0
    triples_checked: int = 0
    epsilon: float = 0.0

    def failed_axioms(self) -> List[int]:
        return sorted({v.axiom for v in self.violations})

    def axioms_verified(self) -> int:
        return len(AXIOMS) - len(self.failed_axioms())

    def summary(self) -> str:
        return (
            f"{self.axioms_verified()}/{len(AXIOMS)} axioms verified, "
            f"{self.pairs_checked} pairs, {self.triples_checked} triples"
        )


def qm_distance(s: QuasiMetricSpace, x: Handle, y: Handle) -> float:
    carrier = members(s.universe, s.carrier)
    for h in (x, y):
        if h not in carrier:
            raise NotInCarrier(f"entity {h} is not in the carrier {s.carrier}")
    return s.d(x, y)


def _pairs(mask: np.ndarray) -> List[Tuple[int, int]]:
    return [tuple(int(i) for i in idx) for idx in np.argwhere(mask)]


def _triangle_chunk(D: np.ndarray, rows: Sequence[int], epsilon: float) -> List[Tuple[int, int, int]]:
    block = D[list(rows)]
    # lhs[i, j, k] = d(x_i, z_k); rhs[i, j, k] = d(x_i, y_j) + d(y_j, z_k)
    lhs = block[:, None, :]
    rhs = block[:, :, None] + D[None, :, :]
    with np.errstate(invalid="ignore"):
        broken = lhs > rhs + epsilon
    return [(rows[int(a)], int(b), int(c)) for a, b, c in np.argwhere(broken)]


def _chunks(n: int, workers: int) -> List[List[int]]:
    # each block of the n x n x n triangle tensor stays near TRIANGLE_BUDGET cells
    rows_per_chunk = max(1, TRIANGLE_BUDGET // max(1, n * n))
    parts = max(1, min(n, max(workers, -(-n // rows_per_chunk))))
    return [list(block) for block in np.array_split(np.arange(n), parts) if len(block)]


def audit_axioms(s: QuasiMetricSpace, epsilon: Optional[float] = None,
                 workers: Optional[int] = None) -> AuditReport:
    epsilon = settings.epsilon if epsilon is None else epsilon
    workers = settings.workers if workers is None else workers
    u = s.universe
    points = s.points()
    n = len(points)
    report = AuditReport(False, [], carrier_size=n, pairs_checked=n * n,
                         triples_checked=n ** 3, epsilon=epsilon)
    if n == 0:
        report.violations.append(Violation(1, (s.carrier,), ()))
        return report

    D = np.array([[s.d(x, y) for y in points] for x in points], dtype=float)
    E = np.array([[indistinguishable(u, x, y) for y in points] for x in points], dtype=bool)
    logger.debug("auditing %d points with epsilon %g", n, epsilon)

    def record(axiom: int, index: Tuple[int, ...], values: Tuple[float, ...]) -> None:
        report.violations.append(Violation(axiom, tuple(points[i] for i in index), values))

    with np.errstate(invalid="ignore"):
        undefined = ~np.isfinite(D)
        zero = np.abs(D) <= epsilon
        item3 = (E & ~zero) | (~E & (D == 0.0))
        item4 = (E & (D > epsilon)) | (~E & ~(D > 0.0))
        item5 = np.triu(np.abs(D - D.T) > epsilon, k=1)
    item3 &= ~undefined
    item4 &= ~undefined

    for i, j in _pairs(undefined):
        record(2, (i, j), (D[i, j],))
    for i, j in _pairs(item3):
        record(3, (i, j), (D[i, j],))
    for i, j in _pairs(item4):
        record(4, (i, j), (D[i, j],))
    for i, j in _pairs(item5):
        record(5, (i, j), (D[i, j], D[j, i]))

    chunks = _chunks(n, workers)
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda rows: _triangle_chunk(D, rows, epsilon), chunks))
    else:
        results = [_triangle_chunk(D, rows, epsilon) for rows in chunks]
    for triples in results:
        for i, j, k in triples:
            record(6, (i, j, k), (D[i, k], D[i, j], D[j, k]))

    with np.errstate(invalid="ignore"):
        for i, i2 in _pairs(np.triu(E, k=1)):
            for j in np.flatnonzero(np.abs(D[i] - D[i2]) > epsilon):
                report.congruence.append(
                    CongruenceViolation((points[i], points[i2], points[int(j)]), (D[i, j], D[i2, j]))
                )

    report.passed = not report.violations
    logger.info("audit of %d points: %s", n, report.summary())
    return report
