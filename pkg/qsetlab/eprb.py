"""
EPRB space-time model.

The space is M = V u [x]2 where V is a union of open balls in R^n carrying
the Euclidean distance, [x]2 is the weak singleton of two indistinguishable
m-atoms, every atom sits at distance c from every point of V, and the two
atoms are at distance 0 from each other. The model is a quasi-metric space
exactly when the diameter of V is at most 2c.

V is a continuum; the audit works on a finite set of sample points drawn
strictly inside the balls. Each sample point is registered as an M-atom
labelled by its coordinates, so two sample points with equal coordinates
are indistinguishable and at distance 0.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import (
    Handle,
    Sort,
    Universe,
    add_macro_atom,
    add_micro_atom,
    make_qset,
    qset_union,
    quasi_cardinality,
    weak_pair,
)
from .errors import (
    A1Violation,
    A2Violation,
    InvalidRegion,
    OutsideSpace,
    UnknownSpecies,
    check_seed,
    raise_error,
)
from .metric import QuasiMetricSpace
from .settings import settings

logger = logging.getLogger(__name__)

Point = Tuple[float, ...]

SAMPLE_ATTEMPTS = 10_000


def _point(values: Sequence[float]) -> Point:
    return tuple(float(v) for v in values)


def euclidean(a: Sequence[float], b: Sequence[float]) -> float:
    return float(np.linalg.norm(np.subtract(a, b, dtype=float)))


@dataclass(frozen=True)
class Ball:
    center: Point
    radius: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", _point(self.center))
        object.__setattr__(self, "radius", float(self.radius))
        if not self.center:
            raise InvalidRegion("ball centre needs at least one coordinate")
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise InvalidRegion(f"ball radius must be positive, got {self.radius}")
        if not all(math.isfinite(v) for v in self.center):
            raise InvalidRegion("ball centre must be finite")

    @property
    def dimension(self) -> int:
        return len(self.center)

    def margin(self, epsilon: Optional[float] = None) -> float:
        """
        Clearance a point needs from the sphere: epsilon scaled by the radius,
        but never more than half the radius, so every ball keeps an interior.
        """
        epsilon = settings.epsilon if epsilon is None else epsilon
        return min(epsilon * max(1.0, self.radius), self.radius / 2)

    def contains(self, point: Sequence[float], epsilon: Optional[float] = None) -> bool:
        """Strict interior test: the point must clear the sphere by the margin."""
        return self.radius - euclidean(point, self.center) > self.margin(epsilon)


@dataclass(frozen=True)
class RegionV:
    dimension: int
    balls: Tuple[Ball, ...]
    sample_points: Tuple[Point, ...] = ()
    epsilon: float = field(default_factory=lambda: settings.epsilon, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "balls", tuple(self.balls))
        object.__setattr__(self, "sample_points", tuple(_point(p) for p in self.sample_points))
        if self.dimension < 1:
            raise InvalidRegion(f"dimension must be at least 1, got {self.dimension}")
        if not self.balls:
            raise InvalidRegion("region needs at least one ball")
        for index, ball in enumerate(self.balls):
            if ball.dimension != self.dimension:
                raise InvalidRegion(
                    f"ball {index} has dimension {ball.dimension}, region has {self.dimension}"
                )
        for point in self.sample_points:
            if len(point) != self.dimension:
                raise InvalidRegion(f"sample point {point} has the wrong dimension")
            if self.owner(point) is None:
                raise InvalidRegion(f"sample point {point} is not strictly inside any ball")

    def owner(self, point: Sequence[float]) -> Optional[int]:
        for index, ball in enumerate(self.balls):
            if ball.contains(point, self.epsilon):
                return index
        return None

    def with_samples(self, points: Sequence[Sequence[float]]) -> "RegionV":
        return replace(self, sample_points=tuple(_point(p) for p in points))


@dataclass(frozen=True)
class DiameterCheck:
    ok: bool
    sup_diameter: float
    c: float
    witness: Tuple[int, int]

    def __bool__(self) -> bool:
        return self.ok

    @property
    def minimal_c(self) -> float:
        return self.sup_diameter / 2


def sup_diameter(region: RegionV) -> Tuple[float, Tuple[int, int]]:
    """
    Closed-form sup of pairwise distances over the union of the balls:
    2r for a single ball, |ci - cj| + ri + rj across two balls.
    """
    best, witness = -1.0, (0, 0)
    balls = region.balls
    for i, bi in enumerate(balls):
        for j in range(i, len(balls)):
            bj = balls[j]
            if i == j:
                candidate = 2 * bi.radius
            else:
                candidate = euclidean(bi.center, bj.center) + bi.radius + bj.radius
            if candidate > best:
                best, witness = candidate, (i, j)
    return best, witness


def validate_diameter(region: RegionV, c: float) -> DiameterCheck:
    diameter, witness = sup_diameter(region)
    # the sup is never attained by open balls, so equality with 2c is admissible
    return DiameterCheck(diameter <= 2 * c, diameter, float(c), witness)


def minimal_c(region: RegionV) -> float:
    return sup_diameter(region)[0] / 2


@dataclass(frozen=True)
class EPRBSpace:
    region: RegionV
    c: float
    pair: Handle
    universe: Universe = field(repr=False)
    species: str = ""
    atoms: Tuple[Handle, ...] = ()
    point_handles: Tuple[Handle, ...] = ()
    carrier: Optional[Handle] = None
    check: Optional[DiameterCheck] = None
    _coords: Dict[Handle, Point] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._coords.update(zip(self.point_handles, self.region.sample_points))


def build_eprb(u: Universe, region: RegionV, c: float, species: str,
               validate: bool = True) -> EPRBSpace:
    """
    Register [x]2 and the sample points of V in ``u`` and return the space.
    ``validate=False`` skips the A2 check; used only to plant defects.
    """
    c = float(c)
    if not (c > 0 and math.isfinite(c)):
        raise A2Violation(f"c must be a positive real, got {c}")
    if species not in u.species_table:
        raise UnknownSpecies(f"unknown species {species!r}")
    check = validate_diameter(region, c)
    if validate and not check.ok:
        i, j = check.witness
        raise_error(A2Violation(
            f"sup-diameter {check.sup_diameter:.12g} > 2c = {2 * c:.12g} "
            f"(balls {i} and {j}); minimal c = D/2 = {check.minimal_c:.12g}",
            check,
        ))
    if any(e.sort is Sort.MICRO and e.species == species for e in u.entities()):
        raise A1Violation(
            f"species {species!r} already has m-atoms; [x]2 would not have quasi-cardinality 2"
        )

    first = add_micro_atom(u, species)
    second = add_micro_atom(u, species)
    pair = weak_pair(u, first, second)
    if quasi_cardinality(u, pair).value != 2:
        raise A1Violation("[x]2 does not have quasi-cardinality 2")

    point_handles = tuple(
        add_macro_atom(u, "point(" + ", ".join(repr(v) for v in p) + ")")
        for p in region.sample_points
    )
    carrier = qset_union(u, make_qset(u, point_handles), pair)
    logger.info(
        "EPRB space: n=%d, %d balls, %d sample points, c=%g, D=%g",
        region.dimension, len(region.balls), len(point_handles), c, check.sup_diameter,
    )
    return EPRBSpace(region, c, pair, u, species, (first, second), point_handles, carrier, check)


HandleOrPoint = Union[int, Sequence[float]]


def _resolve(s: EPRBSpace, x: HandleOrPoint) -> Optional[Point]:
    """None for an atom of [x]2, coordinates for a point of V."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        if x in s.atoms:
            return None
        if x in s._coords:
            return s._coords[x]
        raise OutsideSpace(f"entity {x} is not in M")
    point = _point(x)
    if point in s.region.sample_points:
        return point
    raise OutsideSpace(f"{point} is not a sample point of V")


def eprb_distance(s: EPRBSpace, x: HandleOrPoint, y: HandleOrPoint) -> float:
    a, b = _resolve(s, x), _resolve(s, y)
    if a is None and b is None:
        return 0.0
    if a is None or b is None:
        return s.c
    return euclidean(a, b)


def coordinates(s: EPRBSpace, h: Handle) -> Point:
    point = _resolve(s, h)
    if point is None:
        raise OutsideSpace(f"entity {h} belongs to [x]2 and has no local coordinates")
    return point


def to_quasi_metric_space(s: EPRBSpace) -> QuasiMetricSpace:
    return QuasiMetricSpace.from_function(
        s.universe, s.carrier, lambda x, y: eprb_distance(s, x, y), name="eprb"
    )


@dataclass(frozen=True)
class Counterexample:
    a: Point
    b: Point
    c: float
    distance: float
    deficit: float

    def __str__(self) -> str:
        return (
            f"d_E(a,b) = {self.distance:.12g} > d_q(a,x) + d_q(x,b) = {2 * self.c:.12g}; "
            f"triangle deficit {self.deficit:.12g}"
        )


def counterexample_unbounded(c: float, n: int) -> Tuple[Point, Point, Counterexample]:
    """
    Two points of R^n farther apart than 2c: with V = R^n the triple
    (a, x, b) breaks the triangle inequality.
    """
    if not c > 0:
        raise A2Violation(f"c must be a positive real, got {c}")
    if n < 1:
        raise InvalidRegion(f"dimension must be at least 1, got {n}")
    a = (0.0,) * n
    b = (2 * c + 1.0,) + (0.0,) * (n - 1)
    distance = euclidean(a, b)
    return a, b, Counterexample(a, b, float(c), distance, distance - 2 * c)


def counterexample_space(u: Universe, c: float, n: int, species: str) -> Tuple[EPRBSpace, Counterexample]:
    a, b, diagnostic = counterexample_unbounded(c, n)
    radius = min(0.5, c)
    region = RegionV(n, (Ball(a, radius), Ball(b, radius)), (a, b))
    return build_eprb(u, region, c, species, validate=False), diagnostic


def sample_region(balls: Sequence[Ball], k: int, seed: int,
                  epsilon: Optional[float] = None) -> Tuple[Point, ...]:
    """
    ``k`` points drawn uniformly from the balls in turn (round-robin),
    each strictly inside its ball. Deterministic for a given seed.

    Raises InvalidRegion when a ball yields no interior point within
    ``SAMPLE_ATTEMPTS`` draws.
    """
    rng = np.random.default_rng(check_seed(seed))
    points: List[Point] = []
    for index in range(k):
        ball = balls[index % len(balls)]
        n = ball.dimension
        for _ in range(SAMPLE_ATTEMPTS):
            direction = rng.standard_normal(n)
            norm = np.linalg.norm(direction)
            if norm == 0:
                continue
            p = np.asarray(ball.center) + direction / norm * ball.radius * rng.random() ** (1.0 / n)
            if ball.contains(p, epsilon):
                points.append(_point(p))
                break
        else:
            raise_error(InvalidRegion(
                f"no interior point of ball {index % len(balls)} found in {SAMPLE_ATTEMPTS} draws"
            ))
    return tuple(points)


def isometry(region: RegionV, rotation: np.ndarray, translation: Sequence[float]) -> RegionV:
    """Apply x -> Rx + t to every ball centre and sample point."""
    rotation = np.asarray(rotation, dtype=float)
    shift = np.asarray(translation, dtype=float)

    def move(p: Sequence[float]) -> Point:
        return _point(rotation @ np.asarray(p, dtype=float) + shift)

    balls = tuple(Ball(move(b.center), b.radius) for b in region.balls)
    return RegionV(region.dimension, balls, tuple(move(p) for p in region.sample_points), region.epsilon)


def figure_rows(s: EPRBSpace) -> List[List[object]]:
    """Sample points of V with the index of the owning ball."""
    return [list(p) + [s.region.owner(p)] for p in s.region.sample_points]
