"""
Relations between quasi-sets and the quasi-function predicate.
"""
import logging
from dataclasses import dataclass, field
from itertools import product
from typing import FrozenSet, Iterable, Tuple

from .core import (
    Handle,
    Universe,
    extensionally_equal,
    indistinguishable,
    make_qset,
    members,
)
from .errors import ImageUndefined, InvalidRelation, NotQuasiFunction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OrderedPair:
    first: Handle
    second: Handle


@dataclass(frozen=True)
class QRelation:
    source: Handle
    target: Handle
    pairs: FrozenSet[OrderedPair] = field(default_factory=frozenset)

    @classmethod
    def of(cls, source: Handle, target: Handle, pairs: Iterable[Tuple[Handle, Handle]]) -> "QRelation":
        return cls(source, target, frozenset(OrderedPair(a, b) for a, b in pairs))


def is_relation(u: Universe, w: QRelation) -> bool:
    source, target = members(u, w.source), members(u, w.target)
    for pair in w.pairs:
        u.entity(pair.first)
        u.entity(pair.second)
    return all(p.first in source and p.second in target for p in w.pairs)


def is_relation_on(u: Universe, w: QRelation) -> bool:
    return is_relation(u, w) and extensionally_equal(u, w.source, w.target)


def _require_relation(u: Universe, w: QRelation) -> None:
    if not is_relation(u, w):
        raise InvalidRelation(
            f"pairs of relation {w.source}->{w.target} leave source x target"
        )


def domain(u: Universe, w: QRelation) -> Handle:
    _require_relation(u, w)
    return make_qset(u, {p.first for p in w.pairs})


def range(u: Universe, w: QRelation) -> Handle:
    _require_relation(u, w)
    return make_qset(u, {p.second for p in w.pairs})


def is_quasi_function(u: Universe, f: QRelation) -> bool:
    _require_relation(u, f)
    mapped = {p.first for p in f.pairs}
    if not members(u, f.source) <= mapped:
        logger.debug("relation %s->%s is not total", f.source, f.target)
        return False
    for p, q in product(f.pairs, repeat=2):
        if indistinguishable(u, p.first, q.first) and not indistinguishable(u, p.second, q.second):
            logger.debug("congruence fails on <%s,%s>, <%s,%s>", p.first, p.second, q.first, q.second)
            return False
    return True


def classical_function(u: Universe, f: QRelation) -> bool:
    """
    Total and single-valued by handle: the usual notion of function.
    """
    _require_relation(u, f)
    images = {}
    for p in f.pairs:
        images.setdefault(p.first, set()).add(p.second)
    return members(u, f.source) <= set(images) and all(len(v) == 1 for v in images.values())


def qf_image(u: Universe, f: QRelation, x: Handle) -> Handle:
    if not is_quasi_function(u, f):
        raise NotQuasiFunction(f"relation {f.source}->{f.target} is not a quasi-function")
    values = {p.second for p in f.pairs if indistinguishable(u, p.first, x)}
    if not values:
        raise ImageUndefined(f"entity {x} is not indistinguishable from any domain element")
    return make_qset(u, values)
