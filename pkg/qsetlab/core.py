"""
Quasi-set kernel: the universe, the three entity sorts, indistinguishability
and extensional equality, weak pairs and quasi-cardinality.

Micro-atoms have no identity. The only comparison this module offers on them
is ``indistinguishable``; ``extensionally_equal`` refuses them outright.

example::

    u = new_universe([Species("electron")])
    e1 = add_micro_atom(u, "electron")
    e2 = add_micro_atom(u, "electron")
    pair = weak_pair(u, e1, e2)
    quasi_cardinality(u, pair).value   # 2
"""
import logging
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Iterator, List, NewType, Optional

from .errors import (
    DanglingHandle,
    DuplicateSpecies,
    EmptyLabel,
    FrozenUniverse,
    IdentityUndefined,
    NotAQset,
    UnknownSpecies,
    raise_error,
)

logger = logging.getLogger(__name__)

Handle = NewType("Handle", int)


class Sort(str, Enum):
    MICRO = "MICRO"
    MACRO = "MACRO"
    QSET = "QSET"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Species:
    id: str
    description: str = ""


@dataclass(frozen=True)
class Cardinal:
    value: int

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ValueError(f"cardinal must be non-negative, got {self.value}")

    def __int__(self) -> int:
        return self.value


@dataclass(frozen=True)
class Entity:
    handle: Handle
    sort: Sort
    species: Optional[str] = None
    label: Optional[str] = None
    members: Optional[FrozenSet[Handle]] = None

    def __post_init__(self) -> None:
        present = {
            Sort.MICRO: self.species is not None,
            Sort.MACRO: self.label is not None,
            Sort.QSET: self.members is not None,
        }
        if not present[self.sort] or sum(present.values()) != 1:
            raise ValueError(f"entity {self.handle}: fields do not match sort {self.sort}")


class Universe:
    """
    Finite registry of m-atoms, M-atoms and quasi-sets.

    Registration is serialized by a lock; once ``freeze`` is called the
    universe is read-only and every query is safe to share between threads.
    """

    def __init__(self, species: Iterable[Species]) -> None:
        self.species_table: Dict[str, Species] = {}
        for item in species:
            if item.id in self.species_table:
                raise DuplicateSpecies(item.id)
            self.species_table[item.id] = item
        self._entities: Dict[Handle, Entity] = {}
        self._next_handle = 1
        self._lock = threading.Lock()
        self._frozen = False

    def __len__(self) -> int:
        return len(self._entities)

    def __contains__(self, handle: object) -> bool:
        return handle in self._entities

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> "Universe":
        self._frozen = True
        return self

    def handles(self) -> List[Handle]:
        return list(self._entities)

    def entities(self) -> Iterator[Entity]:
        return iter(list(self._entities.values()))

    def entity(self, handle: Handle) -> Entity:
        try:
            return self._entities[handle]
        except (KeyError, TypeError):
            raise DanglingHandle(f"no entity with handle {handle!r}") from None

    def _register(self, sort: Sort, **fields) -> Handle:
        with self._lock:
            if self._frozen:
                raise_error(FrozenUniverse())
            handle = Handle(self._next_handle)
            self._next_handle += 1
            self._entities[handle] = Entity(handle, sort, **fields)
        logger.info("registering %s %s", sort.value.lower(), handle)
        return handle


def new_universe(species: List[Species]) -> Universe:
    universe = Universe(species)
    logger.info("new universe with %d species", len(universe.species_table))
    return universe


def add_micro_atom(u: Universe, species: str) -> Handle:
    if species not in u.species_table:
        raise UnknownSpecies(f"unknown species {species!r}")
    return u._register(Sort.MICRO, species=species)


def add_macro_atom(u: Universe, label: str) -> Handle:
    if not label:
        raise EmptyLabel()
    return u._register(Sort.MACRO, label=label)


def make_qset(u: Universe, members: Iterable[Handle]) -> Handle:
    collected = frozenset(members)
    for handle in collected:
        u.entity(handle)
    return u._register(Sort.QSET, members=collected)


def is_micro(u: Universe, x: Handle) -> bool:
    return u.entity(x).sort is Sort.MICRO


def is_macro(u: Universe, x: Handle) -> bool:
    return u.entity(x).sort is Sort.MACRO


def is_qset(u: Universe, x: Handle) -> bool:
    return u.entity(x).sort is Sort.QSET


def is_zfu(u: Universe) -> bool:
    return not any(e.sort is Sort.MICRO for e in u.entities())


def _qset(u: Universe, q: Handle) -> Entity:
    entity = u.entity(q)
    if entity.sort is not Sort.QSET:
        raise NotAQset(f"entity {q} is a {entity.sort.value.lower()}, not a qset")
    return entity


def members(u: Universe, q: Handle) -> FrozenSet[Handle]:
    return _qset(u, q).members


def indistinguishable(u: Universe, x: Handle, y: Handle) -> bool:
    ex, ey = u.entity(x), u.entity(y)
    if ex.handle == ey.handle:
        return True
    if ex.sort is not ey.sort:
        return False
    if ex.sort is Sort.MICRO:
        return ex.species == ey.species
    if ex.sort is Sort.MACRO:
        return ex.label == ey.label
    return ex.members == ey.members


def distinguishable(u: Universe, x: Handle, y: Handle) -> bool:
    return not indistinguishable(u, x, y)


def extensionally_equal(u: Universe, x: Handle, y: Handle) -> bool:
    ex, ey = u.entity(x), u.entity(y)
    for entity in (ex, ey):
        if entity.sort is Sort.MICRO:
            raise_error(IdentityUndefined(
                f"identity undefined for m-atoms (entity {entity.handle})"
            ))
    if ex.sort is Sort.QSET and ey.sort is Sort.QSET:
        return ex.members == ey.members
    if ex.sort is Sort.MACRO and ey.sort is Sort.MACRO:
        return indistinguishable(u, x, y)
    return False


def weak_pair(u: Universe, x: Handle, y: Handle) -> Handle:
    u.entity(x)
    u.entity(y)
    saturated = [
        t for t in u.handles()
        if indistinguishable(u, t, x) or indistinguishable(u, t, y)
    ]
    logger.debug("weak pair [%s, %s] saturates to %d members", x, y, len(saturated))
    return make_qset(u, saturated)


def weak_singleton(u: Universe, x: Handle) -> Handle:
    return weak_pair(u, x, x)


def quasi_cardinality(u: Universe, q: Handle) -> Cardinal:
    return Cardinal(len(_qset(u, q).members))


def member_of(u: Universe, t: Handle, q: Handle) -> bool:
    u.entity(t)
    return t in _qset(u, q).members


def qset_union(u: Universe, a: Handle, b: Handle) -> Handle:
    return make_qset(u, _qset(u, a).members | _qset(u, b).members)
