"""
Line-oriented model files.

One declaration per line, ``#`` starts a comment, arguments are split
shell-style so labels and formulas may be quoted. Every name must be
declared before it is used. See models/README.md for the grammar.
"""
import logging
import shlex
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field, ValidationError

from .core import (
    Handle,
    Sort,
    Species,
    Universe,
    add_macro_atom,
    add_micro_atom,
    make_qset,
    new_universe,
    weak_pair,
    weak_singleton,
)
from .eprb import Ball, EPRBSpace, RegionV, build_eprb, sample_region, to_quasi_metric_space
from .errors import (
    FormulaSyntaxError,
    ModelSyntaxError,
    ModelValidationError,
    QuasiSetError,
)
from .formula import Formula, evaluate, parse
from .metric import QuasiMetricSpace
from .relations import QRelation, is_quasi_function, is_relation

logger = logging.getLogger(__name__)

# keyword -> (minimum, maximum) number of arguments; None means unbounded
ARITY: Dict[str, Tuple[int, Optional[int]]] = {
    "species": (1, 2),
    "micro": (2, 2),
    "macro": (2, 2),
    "qset": (1, None),
    "weak_pair": (3, 3),
    "weak_singleton": (2, 2),
    "ball": (3, 3),
    "region": (2, None),
    "point": (2, 2),
    "sample": (2, 3),
    "eprb": (4, 5),
    "metric": (2, 2),
    "distance": (4, 4),
    "arc": (4, 4),
    "relation": (3, None),
    "quasi_function": (3, None),
    "formula": (2, 2),
    "expect": (2, None),
}


class SpeciesDecl(BaseModel):
    id: str = Field(min_length=1)
    description: str = ""


class BallDecl(BaseModel):
    name: str
    center: List[float] = Field(min_length=1)
    radius: float = Field(gt=0)


class SampleDecl(BaseModel):
    region: str
    count: int = Field(gt=0)
    seed: int = Field(default=0, ge=0)


class EPRBDecl(BaseModel):
    name: str
    region: str
    c: float = Field(gt=0)
    species: str
    unchecked: bool = False


class DistanceDecl(BaseModel):
    space: str
    x: str
    y: str
    value: float


@dataclass(frozen=True)
class Declaration:
    line: int
    keyword: str
    args: Tuple[str, ...]


@dataclass
class ModelFile:
    declarations: List[Declaration]
    path: Optional[Path] = None


@dataclass
class _RegionDraft:
    line: int
    balls: List[Ball]
    points: List[Tuple[float, ...]] = field(default_factory=list)
    used_at: Optional[int] = None


@dataclass
class _MetricDraft:
    line: int
    carrier: Handle
    table: Dict[Tuple[Handle, Handle], float] = field(default_factory=dict)


@dataclass
class Expectation:
    line: int
    formula: str
    holds: bool
    assignment: Dict[str, str]


@dataclass
class Model:
    universe: Universe
    entities: Dict[str, Handle] = field(default_factory=dict)
    species: Dict[str, int] = field(default_factory=dict)
    balls: Dict[str, Ball] = field(default_factory=dict)
    eprb_spaces: Dict[str, EPRBSpace] = field(default_factory=dict)
    metric_spaces: Dict[str, QuasiMetricSpace] = field(default_factory=dict)
    relations: Dict[str, QRelation] = field(default_factory=dict)
    quasi_functions: List[str] = field(default_factory=list)
    formulas: Dict[str, Formula] = field(default_factory=dict)
    expectations: List[Expectation] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    def space_names(self) -> List[str]:
        return sorted(set(self.eprb_spaces) | set(self.metric_spaces))

    def space(self, name: str) -> QuasiMetricSpace:
        if name in self.eprb_spaces:
            return to_quasi_metric_space(self.eprb_spaces[name])
        return self.metric_spaces[name]

    def constants(self) -> Dict[str, Union[Handle, QRelation]]:
        return {**self.entities, **self.relations}


def _split(line: str, number: int) -> List[str]:
    try:
        return shlex.split(line, comments=True, posix=True)
    except ValueError as exc:
        raise ModelSyntaxError(number, str(exc)) from None


def parse_model(text: str, path: Optional[Path] = None) -> ModelFile:
    declarations: List[Declaration] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        words = _split(raw, number)
        if not words:
            continue
        keyword, args = words[0], tuple(words[1:])
        if keyword not in ARITY:
            raise ModelSyntaxError(number, f"unknown declaration {keyword!r}")
        low, high = ARITY[keyword]
        if len(args) < low or (high is not None and len(args) > high):
            expected = f"{low}" if low == high else f"{low}..{high or 'n'}"
            raise ModelSyntaxError(
                number, f"{keyword} takes {expected} arguments, got {len(args)}"
            )
        declarations.append(Declaration(number, keyword, args))
    return ModelFile(declarations, path)


def read_model(path: Union[str, Path]) -> ModelFile:
    path = Path(path)
    raw = path.read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = raw.count(b"\n", 0, exc.start) + 1
        raise ModelSyntaxError(line, f"byte 0x{raw[exc.start]:02x} is not valid UTF-8") from None
    return parse_model(text, path)


def _coordinates(text: str) -> List[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


class _Loader:
    def __init__(self, model_file: ModelFile, strict: bool) -> None:
        self.file = model_file
        self.strict = strict
        self.names: Dict[str, Dict[str, int]] = {}
        self.regions: Dict[str, _RegionDraft] = {}
        self.metrics: Dict[str, _MetricDraft] = {}
        self.model: Optional[Model] = None

    def fail(self, decl: Declaration, message: str) -> ModelValidationError:
        return ModelValidationError(decl.line, message)

    def declare(self, decl: Declaration, kind: str, name: str) -> None:
        seen = self.names.setdefault(kind, {})
        if name in seen:
            raise self.fail(decl, f"duplicate {kind} {name!r} (first declared at line {seen[name]})")
        seen[name] = decl.line

    def validated(self, decl: Declaration, schema, **values):
        try:
            return schema.model_validate(values)
        except ValidationError as exc:
            problems = "; ".join(
                f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
            )
            raise self.fail(decl, f"invalid {decl.keyword}: {problems}") from None

    def entity(self, decl: Declaration, name: str) -> Handle:
        if name not in self.model.entities:
            raise self.fail(decl, f"undeclared entity {name!r}")
        return self.model.entities[name]

    def load(self) -> Model:
        species = []
        for decl in self.file.declarations:
            if decl.keyword == "species":
                record = self.validated(decl, SpeciesDecl, id=decl.args[0],
                                        description=decl.args[1] if len(decl.args) > 1 else "")
                self.declare(decl, "species", record.id)
                species.append(Species(record.id, record.description))
        self.model = Model(new_universe(species), species=dict(self.names.get("species", {})))

        for decl in self.file.declarations:
            try:
                getattr(self, f"on_{decl.keyword}")(decl)
            except (ModelSyntaxError, ModelValidationError):
                raise
            except QuasiSetError as exc:
                raise self.fail(decl, exc.message) from None

        for name, draft in self.metrics.items():
            self.model.metric_spaces[name] = QuasiMetricSpace.from_table(
                self.model.universe, draft.carrier, draft.table, name=name
            )
        return self.model

    def on_species(self, decl: Declaration) -> None:
        pass

    def _species(self, decl: Declaration, name: str) -> str:
        line = self.model.species.get(name)
        if line is None:
            raise self.fail(decl, f"undeclared species {name!r}")
        if line > decl.line:
            raise self.fail(decl, f"species {name!r} is used before its declaration at line {line}")
        return name

    def on_micro(self, decl: Declaration) -> None:
        name, species = decl.args
        self.declare(decl, "entity", name)
        handle = add_micro_atom(self.model.universe, self._species(decl, species))
        self.model.entities[name] = handle

    def on_macro(self, decl: Declaration) -> None:
        name, label = decl.args
        self.declare(decl, "entity", name)
        self.model.entities[name] = add_macro_atom(self.model.universe, label)

    def on_qset(self, decl: Declaration) -> None:
        name, members = decl.args[0], decl.args[1:]
        handles = [self.entity(decl, m) for m in members]
        self.declare(decl, "entity", name)
        self.model.entities[name] = make_qset(self.model.universe, handles)

    def on_weak_pair(self, decl: Declaration) -> None:
        name, x, y = decl.args
        hx, hy = self.entity(decl, x), self.entity(decl, y)
        self.declare(decl, "entity", name)
        self.model.entities[name] = weak_pair(self.model.universe, hx, hy)

    def on_weak_singleton(self, decl: Declaration) -> None:
        name, x = decl.args
        hx = self.entity(decl, x)
        self.declare(decl, "entity", name)
        self.model.entities[name] = weak_singleton(self.model.universe, hx)

    def on_ball(self, decl: Declaration) -> None:
        name, center, radius = decl.args
        record = self.validated(decl, BallDecl, name=name, center=_coordinates(center), radius=radius)
        self.declare(decl, "ball", name)
        self.model.balls[name] = Ball(tuple(record.center), record.radius)

    def on_region(self, decl: Declaration) -> None:
        name, ball_names = decl.args[0], decl.args[1:]
        balls = []
        for ball in ball_names:
            if ball not in self.model.balls:
                raise self.fail(decl, f"undeclared ball {ball!r}")
            balls.append(self.model.balls[ball])
        if len({b.dimension for b in balls}) != 1:
            raise self.fail(decl, f"balls of region {name!r} differ in dimension")
        self.declare(decl, "region", name)
        self.regions[name] = _RegionDraft(decl.line, balls)

    def _region(self, decl: Declaration, name: str) -> _RegionDraft:
        draft = self.regions.get(name)
        if draft is None:
            raise self.fail(decl, f"undeclared region {name!r}")
        return draft

    def _open_region(self, decl: Declaration, name: str) -> _RegionDraft:
        draft = self._region(decl, name)
        if draft.used_at is not None:
            raise self.fail(decl, f"region {name!r} is already used by a space at line {draft.used_at}")
        return draft

    def on_point(self, decl: Declaration) -> None:
        name, coords = decl.args
        draft = self._open_region(decl, name)
        try:
            point = tuple(float(v) for v in _coordinates(coords))
        except ValueError:
            raise self.fail(decl, f"bad coordinates {coords!r}") from None
        if len(point) != draft.balls[0].dimension:
            raise self.fail(decl, f"point {coords} has the wrong dimension")
        if not any(b.contains(point) for b in draft.balls):
            raise self.fail(decl, f"point {coords} is not strictly inside any ball of {name!r}")
        draft.points.append(point)

    def on_sample(self, decl: Declaration) -> None:
        record = self.validated(decl, SampleDecl, region=decl.args[0], count=decl.args[1],
                                seed=decl.args[2] if len(decl.args) > 2 else 0)
        draft = self._open_region(decl, record.region)
        draft.points.extend(sample_region(draft.balls, record.count, record.seed))

    def on_eprb(self, decl: Declaration) -> None:
        flag = decl.args[4] if len(decl.args) > 4 else ""
        if flag not in ("", "unchecked"):
            raise self.fail(decl, f"unknown eprb flag {flag!r}")
        record = self.validated(decl, EPRBDecl, name=decl.args[0], region=decl.args[1],
                                c=decl.args[2], species=decl.args[3], unchecked=bool(flag))
        draft = self._region(decl, record.region)
        self._species(decl, record.species)
        self.declare(decl, "space", record.name)
        region = RegionV(draft.balls[0].dimension, tuple(draft.balls), tuple(draft.points))
        validate = self.strict or not record.unchecked
        space = build_eprb(self.model.universe, region, record.c, record.species, validate=validate)
        if not space.check.ok:
            self.model.warnings.append(
                f"line {decl.line}: space {record.name!r} violates A2 "
                f"(sup-diameter {space.check.sup_diameter:.12g} > 2c = {2 * record.c:.12g})"
            )
        draft.used_at = decl.line
        self.model.eprb_spaces[record.name] = space

    def on_metric(self, decl: Declaration) -> None:
        name, carrier = decl.args
        handle = self.entity(decl, carrier)
        if self.model.universe.entity(handle).sort is not Sort.QSET:
            raise self.fail(decl, f"carrier {carrier!r} is not a qset")
        self.declare(decl, "space", name)
        self.metrics[name] = _MetricDraft(decl.line, handle)

    def _distance(self, decl: Declaration, symmetric: bool) -> None:
        record = self.validated(decl, DistanceDecl, space=decl.args[0], x=decl.args[1],
                                y=decl.args[2], value=decl.args[3])
        draft = self.metrics.get(record.space)
        if draft is None:
            raise self.fail(decl, f"undeclared metric space {record.space!r}")
        x, y = self.entity(decl, record.x), self.entity(decl, record.y)
        draft.table[(x, y)] = record.value
        if symmetric:
            draft.table[(y, x)] = record.value

    def on_distance(self, decl: Declaration) -> None:
        self._distance(decl, symmetric=True)

    def on_arc(self, decl: Declaration) -> None:
        self._distance(decl, symmetric=False)

    def _relation(self, decl: Declaration) -> QRelation:
        name, source, target = decl.args[:3]
        pairs = []
        for token in decl.args[3:]:
            first, sep, second = token.partition(":")
            if not sep:
                raise self.fail(decl, f"pair {token!r} must be written first:second")
            pairs.append((self.entity(decl, first), self.entity(decl, second)))
        relation = QRelation.of(self.entity(decl, source), self.entity(decl, target), pairs)
        if not is_relation(self.model.universe, relation):
            raise self.fail(decl, f"relation {name!r} has pairs outside {source} x {target}")
        self.declare(decl, "relation", name)
        self.model.relations[name] = relation
        return relation

    def on_relation(self, decl: Declaration) -> None:
        self._relation(decl)

    def on_quasi_function(self, decl: Declaration) -> None:
        relation = self._relation(decl)
        name = decl.args[0]
        self.model.quasi_functions.append(name)
        if not is_quasi_function(self.model.universe, relation):
            message = f"{name!r} is not a quasi-function (totality or u ~ u' => v ~ v' fails)"
            if self.strict:
                raise self.fail(decl, message)
            self.model.warnings.append(f"line {decl.line}: {message}")

    def on_formula(self, decl: Declaration) -> None:
        name, text = decl.args
        try:
            formula = parse(text)
        except FormulaSyntaxError as exc:
            raise ModelSyntaxError(decl.line, f"formula {name!r}: {exc.diagnostic}") from None
        self.declare(decl, "formula", name)
        self.model.formulas[name] = formula

    def on_expect(self, decl: Declaration) -> None:
        name, verdict = decl.args[:2]
        if name not in self.model.formulas:
            raise self.fail(decl, f"undeclared formula {name!r}")
        if verdict not in ("holds", "fails"):
            raise self.fail(decl, f"expected 'holds' or 'fails', got {verdict!r}")
        assignment = {}
        for token in decl.args[2:]:
            var, sep, target = token.partition("=")
            if not sep:
                raise self.fail(decl, f"binding {token!r} must be written var=name")
            if target not in self.model.constants():
                raise self.fail(decl, f"undeclared name {target!r}")
            assignment[var] = target
        expectation = Expectation(decl.line, name, verdict == "holds", assignment)
        self.model.expectations.append(expectation)
        constants = self.model.constants()
        values = {var: constants[target] for var, target in assignment.items()}
        result = evaluate(self.model.formulas[name], self.model.universe, values, constants)
        if result != expectation.holds:
            message = f"formula {name!r} {'fails' if expectation.holds else 'holds'}, expected {verdict}"
            if self.strict:
                raise self.fail(decl, message)
            self.model.warnings.append(f"line {decl.line}: {message}")


def load_model(model_file: ModelFile, strict: bool = True) -> Model:
    """
    Build the universe and every declared object. ``strict`` turns A2,
    quasi-function and expectation failures into errors; otherwise they are
    kept as warnings so the audit can report them.
    """
    model = _Loader(model_file, strict).load()
    logger.info(
        "loaded model: %d entities, %d spaces, %d relations, %d formulas",
        len(model.entities), len(model.space_names()), len(model.relations), len(model.formulas),
    )
    return model


def dump_eprb(space: EPRBSpace, name: str = "S", species_description: str = "") -> str:
    """Model-file text that rebuilds ``space``."""
    lines = [f"# EPRB space: n={space.region.dimension}, c={space.c!r}, "
             f"sup-diameter={space.check.sup_diameter!r}"]
    lines.append(f"species {space.species}" + (f" {shlex.quote(species_description)}" if species_description else ""))
    for index, ball in enumerate(space.region.balls):
        center = ",".join(repr(v) for v in ball.center)
        lines.append(f"ball b{index} {center} {ball.radius!r}")
    lines.append("region V " + " ".join(f"b{i}" for i in range(len(space.region.balls))))
    for point in space.region.sample_points:
        lines.append("point V " + ",".join(repr(v) for v in point))
    lines.append(f"eprb {name} V {space.c!r} {space.species}")
    return "\n".join(lines) + "\n"
