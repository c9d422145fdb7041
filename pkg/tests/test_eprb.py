import math

import numpy as np
import pytest

from qsetlab.core import Species, add_micro_atom, indistinguishable, members, new_universe, quasi_cardinality
from qsetlab import eprb
from qsetlab.eprb import (
    Ball,
    RegionV,
    build_eprb,
    coordinates,
    counterexample_space,
    counterexample_unbounded,
    eprb_distance,
    figure_rows,
    isometry,
    minimal_c,
    sample_region,
    sup_diameter,
    to_quasi_metric_space,
    validate_diameter,
)
from qsetlab.errors import A1Violation, A2Violation, InvalidRegion, InvalidSeed, OutsideSpace
from qsetlab.metric import audit_axioms


def electrons():
    return new_universe([Species("electron")])


def two_balls(samples=()):
    return RegionV(2, (Ball((0, 0), 1), Ball((3, 0), 1)), samples)


def test_ball_validation():
    with pytest.raises(InvalidRegion):
        Ball((0, 0), 0)
    with pytest.raises(InvalidRegion):
        Ball((), 1)
    with pytest.raises(InvalidRegion):
        RegionV(2, (Ball((0, 0), 1), Ball((0, 0, 0), 1)))
    with pytest.raises(InvalidRegion):
        two_balls([(1.0, 0.0)])  # on the sphere, not inside


def test_sup_diameter_closed_form():
    assert sup_diameter(RegionV(3, (Ball((1, 2, 3), 2.5),)))[0] == 5.0
    diameter, witness = sup_diameter(two_balls())
    assert diameter == 5.0
    assert witness == (0, 1)
    assert minimal_c(two_balls()) == 2.5


def test_diameter_bound_is_sharp():
    region = two_balls()
    assert validate_diameter(region, 2.5)
    assert not validate_diameter(region, 2.5 - 1e-9)
    with pytest.raises(A2Violation, match=r"minimal c = D/2 = 2\.5"):
        build_eprb(electrons(), region, 2.0, "electron")


def test_build_registers_weak_pair_and_points():
    u = electrons()
    space = build_eprb(u, two_balls([(0, 0), (3, 0), (0.5, 0.5)]), 2.5, "electron")
    assert quasi_cardinality(u, space.pair).value == 2
    assert indistinguishable(u, *space.atoms)
    assert members(u, space.carrier) == set(space.atoms) | set(space.point_handles)
    assert coordinates(space, space.point_handles[2]) == (0.5, 0.5)
    with pytest.raises(OutsideSpace):
        coordinates(space, space.atoms[0])


def test_build_rejects_existing_m_atoms_and_bad_c():
    u = electrons()
    add_micro_atom(u, "electron")
    with pytest.raises(A1Violation):
        build_eprb(u, two_balls(), 2.5, "electron")
    with pytest.raises(A2Violation):
        build_eprb(electrons(), two_balls(), 0.0, "electron")


def test_distance_cases():
    u = electrons()
    space = build_eprb(u, two_balls([(0, 0), (3, 0)]), 2.5, "electron")
    x1, x2 = space.atoms
    p, q = space.point_handles
    assert eprb_distance(space, x1, x2) == 0.0
    assert eprb_distance(space, x1, p) == 2.5
    assert eprb_distance(space, q, x2) == 2.5
    assert eprb_distance(space, p, q) == 3.0
    assert eprb_distance(space, (0, 0), (3, 0)) == 3.0
    with pytest.raises(OutsideSpace):
        eprb_distance(space, (1.0, 1.0), p)
    with pytest.raises(OutsideSpace):
        eprb_distance(space, 999, p)


def random_region(rng, n):
    balls = tuple(
        Ball(tuple(rng.uniform(-5, 5, size=n)), float(rng.uniform(0.2, 2.0)))
        for _ in range(rng.integers(1, 4))
    )
    return RegionV(n, balls)


def test_random_admissible_spaces_pass_the_audit():
    rng = np.random.default_rng(42)
    for trial in range(100):
        n = int(rng.integers(1, 4))
        region = random_region(rng, n)
        region = region.with_samples(sample_region(region.balls, int(rng.integers(10, 51)), seed=trial))
        c = minimal_c(region) * float(rng.uniform(1.0, 2.0))
        space = build_eprb(electrons(), region, c, "electron")
        report = audit_axioms(to_quasi_metric_space(space))
        assert report.passed, [str(v) for v in report.violations]


@pytest.mark.parametrize("c", [0.5, 1.0, 3.5])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_unbounded_region_breaks_the_triangle(c, n):
    a, b, diagnostic = counterexample_unbounded(c, n)
    assert diagnostic.distance == pytest.approx(2 * c + 1)
    assert diagnostic.deficit == pytest.approx(1.0)
    assert diagnostic.deficit > 0
    space, _ = counterexample_space(electrons(), c, n, "electron")
    report = audit_axioms(to_quasi_metric_space(space))
    assert 6 in report.failed_axioms()
    pa, pb = space.point_handles
    assert any(v.axiom == 6 and v.witnesses == (pa, space.atoms[0], pb) for v in report.violations)


def test_sampling_is_deterministic_and_interior():
    region = two_balls()
    first = sample_region(region.balls, 25, seed=9)
    assert first == sample_region(region.balls, 25, seed=9)
    assert first != sample_region(region.balls, 25, seed=10)
    assert all(region.owner(p) is not None for p in first)
    assert [region.owner(p) for p in first[:4]] == [0, 1, 0, 1]


@pytest.mark.parametrize("radius", [1e-10, 1e-12, 2e-9])
def test_tiny_balls_still_have_an_interior(radius):
    ball = Ball((0.0, 0.0), radius)
    assert ball.margin() == pytest.approx(radius / 2)
    assert ball.contains((0.0, 0.0))
    points = sample_region((ball,), 3, seed=0)
    assert len(points) == 3
    assert all(ball.contains(p) for p in points)
    region = RegionV(2, (ball,), points)
    assert region.owner(points[0]) == 0


def test_margin_scales_with_large_balls():
    ball = Ball((0.0,), 1e3)
    assert ball.margin(1e-9) == pytest.approx(1e-6)
    assert not ball.contains((1e3 - 1e-7,), 1e-9)
    assert ball.contains((1e3 - 1e-5,), 1e-9)


def test_far_centre_with_tiny_radius_samples_its_centre():
    # offsets below the float spacing at 1e8 round back onto the centre
    assert sample_region((Ball((1e8,), 1e-12),), 2, seed=0) == ((1e8,), (1e8,))


def test_sampler_gives_up_on_a_ball_without_interior(monkeypatch):
    monkeypatch.setattr(eprb, "SAMPLE_ATTEMPTS", 50)
    monkeypatch.setattr(Ball, "contains", lambda self, point, epsilon=None: False)
    with pytest.raises(InvalidRegion, match="no interior point of ball 0 found in 50 draws"):
        sample_region((Ball((0.0,), 1.0),), 1, seed=0)


def test_negative_seed_rejected():
    with pytest.raises(InvalidSeed):
        sample_region(two_balls().balls, 3, seed=-1)


def test_isometry_preserves_distances_and_admissibility():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = 3
        region = random_region(rng, n)
        region = region.with_samples(sample_region(region.balls, 8, seed=1))
        rotation, _ = np.linalg.qr(rng.normal(size=(n, n)))
        moved = isometry(region, rotation, rng.uniform(-10, 10, size=n))
        assert sup_diameter(moved)[0] == pytest.approx(sup_diameter(region)[0], abs=1e-9)
        c = minimal_c(region) * 1.01
        original = build_eprb(electrons(), region, c, "electron")
        image = build_eprb(electrons(), moved, c, "electron")
        for (p, q), (p2, q2) in zip(zip(original.point_handles, original.point_handles[1:]),
                                    zip(image.point_handles, image.point_handles[1:])):
            assert eprb_distance(image, p2, q2) == pytest.approx(eprb_distance(original, p, q), abs=1e-9)
        assert audit_axioms(to_quasi_metric_space(image)).passed


def test_figure_rows_name_the_owning_ball():
    space = build_eprb(electrons(), two_balls([(0, 0), (3, 0)]), 2.5, "electron")
    assert figure_rows(space) == [[0.0, 0.0, 0], [3.0, 0.0, 1]]
    assert math.isclose(space.check.sup_diameter, 5.0)


def test_a2_threshold_flips_on_random_regions():
    rng = np.random.default_rng(8)
    flips = 0
    for _ in range(100):
        region = random_region(rng, int(rng.integers(1, 4)))
        half = minimal_c(region)
        assert half * 2 > 2e-6
        build_eprb(electrons(), region, half + 1e-6, "electron")
        with pytest.raises(A2Violation):
            build_eprb(electrons(), region, half - 1e-6, "electron")
        flips += 1
    assert flips == 100
