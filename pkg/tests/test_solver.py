import random

import pytest

from taskcell.errors import DegenerateFeature, UnknownFeature, UnsolvableConstraints
from taskcell.geometry import point_line_distance, vadd, vdot, vunit
from taskcell.model import (
    AgainstCollar,
    Concentric,
    ConstraintSet,
    Coplanar,
    CylinderFeature,
    Distance,
    ObjectModel,
)
from taskcell.tasks import solve_assembly_pose


def _cyl(point, direction, radius=0.01):
    return CylinderFeature(point, direction, radius)


def _model(mid, **features):
    return ObjectModel(mid, features=features)


def test_coincident_axes_solve_to_identity():
    a = _model("a", bore=_cyl((0, 0, 0), (0, 0, 1)))
    b = _model("b", shaft=_cyl((0, 0, 0), (0, 0, 1)))
    pose = solve_assembly_pose(a, b, ConstraintSet((Concentric("bore", "shaft"),)))
    assert pose.position == pytest.approx((0, 0, 0), abs=1e-12)
    assert pose.orientation.as_tuple() == pytest.approx((1, 0, 0, 0), abs=1e-12)


def test_against_collar_offset_matches_hand_computation(models):
    # bearing bore point (0,0,0); axis shaft point (0,0,0.06); collar point
    # (0,0,0.02). Flush contact puts the bore point at the collar plane:
    # offset = (collar - shaft)·z = -0.04, so position = shaft + offset·z
    # - R·bore = (0,0,0.02).
    cs = ConstraintSet(
        (Concentric("bore", "shaft"), AgainstCollar("bore", "collar"))
    )
    pose = solve_assembly_pose(models["bearing"], models["axis"], cs)
    assert pose.position == pytest.approx((0.0, 0.0, 0.02), abs=1e-12)
    assert pose.orientation.as_tuple() == pytest.approx((1, 0, 0, 0), abs=1e-12)


def test_distance_constraint_exact_offset():
    a = _model("a", bore=_cyl((0, 0, 0), (0, 0, 1)))
    b = _model("b", shaft=_cyl((0, 0, 0), (0, 0, 1)))
    cs = ConstraintSet(
        (Concentric("bore", "shaft"), Distance("bore", "shaft", 25.0))
    )
    pose = solve_assembly_pose(a, b, cs)
    assert pose.position == pytest.approx((0, 0, 0.025), abs=1e-12)


def test_two_concentric_constraints_rejected():
    a = _model("a", f1=_cyl((0, 0, 0), (0, 0, 1)), f2=_cyl((0, 0, 0.1), (0, 0, 1)))
    b = _model("b", g1=_cyl((0, 0, 0), (0, 0, 1)), g2=_cyl((0, 0, 0.1), (0, 0, 1)))
    cs = ConstraintSet((Concentric("f1", "g1"), Concentric("f2", "g2")))
    with pytest.raises(UnsolvableConstraints):
        solve_assembly_pose(a, b, cs)


def test_coplanar_outside_fragment():
    a = _model("a", f1=_cyl((0, 0, 0), (0, 0, 1)))
    b = _model("b", g1=_cyl((0, 0, 0), (0, 0, 1)))
    cs = ConstraintSet((Concentric("f1", "g1"), Coplanar("f1", "g1")))
    with pytest.raises(UnsolvableConstraints):
        solve_assembly_pose(a, b, cs)


def test_distance_and_collar_together_rejected():
    a = _model("a", f1=_cyl((0, 0, 0), (0, 0, 1)))
    b = _model("b", g1=_cyl((0, 0, 0), (0, 0, 1)))
    cs = ConstraintSet(
        (
            Concentric("f1", "g1"),
            Distance("f1", "g1", 5.0),
            AgainstCollar("f1", "g1"),
        )
    )
    with pytest.raises(UnsolvableConstraints):
        solve_assembly_pose(a, b, cs)


def test_missing_feature():
    a = _model("a", f1=_cyl((0, 0, 0), (0, 0, 1)))
    b = _model("b", g1=_cyl((0, 0, 0), (0, 0, 1)))
    with pytest.raises(UnknownFeature):
        solve_assembly_pose(a, b, ConstraintSet((Concentric("nope", "g1"),)))


def test_degenerate_axis_direction():
    # bypass model validation: the solver re-checks axis norms itself
    a = ObjectModel("a")
    object.__setattr__(a, "features", {"f1": _cyl((0, 0, 0), (0, 0, 0))})
    b = _model("b", g1=_cyl((0, 0, 0), (0, 0, 1)))
    with pytest.raises(DegenerateFeature):
        solve_assembly_pose(a, b, ConstraintSet((Concentric("f1", "g1"),)))


def test_solved_pose_aligns_axes_randomized():
    rng = random.Random(20260809)
    for _ in range(200):
        da = vunit(tuple(rng.uniform(-1, 1) for _ in range(3)))
        db = vunit(tuple(rng.uniform(-1, 1) for _ in range(3)))
        pa = tuple(rng.uniform(-0.2, 0.2) for _ in range(3))
        pb = tuple(rng.uniform(-0.2, 0.2) for _ in range(3))
        a = _model("a", fa=_cyl(pa, da))
        b = _model("b", fb=_cyl(pb, db))
        pose = solve_assembly_pose(a, b, ConstraintSet((Concentric("fa", "fb"),)))
        moved_dir = pose.orientation.rotate(da)
        assert abs(abs(vdot(moved_dir, db)) - 1.0) <= 1e-9
        moved_point = pose.transform(pa)
        assert point_line_distance(moved_point, pb, db) <= 1e-9
        # second point along a's axis must also land on b's axis line
        second = pose.transform(vadd(pa, da))
        assert point_line_distance(second, pb, db) <= 1e-9


def test_antiparallel_axes_still_align():
    a = _model("a", fa=_cyl((0, 0, 0), (0, 0, 1)))
    b = _model("b", fb=_cyl((0, 0, 0), (0, 0, -1)))
    pose = solve_assembly_pose(a, b, ConstraintSet((Concentric("fa", "fb"),)))
    moved = pose.orientation.rotate((0, 0, 1))
    assert abs(vdot(moved, (0, 0, -1)) - 1.0) <= 1e-9
