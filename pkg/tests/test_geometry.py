import math

import pytest
from hypothesis import given, strategies as st

from taskcell.geometry import (
    DOWN,
    IDENTITY,
    Location3D,
    Pose6D,
    Quaternion,
    point_line_distance,
    vcross,
    vdot,
    vunit,
)

finite = st.floats(allow_nan=False, allow_infinity=False, min_value=-1e6, max_value=1e6)
nonzero_quat = st.tuples(finite, finite, finite, finite).filter(
    lambda q: math.sqrt(sum(c * c for c in q)) > 1e-6
)


@given(nonzero_quat)
def test_quaternion_normalizes_on_construction(q):
    quat = Quaternion(*q)
    assert abs(quat.norm() - 1.0) <= 1e-9


def test_zero_quaternion_rejected():
    with pytest.raises(ValueError):
        Quaternion(0.0, 0.0, 0.0, 0.0)


@given(nonzero_quat)
def test_pose_orientation_unit_norm(q):
    pose = Pose6D((0.0, 0.0, 0.0), Quaternion(*q))
    assert abs(pose.orientation.norm() - 1.0) <= 1e-9


def test_pose_position_must_be_finite():
    with pytest.raises(ValueError):
        Pose6D((float("nan"), 0.0, 0.0))


def test_rotation_between_aligns_vectors():
    r = Quaternion.rotation_between((1, 0, 0), (0, 1, 0))
    rotated = r.rotate((1, 0, 0))
    assert vdot(rotated, (0, 1, 0)) == pytest.approx(1.0, abs=1e-12)


def test_rotation_between_antiparallel_is_deterministic():
    a = Quaternion.rotation_between((0, 0, 1), (0, 0, -1))
    b = Quaternion.rotation_between((0, 0, 1), (0, 0, -1))
    assert a == b
    assert vdot(a.rotate((0, 0, 1)), (0, 0, -1)) == pytest.approx(1.0, abs=1e-9)


unit_vec = st.tuples(finite, finite, finite).filter(
    lambda v: math.sqrt(sum(c * c for c in v)) > 1e-3
)


@given(unit_vec, unit_vec)
def test_rotation_between_property(a, b):
    ua, ub = vunit(a), vunit(b)
    r = Quaternion.rotation_between(ua, ub)
    assert vdot(r.rotate(ua), ub) == pytest.approx(1.0, abs=1e-9)


def test_down_orientation_points_tool_into_table():
    assert DOWN.rotate((0, 0, 1)) == pytest.approx((0, 0, -1))


def test_compose_transforms_like_sequential_application():
    p1 = Pose6D((1, 0, 0), Quaternion.from_axis_angle((0, 0, 1), math.pi / 2))
    p2 = Pose6D((1, 0, 0), IDENTITY)
    composed = p1.compose(p2)
    assert composed.position == pytest.approx((1, 1, 0), abs=1e-12)


def test_location_rejects_below_table():
    with pytest.raises(ValueError):
        Location3D(0.0, 0.0, -0.01)
    assert Location3D(0.1, -0.2).z == 0.0


def test_point_line_distance():
    assert point_line_distance((0, 1, 0), (0, 0, 0), (0, 0, 1)) == pytest.approx(1.0)
    assert point_line_distance((0, 0, 5), (0, 0, 0), (0, 0, 1)) == pytest.approx(0.0)


def test_cross_product_orientation():
    assert vcross((1, 0, 0), (0, 1, 0)) == (0, 0, 1)
