import math

import numpy as np
import pytest

from manipkit.core.errors import AttachmentError
from manipkit.schemas.camera import CameraIntrinsics
from manipkit.schemas.scene import SceneSpec
from manipkit.services.kinematics import Attachment, attach, step, tangent
from manipkit.services.raster import DepthMap, PixelCoord
from manipkit.services.render import render
from manipkit.services.scene import build_scene

pytestmark = [pytest.mark.unit, pytest.mark.sim]

CAMERA = {"fx": 48.0, "fy": 48.0, "cx": 32.0, "cy": 32.0, "width": 65, "height": 65}


def door_scene(radius=0.5, q_max=1.6):
    """Door panel hinged on the y axis through (0, 0, 1), panel extending towards +x"""
    return build_scene(SceneSpec.model_validate({
        "name": "door_fixture",
        "parts": [{
            "id": "door",
            "box": {"center": [radius / 2, 0.0, 1.005], "half_extents": [radius / 2 + 0.05, 0.3, 0.005]},
            "joint": {"kind": "revolute", "axis": [0.0, 1.0, 0.0], "anchor": [0.0, 0.0, 1.0], "limits": [0.0, q_max]},
        }],
        "camera": CAMERA,
    }))


def drawer_scene(limit=0.4):
    return build_scene(SceneSpec.model_validate({
        "name": "drawer_fixture",
        "parts": [
            {"id": "body", "box": {"center": [0.0, 0.0, 1.2], "half_extents": [0.3, 0.3, 0.2]}},
            {"id": "drawer", "box": {"center": [0.0, 0.0, 0.99], "half_extents": [0.25, 0.12, 0.01]},
             "joint": {"kind": "prismatic", "axis": [0.0, 0.0, -1.0], "limits": [0.0, limit]}},
        ],
        "camera": CAMERA,
    }))


def gudermannian(x: float) -> float:
    return math.atan(math.sinh(x))


def integrate_fixed_pull(radius: float, length: float, steps: int) -> float:
    """RK4 on d(theta)/dL = cos(theta) / r: fixed pull along the initial tangent"""
    f = lambda theta: math.cos(theta) / radius
    theta, h = 0.0, length / steps
    for _ in range(steps):
        k1 = f(theta)
        k2 = f(theta + h * k1 / 2)
        k3 = f(theta + h * k2 / 2)
        k4 = f(theta + h * k3)
        theta += h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
    return theta


def _attach_at(part_id, point):
    return Attachment(part_id=part_id, material_point=np.asarray(point, dtype=float), pixel=PixelCoord(0, 0))


class TestAttach:
    """Test attaching the gripper to the part under a pixel"""

    def test_principal_ray(self):
        k = CameraIntrinsics(fx=48.0, fy=48.0, cx=31.5, cy=31.5)
        assert k.backproject(k.cx, k.cy, 0.8).tolist() == [0.0, 0.0, 0.8]

    def test_attach_on_principal_ray(self):
        scene = drawer_scene()
        obs = render(scene)
        att = attach(scene, PixelCoord(32, 32), obs.depth)
        assert att.part_id == "drawer"
        assert np.allclose(att.world_point(scene), [0.0, 0.0, 0.98], atol=1e-12)

    def test_attached_point_follows_part(self):
        scene = drawer_scene()
        att = attach(scene, PixelCoord(35, 30), render(scene).depth)
        before = att.world_point(scene)
        scene.part("drawer").joint.q += 0.2
        assert np.allclose(att.world_point(scene) - before, [0.0, 0.0, -0.2], atol=1e-12)

    def test_outside_all_parts(self):
        scene = drawer_scene()
        depth = np.ones((65, 65))
        with pytest.raises(AttachmentError):
            attach(scene, PixelCoord(0, 0), DepthMap(depth))

    def test_fixed_part(self):
        """Test that pulling a fixed part is refused"""
        scene = drawer_scene()
        obs = render(scene)
        # body face is visible above the drawer front
        assert obs.mask("body").data[20, 32]
        with pytest.raises(AttachmentError, match="fixed"):
            attach(scene, PixelCoord(32, 20), obs.depth)

    def test_invalid_depth(self):
        scene = drawer_scene()
        with pytest.raises(AttachmentError):
            attach(scene, PixelCoord(32, 32), DepthMap(np.zeros((65, 65))))

    def test_outside_image(self):
        scene = drawer_scene()
        with pytest.raises(AttachmentError):
            attach(scene, PixelCoord(70, 3), render(scene).depth)


class TestStepPrismatic:
    """Test sliding joints under a pull"""

    def test_aligned_pull_is_exact(self):
        scene = drawer_scene()
        att = _attach_at("drawer", [0.0, 0.0, 0.98])
        record = step(scene, att, np.array([0.0, 0.0, -1.0]), 0.18)
        assert abs(record.dq - 0.18) <= 1e-12
        assert np.allclose(record.realized_disp, [0.0, 0.0, -0.18], atol=1e-12)
        assert record.dq >= 0.1

    def test_perpendicular_pull_does_nothing(self):
        scene = drawer_scene()
        att = _attach_at("drawer", [0.0, 0.0, 0.98])
        record = step(scene, att, np.array([1.0, 0.0, 0.0]), 0.18)
        assert record.dq == 0.0
        assert record.realized_disp == [0.0, 0.0, 0.0]

    def test_oblique_pull_projects(self):
        scene = drawer_scene()
        att = _attach_at("drawer", [0.0, 0.0, 0.98])
        d = np.array([1.0, 0.0, -1.0]) / math.sqrt(2)
        record = step(scene, att, d, 0.1)
        assert record.dq == pytest.approx(0.1 / math.sqrt(2), abs=1e-12)

    def test_pushing_against_axis_is_blocked(self):
        scene = drawer_scene()
        att = _attach_at("drawer", [0.0, 0.0, 0.98])
        assert step(scene, att, np.array([0.0, 0.0, 1.0]), 0.18).dq == 0.0

    def test_clamped_to_limit(self):
        scene = drawer_scene(limit=0.1)
        att = _attach_at("drawer", [0.0, 0.0, 0.98])
        record = step(scene, att, np.array([0.0, 0.0, -1.0]), 0.18)
        assert record.q == 0.1
        assert record.dq == pytest.approx(0.1)

    def test_rejects_non_positive_length(self):
        scene = drawer_scene()
        att = _attach_at("drawer", [0.0, 0.0, 0.98])
        with pytest.raises(ValueError):
            step(scene, att, np.array([0.0, 0.0, -1.0]), 0.0)


class TestStepRevolute:
    """Test hinged joints against the closed-form opening angle"""

    def test_tangent_direction(self):
        scene = door_scene()
        t_hat, speed = tangent(scene.part("door").joint, np.array([0.5, 0.0, 1.0]))
        assert np.allclose(t_hat, [0.0, 0.0, -1.0])
        assert speed == pytest.approx(0.5)

    def test_fixed_tangential_pull_closed_form(self):
        scene = door_scene(radius=0.5)
        att = _attach_at("door", [0.5, 0.0, 1.0])
        record = step(scene, att, np.array([0.0, 0.0, -1.0]), 0.18)

        assert record.dq == pytest.approx(gudermannian(0.36), abs=1e-3)
        assert record.dq == pytest.approx(integrate_fixed_pull(0.5, 0.18, 2000), abs=1e-3)

    def test_substep_refinement_converges(self):
        exact = integrate_fixed_pull(0.5, 0.18, 4000)
        errors = []
        for h in (0.02, 0.01, 0.005):
            scene = door_scene(radius=0.5)
            att = _attach_at("door", [0.5, 0.0, 1.0])
            errors.append(abs(step(scene, att, np.array([0.0, 0.0, -1.0]), 0.18, substep=h).dq - exact))
        assert errors[0] > errors[1] > errors[2]
        assert errors[1] / errors[2] >= 1.5

    def test_contact_on_hinge_axis_is_degenerate(self):
        scene = door_scene()
        att = _attach_at("door", [0.0, 0.1, 1.0])
        record = step(scene, att, np.array([0.0, 0.0, -1.0]), 0.18)
        assert record.degenerate
        assert record.dq == 0.0

    def test_motion_never_amplified(self):
        rng = np.random.default_rng(10)
        for _ in range(40):
            scene = door_scene(radius=float(rng.uniform(0.1, 0.6)), q_max=float(rng.uniform(0.2, 3.0)))
            joint = scene.part("door").joint
            att = _attach_at("door", [float(rng.uniform(0.05, 0.5)), 0.0, 1.0])
            d = rng.normal(size=3)
            length = float(rng.uniform(0.01, 0.3))
            record = step(scene, att, d / np.linalg.norm(d), length)
            assert np.linalg.norm(record.realized_disp) <= length + 1e-9
            assert joint.limits[0] <= joint.q <= joint.limits[1]
            assert abs(np.linalg.norm(record.commanded_dir) - 1.0) <= 1e-12

    def test_detach_angle(self):
        scene = door_scene()
        att = _attach_at("door", [0.5, 0.0, 1.0])
        d = np.array([1.0, 0.0, -1.0]) / math.sqrt(2)
        record = step(scene, att, d, 0.05, detach_angle_deg=30.0)
        assert record.detached
        assert record.dq == 0.0

    def test_detach_disabled_by_default(self):
        scene = door_scene()
        att = _attach_at("door", [0.5, 0.0, 1.0])
        d = np.array([1.0, 0.0, -1.0]) / math.sqrt(2)
        record = step(scene, att, d, 0.05)
        assert not record.detached
        assert record.dq > 0.0

    def test_adaptive_reaim_beats_fixed_direction(self):
        results = {}
        for adaptive in (True, False):
            scene = door_scene(radius=0.12, q_max=math.pi)
            att = _attach_at("door", [0.12, 0.0, 1.0])
            d = np.array([0.0, 0.0, -1.0])
            for _ in range(7):
                record = step(scene, att, d, 0.05)
                disp = np.asarray(record.realized_disp)
                if adaptive and np.linalg.norm(disp) > 1e-4:
                    d = disp / np.linalg.norm(disp)
            results[adaptive] = scene.part("door").joint.q
        assert results[True] >= 0.3
        assert results[True] > results[False]
