from pathlib import Path

import numpy as np
import pytest
from typer.testing import CliRunner

from manipkit.core.config import settings
from manipkit.schemas.camera import CameraIntrinsics
from manipkit.schemas.proposal import ProposerConfig
from manipkit.schemas.trace import SimConfig
from manipkit.services.predictors import OraclePredictor
from manipkit.services.raster import BinaryMask, NormalMap
from manipkit.services.scene import load_scene

ROOT = Path(__file__).parent
SUITES = ROOT / "suites"

FACING_CAMERA = (0.0, 0.0, -1.0)


@pytest.fixture
def anyio_backend():
    return "asyncio"


@pytest.fixture
def desk_suite_dir():
    return SUITES / "desk"


@pytest.fixture
def hinged_suite_dir():
    return SUITES / "hinged"


@pytest.fixture
def drawer_scene():
    return load_scene(SUITES / "desk" / "drawer" / "drawer_center.json")


@pytest.fixture
def door_scene():
    return load_scene(SUITES / "desk" / "door" / "door_left.json")


@pytest.fixture
def lid_scene():
    return load_scene(SUITES / "hinged" / "lid" / "lid_thin.json")


@pytest.fixture
def scene_spec_data():
    """Raw JSON-able scene: drawer front in front of a fixed body"""
    return {
        "name": "drawer_fixture",
        "category": "drawer",
        "parts": [
            {"id": "body", "box": {"center": [0.0, 0.0, 1.2], "half_extents": [0.3, 0.3, 0.2]}},
            {
                "id": "drawer",
                "box": {"center": [0.0, 0.0, 0.99], "half_extents": [0.25, 0.12, 0.01]},
                "joint": {"kind": "prismatic", "axis": [0.0, 0.0, -1.0], "limits": [0.0, 0.4]},
            },
        ],
        "camera": {"fx": 48.0, "fy": 48.0, "cx": 31.5, "cy": 31.5, "width": 64, "height": 64},
    }


@pytest.fixture
def intrinsics():
    return CameraIntrinsics(fx=48.0, fy=48.0, cx=31.5, cy=31.5)


@pytest.fixture
def oracle():
    return OraclePredictor()


@pytest.fixture
def sim_config():
    return SimConfig(seed=7)


@pytest.fixture
def proposer_config():
    return ProposerConfig(rng_seed=11)


@pytest.fixture
def rect_mask_factory():
    def _rect(width, height, x0, x1, y0, y1):
        data = np.zeros((height, width), dtype=bool)
        data[y0:y1 + 1, x0:x1 + 1] = True
        return BinaryMask(data)

    return _rect


@pytest.fixture
def flat_normals_factory():
    def _flat(width, height, normal=FACING_CAMERA, valid=None):
        data = np.zeros((height, width, 3))
        data[...] = np.asarray(normal, dtype=np.float64) / np.linalg.norm(normal)
        if valid is not None:
            data[~np.asarray(valid, dtype=bool)] = 0.0
        return NormalMap(data)

    return _flat


@pytest.fixture
def cli_runner():
    return CliRunner()


@pytest.fixture
def app_settings():
    """Return application settings"""
    return settings
