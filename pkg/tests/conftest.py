import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lidarsynth import geometry, kernels  # noqa: E402
from lidarsynth.cli import main as cli_main  # noqa: E402

REPO_ROOT = Path(__file__).resolve().parent.parent
URBAN_SCENE = REPO_ROOT / "scenes" / "urban.scene"
GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Pay the JIT compilation cost once, outside any timed assertions."""
    tris = np.array([[[0.0, 0, 0], [1, 0, 0], [0, 1, 0]]])
    bvh = geometry.build_bvh(tris)
    o = np.array([[0.2, 0.2, 1.0]])
    d = np.array([[0.0, 0.0, -1.0]])
    kernels.cast_rays(bvh, o, d, np.zeros(1), np.full(1, np.inf))
    kernels.fast_scores(np.zeros((16, 16)), 10.0)


@pytest.fixture(scope="session")
def urban_dataset(tmp_path_factory):
    """A small (12-frame) render of the shipped urban scene."""
    out = tmp_path_factory.mktemp("urban") / "ds"
    rc = cli_main(["generate", "--scene", str(URBAN_SCENE),
                   "--output", str(out), "--frames", "12", "--seed", "1"])
    assert rc == 0
    return out


def write_scene(tmp_path: Path, text: str, name: str = "scene.txt") -> Path:
    p = tmp_path / name
    p.write_text(text)
    return p
