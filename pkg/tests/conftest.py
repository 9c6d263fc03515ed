import copy
import json

import pytest

BASE_CONFIG = {
    "seed": 11,
    "model": {
        "design": {"kind": "gaussian"},
        "noise": {"kind": "gaussian", "sigma": 1.0},
        "w_star": [0.3],
    },
    "set": {"kind": "box", "center": [0.0], "halfwidths": [1.0]},
    "estimator": {"assumption": "coord_second", "tau": "auto"},
    "experiment": {"n": 40, "epsilons": [1.0]},
}


def make_config(**sections) -> dict:
    """Deep-copied BASE_CONFIG with per-section overrides merged in."""
    cfg = copy.deepcopy(BASE_CONFIG)
    for name, patch in sections.items():
        if isinstance(patch, dict) and isinstance(cfg.get(name), dict):
            cfg[name].update(patch)
        else:
            cfg[name] = patch
    return cfg


@pytest.fixture
def write_config(tmp_path):
    def _write(cfg: dict, name: str = "config.json") -> str:
        path = tmp_path / name
        path.write_text(json.dumps(cfg))
        return str(path)

    return _write
