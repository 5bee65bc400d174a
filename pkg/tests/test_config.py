import json

import pytest

from hetsched.config import (
    ConfigError, catalog_to_dict, load_catalog, load_classes, load_kinds, load_platform, sys_c,
)
from hetsched.core import MS, US

# (kind, class) -> (ns, mW), transcribed from the profiling table
TABLE = {
    ("conv", "cpu"): (583 * US, 634), ("conv", "gpu"): (349 * US, 2225),
    ("conv", "accel-cnnfft"): (180 * US, 445),
    ("decoder", "cpu"): (1021 * US, 864), ("decoder", "gpu"): (20 * US, 1228),
    ("fft", "cpu"): (3193 * US, 1036), ("fft", "gpu"): (97 * US, 6364),
    ("fft", "accel-cnnfft"): (4 * US, 4),
    ("det", "cpu"): (3531 * MS, 3654), ("det", "gpu"): (156 * MS, 467),
    ("det", "accel-det"): (96 * MS, 28),
    ("tra", "cpu"): (1825 * MS, 5600), ("tra", "gpu"): (17 * MS, 12790),
    ("tra", "accel-tra"): (2 * MS, 590),
    ("loc", "cpu"): (165 * MS, 6133), ("loc", "gpu"): (95 * MS, 4457),
    ("loc", "accel-loc"): (10 * MS, 22),
    ("mission_plan", "cpu"): (1 * MS, 3534),
    ("motion_plan", "cpu"): (8 * MS, 4222),
    ("fusion", "cpu"): (100 * US, 505),
    ("omap", "cpu"): (976 * MS, 2995), ("omap", "gpu"): (761 * MS, 3533),
    ("spp", "cpu"): (1005 * MS, 3302), ("spp", "gpu"): (379 * MS, 3533),
    ("collision", "cpu"): (1 * MS, 500),
    ("path_track", "cpu"): (1 * MS, 501),
    ("frontier", "cpu"): (397 * MS, 5980),
}


def test_table_values_exact():
    kinds = load_kinds()
    got = {(k, c): (p.exec_time, p.power) for k, kind in kinds.items()
           for c, p in kind.profile.items()}
    assert got == TABLE


def test_platform_presets():
    b = load_platform("sys_b")
    assert b.counts() == {"cpu": 8, "gpu": 2, "accel-tra": 1, "accel-loc": 1, "accel-det": 1}
    c = sys_c(12, 4, 2, 3, 0)
    assert c.counts() == {"gpu": 3, "accel-tra": 4, "accel-loc": 2, "accel-det": 12}
    assert load_classes()["cpu"].dvfs_enabled


def test_catalogs_validate():
    for app in ("adsuite", "mapping3d", "delivery"):
        templates, meta = load_catalog(app)
        assert templates and meta["app"] == app
        again, _ = load_catalog(catalog_to_dict(templates, **meta))
        assert {t: v.edges for t, v in again.items()} == {t: v.edges for t, v in templates.items()}


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError) as e:
        load_platform({"name": "x"})
    assert e.value.field == "counts"
    with pytest.raises(ConfigError):
        load_platform({"counts": [["tpu", 1]]})
    with pytest.raises(ConfigError):
        load_kinds(str(tmp_path / "missing.json"))
    p = tmp_path / "cat.json"
    p.write_text(json.dumps({"templates": {"t": {"nodes": ["warp_drive"], "edges": []}}}))
    with pytest.raises(ConfigError) as e:
        load_catalog(str(p))
    assert "warp_drive" in str(e.value)
