import pytest

from spraylab.config import DEFAULT_ORDER, from_dict, load
from spraylab.errors import ConfigError


def base(**over):
    raw = {
        "format_version": 1,
        "dimension": 2,
        "spray": {"catalog": "minkowski"},
        "fields": {"Q": {"catalog": "oneform_funk"}},
        "checks": [{"name": "is_funk", "field": "Q"}],
    }
    raw.update(over)
    return raw


def test_defaults():
    cfg = from_dict(base())
    assert cfg.order == DEFAULT_ORDER and cfg.workers == 4
    assert cfg.sampling["count"] == 50 and cfg.tolerances["tol"] == 1e-8


@pytest.mark.parametrize("over, path", [
    ({"checks": [{"name": "nope", "field": "Q"}]}, "checks[0].name"),
    ({"checks": [{"name": "is_funk", "field": "R"}]}, "checks[0].field"),
    ({"checks": [{"name": "is_funk"}]}, "checks[0]"),
    ({"checks": [{"name": "is_funk", "field": "Q", "expect": "maybe"}]}, "checks[0].expect"),
    ({"checks": []}, "checks"),
    ({"dimension": "two"}, "dimension"),
    ({"format_version": 2}, "format_version"),
    ({"colour": 1}, "colour"),
    ({"spray": {"catalog": "minkowski", "G": ["0", "0"]}}, "spray"),
    ({"spray": {"G": ["0"]}}, "spray.G"),
    ({"spray": {"catalog": "minkowski", "deform": "Z"}}, "spray.deform"),
    ({"sampling": {"count": 0}}, "sampling.count"),
    ({"sampling": {"y_mode": "cube"}}, "sampling.y_mode"),
    ({"sampling": {"x_box": [[0, 1]]}}, "sampling.x_box"),
    ({"sampling": {"speed": 1}}, "sampling"),
    ({"tolerances": {"eps": 1}}, "tolerances"),
    ({"order": 0}, "order"),
    ({"workers": 0}, "workers"),
])
def test_validation_errors_carry_path(over, path):
    with pytest.raises(ConfigError) as info:
        from_dict(base(**over))
    assert info.value.path == path


def test_classify_expectations():
    raw = base(checks=[{"name": "classify", "expect": "not_constant"}])
    assert from_dict(raw).checks[0]["expect"] == "not_constant"
    with pytest.raises(ConfigError):
        from_dict(base(checks=[{"name": "classify", "expect": "pass"}]))


def test_load_shipped_configs():
    for name in ("oneform_funk", "mth1_constancy", "klein_projective"):
        cfg = load(f"configs/{name}.toml")
        assert cfg.dimension == 2


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError):
        load(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("dimension = \n")
    with pytest.raises(ConfigError):
        load(bad)
