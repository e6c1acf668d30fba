import json
from importlib import resources

import pytest

from synthcog.cli import GLOBAL_KEYS
from synthcog.config import SimConfig, load_config
from synthcog.earlydetect import DetectionPolicy
from synthcog.errors import ConfigError
from synthcog.features import NoiseSpec
from synthcog.harness import ExperimentSpec
from synthcog.model import Hyper

SCHEMA = json.loads(resources.files("synthcog").joinpath("data/config.schema.json").read_text())


def test_schema_covers_every_field():
    props = SCHEMA["properties"]
    assert set(props) == {"simulation", "experiment", *GLOBAL_KEYS}
    assert set(props["simulation"]["properties"]) == set(SimConfig.__dataclass_fields__)
    assert set(props["experiment"]["properties"]) == set(ExperimentSpec.__dataclass_fields__) - {"base"}
    exp = props["experiment"]["properties"]
    assert set(exp["policy"]["properties"]) == set(DetectionPolicy.__dataclass_fields__)
    assert set(exp["hyper"]["properties"]) == set(Hyper.__dataclass_fields__)
    assert set(SCHEMA["$defs"]["noise"]["properties"]) == set(NoiseSpec.__dataclass_fields__)


def test_default_config_validates():
    jsonschema = pytest.importorskip("jsonschema")
    doc = {"seed": 1, "simulation": SimConfig().to_dict(),
           "experiment": {"hyper": {"epochs": 10}, "noise_grid": [{"sigma": 0}, {"sigma": 0.1, "attenuation": "reference"}]}}
    jsonschema.validate(doc, SCHEMA)
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate({"simulation": {"total_userz": 1}}, SCHEMA)


def test_config_dict_round_trip():
    cfg = SimConfig(total_users=9, noise=NoiseSpec.attenuated(0.2, 0.1), master_seed=5)
    assert SimConfig.from_dict(json.loads(json.dumps(cfg.to_dict()))) == cfg
    assert SimConfig.from_dict(cfg.to_dict()).config_hash() == cfg.config_hash()


def test_config_validation():
    with pytest.raises(ConfigError):
        SimConfig(total_users=0)
    with pytest.raises(ConfigError):
        SimConfig(summary_sentence_range=(2, 1))
    with pytest.raises(ConfigError):
        SimConfig(profile_mix={"StableMCI": 0.5})
    with pytest.raises(ConfigError):
        SimConfig.from_dict({"profile_mix": {"Nobody": 1.0}})


def test_load_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"simulation": {"total_users": 3}}))
    assert load_config(p).total_users == 3
    p.write_text("[1]")
    with pytest.raises(ConfigError):
        load_config(p)
