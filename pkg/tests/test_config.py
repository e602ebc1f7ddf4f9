"""Flat key=value experiment configs: parsing, validation, presets, replay."""

import dataclasses

import numpy as np
import pytest

from barrierflow.config import (
    PRESET_GROUPS,
    PRESETS,
    ExperimentConfig,
    config_text,
    parse_config,
    pinned,
    preset_config,
    resolve,
    validate,
)
from barrierflow.errors import ConfigError


def test_config_text_round_trip():
    cfg = ExperimentConfig(
        algorithm="agm1",
        schedule="exp-rate",
        p=0.75,
        delta=0.1,
        barrier_mode="fixed",
        barrier_c=123.456,
        barrier_s=1e-3,
        stop_rule="max-iters",
        max_iters=17,
        start="0.25,0.5",
        seed=7,
    )
    assert parse_config(config_text(cfg)) == cfg


def test_parse_ignores_comments_and_blank_lines():
    cfg = parse_config(
        """
        # a full-line comment
        algorithm=gm
        schedule=harmonic-sq   # trailing comment
        max_iters=12

        """
    )
    assert cfg.algorithm == "gm"
    assert cfg.schedule == "harmonic-sq"
    assert cfg.max_iters == 12
    # untouched keys keep their defaults
    assert cfg.eta == ExperimentConfig().eta


def test_parse_rejects_malformed_input():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config("stepsize=0.1")
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("just some words")
    with pytest.raises(ConfigError, match="max_iters"):
        parse_config("max_iters=lots")


def test_validate_names_the_offending_key():
    cases = [
        (dict(radius=-1.0), "radius"),
        (dict(algorithm="newton"), "algorithm"),
        (dict(algorithm="dynamics", schedule="quad-c"), "schedule"),
        (dict(algorithm="dynamics", schedule="polynomial", t0=0.0), "t0"),
        (dict(stop_rule="grad-norm", barrier_mode="scheduled"), "stop_rule"),
        (dict(start="0.1,0.2,0.3"), "start"),
        (dict(start="a,b"), "start"),
        (dict(eta_mode="adaptive"), "eta_mode"),
        (dict(fp_max=0), "fp_max"),
    ]
    for overrides, key in cases:
        cfg = dataclasses.replace(ExperimentConfig(), **overrides)
        with pytest.raises(ConfigError, match=key):
            validate(cfg)


def test_every_preset_resolves():
    for name in PRESETS:
        r = resolve(preset_config(name))
        assert r.prob.outer.contains(r.start)
        if r.cfg.algorithm == "dynamics":
            assert r.params is None
            assert r.mode is not None
        else:
            assert r.params is not None
            assert r.params.max_iters == r.cfg.max_iters
    for group, members in PRESET_GROUPS.items():
        assert group not in PRESETS
        for member in members:
            assert member in PRESETS


def test_unknown_preset_lists_available_names():
    with pytest.raises(ConfigError) as exc_info:
        preset_config("fig9.9")
    msg = str(exc_info.value)
    assert "agm1-exp-fixed" in msg
    assert "fig5.4-compare" in msg


def test_seeded_start_is_deterministic_and_feasible():
    cfg = ExperimentConfig(start="", seed=123)
    a = resolve(cfg)
    b = resolve(cfg)
    assert np.array_equal(a.start, b.start)
    assert a.prob.outer.contains(a.start)
    other = resolve(ExperimentConfig(start="", seed=124))
    assert not np.array_equal(a.start, other.start)


def test_pinned_start_replays_bit_for_bit():
    cfg = ExperimentConfig(start="", seed=99)
    first = resolve(cfg)
    replay_cfg = pinned(cfg, first.start)
    # survives a trip through the text form
    replay = resolve(parse_config(config_text(replay_cfg)))
    assert np.array_equal(replay.start, first.start)
