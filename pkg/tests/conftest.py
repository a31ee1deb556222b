"""Shared fixtures: the default scenario and its derived constants."""

import math

import pytest

from radar_sg.model import (Lane, MediumAccess, RadarParams, Scenario,
                            GeometryKind, derive)

DATA_SCENARIO = "table1.json"


def make_radar(**overrides) -> RadarParams:
    base = dict(tx_power=0.01, antenna_gain=10.0 ** 4.5,
                beamwidth=math.radians(15.0), frequency=76.5e9, rcs=1000.0,
                sinr_threshold=10.0, pathloss_exp=2.0, noise_power=0.0)
    base.update(overrides)
    return RadarParams(**base)


def make_scenario(density=0.1, duty_cycle=0.1, offset=10.0,
                  geometry=GeometryKind.PPP, **radar_overrides) -> Scenario:
    return Scenario(radar=make_radar(**radar_overrides),
                    lanes=(Lane(offset=offset, density=density),),
                    access=MediumAccess(duty_cycle=duty_cycle),
                    geometry_kind=geometry)


@pytest.fixture
def default_scenario() -> Scenario:
    return make_scenario()


@pytest.fixture
def default_consts(default_scenario):
    return derive(default_scenario, 0)
