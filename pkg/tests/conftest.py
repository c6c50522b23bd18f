import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from mwmusic import scene as sc

# Reference simulation configuration used across the suite: 16 antennas on a
# 0.09 m ring at 1 GHz around a 0.085 m disk with (20 eps0, 0.2 S/m), and two
# candidate anomalies.
EPS0 = sc.VACUUM_PERMITTIVITY
MU_B = sc.BACKGROUND_PERMEABILITY
FREQ = 1.0e9
ROI_RADIUS = 0.085
ARRAY_RADIUS = 0.09
N_ANTENNAS = 16

D1_CENTER = (0.01, 0.03)
D2_CENTER = (-0.04, -0.02)
ANOMALY_RADIUS = 0.01


def make_background() -> sc.Medium:
    return sc.Medium(permittivity=20 * EPS0, conductivity=0.2, permeability=MU_B)


def make_d1() -> sc.Anomaly:
    return sc.Anomaly(
        center=D1_CENTER,
        radius=ANOMALY_RADIUS,
        medium=sc.Medium(permittivity=55 * EPS0, conductivity=1.2, permeability=MU_B),
    )


def make_d2() -> sc.Anomaly:
    return sc.Anomaly(
        center=D2_CENTER,
        radius=ANOMALY_RADIUS,
        medium=sc.Medium(permittivity=45 * EPS0, conductivity=1.0, permeability=MU_B),
    )


def make_scene(n_anomalies: int = 1, count: int = N_ANTENNAS) -> sc.Scene:
    anomalies = (make_d1(), make_d2())[:n_anomalies]
    return sc.Scene(
        background=make_background(),
        roi_radius=ROI_RADIUS,
        array=sc.uniform_circular_array(count, ARRAY_RADIUS),
        anomalies=anomalies,
        frequency=FREQ,
    )


@pytest.fixture
def background():
    return make_background()


@pytest.fixture
def single_scene():
    return make_scene(1)


@pytest.fixture
def double_scene():
    return make_scene(2)
