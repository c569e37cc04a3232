import numpy as np
import pytest
from hypothesis import strategies as st

from camprior.rig import CameraExtrinsics, CameraIntrinsics, R_BASE_FORWARD, rot_x, rot_y, rot_z


@pytest.fixture
def nuscenes_front():
    from camprior.rig import preset_rig

    return preset_rig("nuscenes").camera("front")


def make_extrinsics(yaw_deg=0.0, pitch_deg=0.0, roll_deg=0.0, t=(0.0, 0.0, 1.5)):
    """Forward-facing camera rotated about ego axes (yaw/pitch/roll in degrees)."""
    rad = np.radians
    r = rot_z(rad(yaw_deg)) @ rot_y(rad(pitch_deg)) @ rot_x(rad(roll_deg)) @ R_BASE_FORWARD
    return CameraExtrinsics(r, np.asarray(t, dtype=np.float64))


intrinsics_strategy = st.builds(
    lambda f, cu_frac, cv_frac, w, h: CameraIntrinsics(
        fu=f, fv=f * 0.97, cu=w * cu_frac, cv=h * cv_frac, width=w, height=h
    ),
    f=st.floats(200.0, 3000.0),
    cu_frac=st.floats(0.3, 0.7),
    cv_frac=st.floats(0.3, 0.7),
    w=st.integers(64, 2048),
    h=st.integers(64, 1536),
)

extrinsics_strategy = st.builds(
    make_extrinsics,
    yaw_deg=st.floats(-180.0, 180.0),
    pitch_deg=st.floats(-30.0, 30.0),
    roll_deg=st.floats(-10.0, 10.0),
    t=st.tuples(st.floats(-3.0, 3.0), st.floats(-2.0, 2.0), st.floats(0.5, 3.0)),
)
