"""Indoor LiFi attocell network simulator with angle diversity receivers.

Models the optical downlink of a multi-cell LiFi deployment: line-of-sight
and wall-reflected (radiosity) DC channel gains, pyramid / truncated-pyramid
receiver geometry with random device orientation, EGC/SBC/MRC diversity
combining, analytic minimum-FOV bounds for single- and double-source cells,
and a Monte-Carlo engine that aggregates SINR / INR / data-rate / visibility
statistics over user positions and orientations.
"""

from .geometry import Orientation, PdAngles, incidence_angle, post_rotation_angles, rotate_direction
from .adr import AdrLayout, BandwidthModel, PdSpec, build_layout, pd_world_poses, receiver_bandwidth
from .orientation import OrientationModel, pdf_theta, sample_orientation, vertical
from .channel import (
    OpticalRx,
    Room,
    Source,
    SurfaceMesh,
    TransferOperators,
    assemble_operators,
    build_mesh,
    diffuse_gain,
    diffuse_gain_truncated,
    ds_delta_gain,
    los_gain,
    total_gain,
)
from .combining import LinkGains, PhyParams, data_rate, inr, serving_ap, sinr, weights
from .coverage import (
    CellLayout,
    EllipseSpec,
    FovBound,
    adr_footprint,
    constraint1_min,
    constraint2_min,
    dc_min,
    footprint_ellipse,
    fov_lower_bound,
    prob_visibility,
    visibility,
)
from .simulation import AggregateResult, Scenario, compare_combiners, compare_ss_ds, run, sweep_n_pd

__version__ = "0.1.0"
