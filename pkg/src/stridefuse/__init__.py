"""Pedestrian dead reckoning with opportunistic visual-beacon fusion.

The package is organised as a pipeline:

    sensors     raw IMU / beacon ingestion and the shared value types
    stride      step detection and Weinberg step-length estimation
    orientation gradient-descent quaternion filter with magnetic
                disturbance rejection
    deadreck    step-wise position propagation and the drift-variance
                model behind the gross-error threshold
    beacons     ranked match-list ingestion and the location consistency vote
    fusion      the gated Kalman filter tying dead reckoning to beacon fixes
    synth       synthetic walk generator (the test oracle for everything)
    evalkit     trajectory error metrics, percentiles, CDF export
    cli         command line front end (run / synth / eval)
"""

__version__ = "0.1.0"

from .sensors import Beacon, BeaconDatabase, ImuSample, Position2D, Quaternion

__all__ = [
    "Beacon",
    "BeaconDatabase",
    "ImuSample",
    "Position2D",
    "Quaternion",
    "__version__",
]
