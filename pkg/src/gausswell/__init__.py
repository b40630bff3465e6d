"""Bound states and resonances of V(x) = (x^2 - 2J) exp(-lambda x^2) + 2J.

Two independent routes: Riccati-Pade Hankel quantization in arbitrary
precision (:mod:`gausswell.hankel`) and complex-rotation Rayleigh-Ritz in a
harmonic-oscillator basis (:mod:`gausswell.rrcr`).
"""
from .hankel import HankelSequence, HankelSpec, find_root, track_sequence
from .model import PotentialParams, barrier_info, eval_potential, harmonic_estimate
from .numerics import PrecisionContext
from .rrcr import RotationSetup, ThetaTrajectory, classify_poles, theta_scan

__all__ = [
    "HankelSequence",
    "HankelSpec",
    "PotentialParams",
    "PrecisionContext",
    "RotationSetup",
    "ThetaTrajectory",
    "barrier_info",
    "classify_poles",
    "eval_potential",
    "find_root",
    "harmonic_estimate",
    "theta_scan",
    "track_sequence",
]
