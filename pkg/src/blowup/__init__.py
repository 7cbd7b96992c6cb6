"""Concentration detection, rescaling and harmonic-profile fits."""

from .analysis import BlowupReport, analyze_blowup, synthetic_validation
from .concentration import (
    ConcentrationCandidate,
    detect_blowup,
    directional_energy,
    select_concentration_radius,
)
from .profiles import ProfileFit, fit_harmonic_profile, harmonic_family, rescale_profile
from .synthetic import synth_selfsimilar

__all__ = [
    "BlowupReport",
    "analyze_blowup",
    "ConcentrationCandidate",
    "detect_blowup",
    "directional_energy",
    "select_concentration_radius",
    "ProfileFit",
    "fit_harmonic_profile",
    "harmonic_family",
    "rescale_profile",
    "synth_selfsimilar",
    "synthetic_validation",
]
