"""Stochastic generalizations of the idea-production law."""
from .feller import (DriftDiffusionParams, feller_absorbed_mass,
                     feller_admissible, feller_transition_logpdf,
                     feller_transition_sample)
from .laws import (STRUCTURES, NoiseModel, StableIncrementLaw, increment_law,
                   latent_clip, simulate_path, transition_logpdf)
from .stable import StableParams, stable_cdf, stable_logpdf, stable_sample

__all__ = [
    "STRUCTURES",
    "DriftDiffusionParams",
    "NoiseModel",
    "StableIncrementLaw",
    "StableParams",
    "feller_absorbed_mass",
    "feller_admissible",
    "feller_transition_logpdf",
    "feller_transition_sample",
    "increment_law",
    "latent_clip",
    "simulate_path",
    "stable_cdf",
    "stable_logpdf",
    "stable_sample",
    "transition_logpdf",
]
