"""Configuration for the planted-structure synthetic generator."""

from typing import Dict

DEFAULT_SYNTH_NODES = 16
DEFAULT_SYNTH_TIMEPOINTS = 64
DEFAULT_SAMPLES_PER_CLASS = 400
DEFAULT_EFFECT_SIZE = 0.8
DEFAULT_NOISE_SIGMA = 1.0
DEFAULT_SPECTRAL_RADIUS = 0.95
DEFAULT_BURN_IN = 50
DEFAULT_EDGE_DENSITY = 0.2
DEFAULT_PLANTED_EDGES = 8
DEFAULT_TR_SECONDS = 0.7

# Edge weights are drawn with magnitude in this range, random sign
EDGE_WEIGHT_RANGE = (0.3, 0.9)


def get_synthesis_defaults() -> Dict[str, object]:
    """Get default synthetic dataset settings."""
    return {
        "N": DEFAULT_SYNTH_NODES,
        "T": DEFAULT_SYNTH_TIMEPOINTS,
        "samples_per_class": DEFAULT_SAMPLES_PER_CLASS,
        "effect_size": DEFAULT_EFFECT_SIZE,
        "noise_sigma": DEFAULT_NOISE_SIGMA,
        "spectral_radius": DEFAULT_SPECTRAL_RADIUS,
        "burn_in": DEFAULT_BURN_IN,
        "density": DEFAULT_EDGE_DENSITY,
        "planted_edges": DEFAULT_PLANTED_EDGES,
        "tr_seconds": DEFAULT_TR_SECONDS,
    }
