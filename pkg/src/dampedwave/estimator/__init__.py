"""Verification harness: probes, fits and empirical checks of the decay estimates."""
from .checks import *  # noqa: F401,F403
from .checks import __all__ as _checks_all
from .fitting import DecayFit, decay_fit, log2_slope
from .probes import (
    DEFAULT_SEED,
    Probe,
    ProbeFamily,
    gaussian_probe,
    modulated_probe,
    probe_family,
    shell_probe,
)

__all__ = list(_checks_all) + [
    "DecayFit",
    "decay_fit",
    "log2_slope",
    "DEFAULT_SEED",
    "Probe",
    "ProbeFamily",
    "gaussian_probe",
    "modulated_probe",
    "probe_family",
    "shell_probe",
]
