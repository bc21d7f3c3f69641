"""Zeros of a Gaussian entire function as a randomly perturbed lattice.

Coarse-grained bindings over the C++ core: sample zeros, build the metric
envelope, match zeros to the rescaled integer lattice, fit displacement
tails, and drive the batch experiments that the `cazplab` command exposes.
"""

from cazplab._core import (
    artifact_version,
    displacements,
    envelope,
    exp_moment,
    fit_tail,
    run_experiment,
    variance_slope,
    zeros,
)

__all__ = [
    "artifact_version",
    "displacements",
    "envelope",
    "exp_moment",
    "fit_tail",
    "run_experiment",
    "variance_slope",
    "zeros",
]
