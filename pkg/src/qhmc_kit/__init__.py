"""Quantum-inspired HMC: random per-path mass matrices for spiky and multimodal targets."""

from .core import (
    DenseMass,
    DiagonalLogNormal,
    DiagonalMass,
    DiracMass,
    MassMatrix,
    MassSpec,
    MixtureMass,
    ScalarLogNormal,
    ScalarMass,
    ThermostatState,
    ValidationError,
    hamiltonian,
    kinetic_energy,
    make_rng,
    sample_mass,
    sample_momentum,
    split_rng,
)
from .integrators import PathConfig, leapfrog_path, thermostat_step
from .samplers import (
    Chain,
    SamplerConfig,
    baseline_sample,
    mh_accept,
    qhmc_sample,
    qsgnht_sample,
    run_chains,
    sgld_sample,
)

__version__ = "0.1.0"
