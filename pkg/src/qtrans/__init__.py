"""Simulation of a charge-qubit transducer between a transmission-line resonator and a nanomechanical resonator."""

from .algebra import FockConfig, LeakageError, annihilation_op, coherent_state_vector, commutator, embed3, jordan_schwinger
from .dynamics import TimeGrid, evolve, heisenberg_FK, so3_propagator
from .model import (
    DetuningError,
    DeviceParams,
    EffectiveParams,
    LambdaStrategy,
    ModelParams,
    build_H2,
    build_H3,
    build_H4,
    build_H4prime,
    derive_model_params,
    effective_params,
)

__version__ = "0.1.0"

__all__ = [
    "FockConfig",
    "LeakageError",
    "annihilation_op",
    "coherent_state_vector",
    "commutator",
    "embed3",
    "jordan_schwinger",
    "TimeGrid",
    "evolve",
    "heisenberg_FK",
    "so3_propagator",
    "DetuningError",
    "DeviceParams",
    "EffectiveParams",
    "LambdaStrategy",
    "ModelParams",
    "build_H2",
    "build_H3",
    "build_H4",
    "build_H4prime",
    "derive_model_params",
    "effective_params",
]
