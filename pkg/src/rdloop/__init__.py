"""Closed-loop simulation of a reaction-diffusion process under relay feedback.

A scalar diffusive state evolves on an interval or rectangle with an
insulated boundary; interior actuators inject a source assembled from
first-order drive dynamics, whose supplied power is selected from a
set-valued switching law fed by interior point sensors.
"""

__version__ = "0.1.0"

from .actuation import ActuatorBank, ActuatorProfile, control_source, lipschitz_bound
from .controller import (
    BoundsReport,
    ControllerParams,
    a_priori_bounds,
    controller_step,
    controller_trajectory,
    in_M_S,
)
from .dynamics import GrowthCert, ReactionTerm, growth_check, pde_step, reaction_eval
from .errors import ConfigurationError, NumericalError, PreconditionError, RdLoopError
from .feedback import (
    AdmissibleInterval,
    RelaySpec,
    SelectionStrategy,
    WeightMatrix,
    admissible_set,
    relay,
    select,
    weights_validate,
)
from .grid import Field, Grid, laplacian_neumann, sample_at
from .loop import (
    ResidualReport,
    SimConfig,
    Tolerances,
    Trajectory,
    affine_check,
    picard_solve,
    residual,
    simulate,
)
from .sensing import SensorArray, error_signal, read
