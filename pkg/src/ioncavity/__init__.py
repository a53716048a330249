"""Design and analysis toolkit for Fabry-Perot ion-cavity photon extraction."""

from .errors import (
    CavityError,
    ConvergenceError,
    DegenerateCavityError,
    InvalidCapError,
    LosslessCavityError,
    NoFeasibleDesignError,
    NoFeasibleLengthError,
    NumericalError,
    StepSizeUnderflowError,
    UnknownQuantityError,
    UnstableGeometryError,
    ValidationError,
)
from .geometry import (
    AtomicSystem,
    CavityGeometry,
    EffectiveMode,
    Misalignment,
    MirrorSolid,
    cap_diameter_for_volume,
    coupling_g0,
    coupling_rate_from_mode,
    divergence,
    effective_mode,
    mirror_solid,
    mode_waist,
    sagitta,
    stability_margin,
)
from .losses import (
    CavityRates,
    LossBudget,
    aperture_loss,
    cavity_rates,
    clipping_boundary,
    clipping_loss,
    scattering_loss,
)
from .performance import (
    NetworkBudget,
    PerformancePoint,
    bell_rate,
    geometric_cooperativity,
    intrinsic_cooperativity,
    operating_point,
    optimal_transmission,
    p_ext_bound,
    p_ext_operating,
    p_gen_bound,
)
from .grids import Axis, SweepGrid
from .optimizer import (
    DesignConstraints,
    OptimalDesign,
    evaluate_design,
    optimize,
    robustness,
    sweep,
)
from .vstirap import (
    LambdaCavitySystem,
    PulseSpec,
    SimResult,
    adiabatic_limit,
    optimize_pulse,
    saturation_family,
    simulate,
)

__version__ = "0.1.0"
