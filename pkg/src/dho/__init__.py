"""Quantum damped harmonic oscillator: coherent states, coherence, trajectories
and identical-particle observables, with a truncated-Fock master-equation
integrator as an independent check on every closed form."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    DegenerateInput,
    DensityFloorHit,
    DhoError,
    DomainError,
    EmptyWindow,
    NegativeBeyondTolerance,
    NoConvergence,
    NotPure,
    OverlapUnderflow,
    StepTooLarge,
    TruncationTooSmall,
)
from .states import (  # noqa: E402
    CoherentAmplitude,
    EvolutionParams,
    SuperposedState,
    decoherence_factor,
    evolve_amplitude,
    make_cat,
    overlap,
)
from .fock import FockDensityMatrix, density_from_superposition, von_neumann_entropy  # noqa: E402
from .coherence import (  # noqa: E402
    CoherenceResult,
    cr_cat_closed_form,
    cr_coherent_continuous,
    cr_coherent_energy,
    cr_mixed_energy,
)
from .lindblad import IntegratorConfig, integrate  # noqa: E402
from .bohmian import integrate_trajectories, probability_current, probability_density  # noqa: E402
from .identical import (  # noqa: E402
    DetectorWindow,
    Statistics,
    TwoParticleState,
    cr_by_statistics,
    joint_detection_ratio,
    mss,
)
from .faddeeva import complex_erf, faddeeva  # noqa: E402
from ._accel import default_backend  # noqa: E402
