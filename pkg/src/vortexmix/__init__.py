"""vortexmix: scalar wave-optics toolkit for optical vortex arithmetic.

Synthesizes Laguerre-Gaussian laser fields, applies phase masks and lenses,
propagates by the angular-spectrum method, forms the four-wave-mixing blue
field with its non-collinear phase matching, and measures topological charge
with three independent diagnostics (azimuthal spectrum, tilted-lens stripes,
interferograms). A scenario-driven CLI reproduces the canned demonstration
configurations; see the README for usage.
"""

from .field import (
    GridSpec,
    IntensityImage,
    ScalarField,
    VtxfFormatError,
    intensity,
    load_field,
    normalize,
    overlap,
    power,
    save_field,
    zero_field,
)
from .modes import LgParams, gaussian, lg_mode
from .elements import (
    CircularAperture,
    ForkedGrating,
    OpticalElement,
    SpiralPlate,
    StaircaseMask,
    ThinLens,
    TiltedLens,
    apply,
)
from .propagation import (
    PropagationPlan,
    SamplingError,
    focal_image,
    propagate,
    sampling_ok,
)
from .fwm import (
    BeamGeometry,
    FwmConfig,
    PhaseMatchError,
    PhaseMatchSolution,
    expected_charge,
    fwm_blue_field,
    fwm_scene,
    phase_match,
)
from .diagnostics import (
    OamSpectrum,
    SphericalReference,
    StripeReading,
    TiltedPlaneReference,
    count_spiral_arms,
    count_stripes,
    dominant_charge,
    fork_fringe_surplus,
    interferogram,
    oam_spectrum,
    optimal_sensing_waist,
    tilted_lens_reading,
)

__version__ = "0.1.0"

__all__ = [
    "GridSpec", "IntensityImage", "ScalarField", "VtxfFormatError",
    "intensity", "load_field", "normalize", "overlap", "power", "save_field",
    "zero_field",
    "LgParams", "gaussian", "lg_mode",
    "CircularAperture", "ForkedGrating", "OpticalElement", "SpiralPlate",
    "StaircaseMask", "ThinLens", "TiltedLens", "apply",
    "PropagationPlan", "SamplingError", "focal_image", "propagate",
    "sampling_ok",
    "BeamGeometry", "FwmConfig", "PhaseMatchError", "PhaseMatchSolution",
    "expected_charge", "fwm_blue_field", "fwm_scene", "phase_match",
    "OamSpectrum", "SphericalReference", "StripeReading",
    "TiltedPlaneReference", "count_spiral_arms", "count_stripes",
    "dominant_charge", "fork_fringe_surplus", "interferogram", "oam_spectrum",
    "optimal_sensing_waist", "tilted_lens_reading",
    "__version__",
]
