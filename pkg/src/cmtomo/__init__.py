"""Quadrature (symplectic) and center-of-mass tomograms of oscillator states.

Single-mode tomograms of number states and even/odd coherent
superpositions, their N-mode convolutions, Gaussianization and
classical-limit scans, and single-mode density-matrix reconstruction.
"""

__version__ = "0.1.0"

from .clt import CltReport, gaussian_distance, hbar_scan, lyapunov_ratio, mass_within, n_scan, sigma2_closed
from .convolution import CenterOfMassDensity, cf_product, convolve_fft, marginals_for_system, sample_sum
from .errors import (
    CalibrationError,
    CmtomoError,
    ConfigError,
    ConvergenceError,
    GridSizeError,
    NormalizationMismatchWarning,
    NumericalError,
    TruncationLeakageWarning,
)
from .marginals import (
    Grid,
    MarginalDensity,
    Moments,
    evenodd_tomogram,
    evenodd_var_closed,
    fock_abs3_bound_check,
    fock_marginal,
    fock_tomogram,
    fock_var_closed,
    marginal_density,
    moments,
    tomogram_oracle,
)
from .reconstruct import DensityMatrix, ReconstructionCutoffs, fidelity, quadrature_matrices, reconstruct_single_mode
from .specialfn import QuadratureRule, gauss_hermite, hermite_eval, hermite_sq_density_factor
from .states import (
    CoherentEven,
    CoherentOdd,
    Fock,
    FockExpansion,
    FrameSpec,
    ModeSpec,
    SystemSpec,
    energy,
    fock_expansion,
    hbar_for_fixed_energy,
)

__all__ = [name for name in dir() if not name.startswith("_")]
