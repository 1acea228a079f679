"""Band-limited signals on the sphere: sampling grids, harmonic transforms, antenna gain metrics."""
from ._kernels import BACKEND
from .errors import IllConditionedWarning, SphGainError
from .grids import DenseGrid, Grid, Ring, Scheme, build_grid, decimation_counts, gauss_legendre_nodes
from .harmonics import CONVENTION, HarmonicCoefficients, SphericalPoint, evaluate, idx, synthesize, ylm
from .metrics import (
    MetricReport,
    comparison_sweep,
    directivity,
    directivity_decimated,
    meg_decimated,
    meg_quadrature,
    total_gain,
)
from .models import (
    HutModel,
    PatternPair,
    dipole_pattern,
    hut_coefficients,
    isotropic_pattern,
    load_pattern,
    normalize_hut,
    random_bandlimited,
    random_pattern,
)
from .transforms import SampledSignal, bandlimit_scan, forward_sht, integrate, inverse_sht

__version__ = "0.1.0"
