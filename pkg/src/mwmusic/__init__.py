"""MUSIC-type microwave imaging of small circular anomalies.

Generates first-order synthetic scattered-field S-parameter data for small
disks inside a disk-shaped region, images them with a subspace projection
map driven by a possibly wrong background wavenumber, and evaluates the
closed-form Bessel-harmonic prediction of where and how the reconstructed
peak shifts under permeability, permittivity, or conductivity mismatch.
"""

from .errors import (
    ConfigurationError,
    DegenerateDataError,
    DomainError,
    MwMusicError,
    NumericalError,
    SingularityError,
    TruncationError,
)
from .forward import (
    ASYMPTOTIC,
    FULL_HANKEL,
    NOISELESS,
    ScatteringMatrix,
    add_noise,
    asymptotic_incident_field,
    born_sparam,
    incident_field,
    load_matrix,
    save_matrix,
    scattering_matrix,
)
from .harness import ExperimentConfig, PRESETS, RunReport, load_config, render_pgm, run_experiment
from .music import (
    DEFAULT_CEILING,
    EXACT_FIELD,
    PLANE_WAVE,
    ImageMap,
    ImagingGrid,
    SubspaceDecomposition,
    extract_peaks,
    grid_for_roi,
    imaging_map,
    projection_norm,
    read_map_csv,
    signal_subspace_dim,
    svd_leading,
    test_vector,
    write_map_csv,
    write_map_pgm,
)
from .scene import (
    BACKGROUND_PERMEABILITY,
    VACUUM_PERMITTIVITY,
    Anomaly,
    AntennaArray,
    Diagnostic,
    Medium,
    Scene,
    Wavenumber,
    contrast,
    uniform_circular_array,
    validate_scene,
    wavenumber,
)
from .specfun import Q_MAX, bessel_j, hankel2_0, jacobi_anger_truncation
from .theory import (
    MISMATCH_KINDS,
    MapComparison,
    MismatchSpec,
    TheoryContext,
    c_identity_check,
    compare_maps,
    error_series,
    mismatched_wavenumber,
    predicted_peak,
    closed_form_map,
)

__version__ = "0.1.0"
