"""Local-phase enhancement of grayscale radiographs.

Computes three local-phase feature maps per image -- the weighted mean phase
angle (lwpa), the local phase energy (lpe) and its attenuation-corrected
variant (elea) -- and composes them into a 3-channel multi-feature image for
downstream classifiers. Ships as a library plus the ``cxrphase`` batch CLI.
"""

from .elea import (
    DiffFilterBank,
    EleaParams,
    TransmissionMap,
    build_diff_bank,
    compute_weights,
    objective_value,
    recover_elea,
    shrink,
    solve_transmission,
)
from .image_io import (
    LABELS,
    ImageIOError,
    Manifest,
    ManifestEntry,
    ManifestError,
    load_image,
    normalize_minmax,
    read_manifest,
    resize_bilinear,
    save_image,
)
from .phase_features import (
    MonogenicResponse,
    PhaseFeatures,
    compute_lpe,
    compute_lwpa,
    compute_monogenic,
)
from .pipeline import (
    BankCache,
    ConfigError,
    EnhanceConfig,
    RunRecord,
    enhance_image,
    parse_config,
    run_batch,
)
from .spectral import (
    AssdParams,
    FrequencyGrid,
    SpectralBank,
    apply_filter,
    build_assd_bank,
    build_frequency_grid,
    build_riesz,
    fft_forward,
    fft_inverse,
)

__version__ = "0.1.0"
