"""Log-chroma color histograms, classical stain transfer and segmentation metrics."""

from .colorspaces import (
    lalphabeta_to_rgb,
    od_to_rgb,
    rgb_to_lalphabeta,
    rgb_to_log_chroma,
    rgb_to_od,
)
from .errors import (
    DegenerateRank,
    EmptyHistogram,
    HeterogeneousRows,
    IoFailure,
    LowSignal,
    MethodFailure,
    ParameterError,
    StainkitError,
    UnsupportedFormat,
)
from .histogram import ColorHistogram, compute_histogram, hellinger_distance, kl_divergence
from .quality import QualityReport, color_matching_loss, laplacian_detail, quality_report, reconstruction_loss
from .segmetrics import SegReport, aji, connected_components, dice, evaluate, f1_at_iou, iou_matrix
from .synth import SeriesSpec, SynthSpec, darken_series, synthesize_stain_image
from .transfer import (
    TransferMethod,
    histogram_match,
    macenko_estimate_stains,
    macenko_normalize,
    reinhard_transfer,
    transfer,
    vahadane_fit_dictionary,
    vahadane_normalize,
)

__version__ = "0.1.0"
