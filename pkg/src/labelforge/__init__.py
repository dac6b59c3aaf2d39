"""labelforge: point-prompt pseudo-label generation for infrared small targets.

A click on a target becomes a Gaussian energy blob, a saliency backend
turns the (image, edges, energy) stack into a response map, and
post-processing (threshold, eight-connected clustering, prompt matching)
yields a clean per-target binary label. Includes an evaluation suite,
batch CLI, and an annotation HTTP service.
"""

from .assembly import CHANNEL_ORDER, ModelInput, assemble, check_saliency_contract, sobel
from .backends import (
    BackendKind,
    PrecomputedBackend,
    ReferenceBackend,
    ReferenceSegmenterConfig,
    RemoteBackend,
    infer,
    parse_backend_spec,
    reference_segment,
)
from .core import (
    BinaryMask,
    BoundingBox,
    Cluster,
    ClusterSet,
    FloatMap,
    Prompt,
    PromptSet,
    RasterImage,
    bbox_of,
    centroid_of,
    mask_from_prompts,
)
from .encoding import EnergyConfig, EnergyMap, derive_prompts, encode_energy, gaussian_at
from .errors import (
    ConfigError,
    ContractError,
    CoordinateError,
    FormatError,
    LabelForgeError,
    ManifestError,
    ShapeError,
    TransportError,
)
from .io import (
    DatasetManifest,
    ManifestImage,
    PromptSource,
    image_from_png_bytes,
    load_floatmap,
    load_image,
    load_manifest,
    load_mask,
    load_tensor,
    mask_from_rle,
    mask_to_rle,
    read_prompt_csv,
    resolve_prompts,
    save_floatmap,
    save_image,
    save_mask,
    save_tensor,
    tnsr_from_bytes,
    tnsr_to_bytes,
    write_prompt_csv,
)
from .metrics import (
    ImageMetrics,
    MetricConfig,
    MetricReport,
    TargetMatch,
    aggregate,
    iou,
    match_targets,
    pd_fa_fat,
)
from .pipeline import GenerateResult, RunSummary, generate_label, run_manifest
from .postprocess import (
    MATCHER_NAMES,
    MatchOutcome,
    PostprocessConfig,
    apply_matcher,
    binarize,
    cluster8,
    match_bbox,
    match_centroid,
    match_membership,
)
from .report import evaluate_dirs, render_report_figure, report_to_dict, write_report

__version__ = "0.1.0"

__all__ = [
    "BackendKind",
    "BinaryMask",
    "BoundingBox",
    "CHANNEL_ORDER",
    "Cluster",
    "ClusterSet",
    "ConfigError",
    "ContractError",
    "CoordinateError",
    "DatasetManifest",
    "EnergyConfig",
    "EnergyMap",
    "FloatMap",
    "FormatError",
    "GenerateResult",
    "ImageMetrics",
    "LabelForgeError",
    "MATCHER_NAMES",
    "ManifestError",
    "ManifestImage",
    "MatchOutcome",
    "MetricConfig",
    "MetricReport",
    "ModelInput",
    "PostprocessConfig",
    "PrecomputedBackend",
    "Prompt",
    "PromptSet",
    "PromptSource",
    "RasterImage",
    "ReferenceBackend",
    "ReferenceSegmenterConfig",
    "RemoteBackend",
    "RunSummary",
    "ShapeError",
    "TargetMatch",
    "TransportError",
    "aggregate",
    "apply_matcher",
    "assemble",
    "bbox_of",
    "binarize",
    "centroid_of",
    "check_saliency_contract",
    "cluster8",
    "derive_prompts",
    "encode_energy",
    "evaluate_dirs",
    "gaussian_at",
    "generate_label",
    "image_from_png_bytes",
    "infer",
    "iou",
    "load_floatmap",
    "load_image",
    "load_manifest",
    "load_mask",
    "load_tensor",
    "mask_from_prompts",
    "mask_from_rle",
    "mask_to_rle",
    "match_bbox",
    "match_centroid",
    "match_membership",
    "match_targets",
    "parse_backend_spec",
    "pd_fa_fat",
    "read_prompt_csv",
    "reference_segment",
    "render_report_figure",
    "report_to_dict",
    "resolve_prompts",
    "run_manifest",
    "save_floatmap",
    "save_image",
    "save_mask",
    "save_tensor",
    "sobel",
    "tnsr_from_bytes",
    "tnsr_to_bytes",
    "write_prompt_csv",
    "write_report",
]
