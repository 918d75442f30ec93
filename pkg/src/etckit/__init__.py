"""Block scrambling image encryption for encryption-then-compression systems,
with a JPEG rate-distortion harness, a jigsaw-solver attack evaluator, and
keyed isometric template protection."""

__version__ = "0.1.0"

from .attack import (
    Assembly,
    GroundTruth,
    Metrics,
    Puzzle,
    boundary_dissimilarity,
    brute_force_scramble,
    greedy_assemble,
    ground_truth_from_key,
    ground_truth_from_plain,
    render_assembly,
    score_assembly,
)
from .cipher import (
    COLOR_SHUFFLE,
    NEGPOS,
    ROTATE_FLIP,
    SCHEME_COLOR,
    SCHEME_GRAYSCALE,
    SCRAMBLE,
    STEP_ORDER,
    CipherConfig,
    CipherSidecar,
    decrypt,
    encrypt,
    normalize_steps,
)
from .codec import (
    CodecError,
    CodecParams,
    ProviderProfile,
    RDPoint,
    jpeg_decode,
    jpeg_encode,
    jpeg_roundtrip,
    mean_bpp_inflation,
    mean_psnr_gap,
    provider_recompress,
    rd_csv,
    rd_curve,
)
from .images import (
    BlockGrid,
    ImageBuffer,
    load_ppm,
    merge_blocks,
    pad_replicate,
    psnr,
    save_ppm,
    split_blocks,
)
from .keystream import (
    MasterKey,
    derive_step_seed,
    gen_permutation,
    gen_symbols,
    keyspace_bits,
    splitmix_next,
    uniform_below,
)
from .synth import reference_images, synth_natural_image
from .templates import (
    CentroidModel,
    ProtectedTemplate,
    Template,
    classify,
    enroll,
    extract_template,
    orthogonal_matrix,
    protect_template,
)

__all__ = [
    "Assembly",
    "BlockGrid",
    "CentroidModel",
    "CipherConfig",
    "CipherSidecar",
    "CodecError",
    "CodecParams",
    "COLOR_SHUFFLE",
    "GroundTruth",
    "ImageBuffer",
    "MasterKey",
    "Metrics",
    "NEGPOS",
    "ProtectedTemplate",
    "ProviderProfile",
    "Puzzle",
    "RDPoint",
    "ROTATE_FLIP",
    "SCHEME_COLOR",
    "SCHEME_GRAYSCALE",
    "SCRAMBLE",
    "STEP_ORDER",
    "Template",
    "boundary_dissimilarity",
    "brute_force_scramble",
    "classify",
    "decrypt",
    "derive_step_seed",
    "encrypt",
    "enroll",
    "extract_template",
    "gen_permutation",
    "gen_symbols",
    "greedy_assemble",
    "ground_truth_from_key",
    "ground_truth_from_plain",
    "jpeg_decode",
    "jpeg_encode",
    "jpeg_roundtrip",
    "keyspace_bits",
    "load_ppm",
    "mean_bpp_inflation",
    "mean_psnr_gap",
    "merge_blocks",
    "normalize_steps",
    "orthogonal_matrix",
    "pad_replicate",
    "protect_template",
    "provider_recompress",
    "psnr",
    "rd_csv",
    "rd_curve",
    "reference_images",
    "render_assembly",
    "save_ppm",
    "score_assembly",
    "splitmix_next",
    "split_blocks",
    "synth_natural_image",
    "uniform_below",
]
