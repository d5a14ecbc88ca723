"""scopebench: benchmarking toolkit for microscopy representation evaluation.

The library covers three layers:

* data construction -- synthetic point-pattern classes, structure-only
  cell-graph views (kNN graphs, binary edge rasters, degree profiles),
  and spot-neighborhood binning with target averaging;
* training-free features -- pixel statistics, random single-layer
  convolutions, and cell-count embeddings;
* frozen-embedding evaluation -- cosine retrieval recall, replicate mAP,
  PCA + ridge expression prediction with per-gene PCC, rank-based
  representational similarity, kNN probing, and PCA dimensionality
  diagnostics, all operating on a bit-exact interchange format.

All operations are pure functions of (inputs, config, seed); PCG64 streams
derived through ``numpy.random.SeedSequence`` make every artifact
reproducible bit-for-bit.
"""

__version__ = "0.1.0"

from .points import PointPattern
from .landscapes import IntensityLandscape, LandscapeKind, eval_landscape
from .synth import (
    CLASS_REGISTRY,
    AugmentMode,
    ClassSpec,
    SamplingKind,
    SynthDataset,
    augment_points,
    generate_class,
    make_splits,
    sample_noisy_grid,
    sample_poisson,
)
from .graphs import EdgeList, knn_graph, local_degree_profile, normalize_coords
from .raster import BinaryRaster, rasterize_edges, render_edges, resize_bilinear
from .binning import (
    BinnedPatch,
    GridKind,
    SpotGrid,
    average_targets,
    bin_spots,
    drop_empty_patches,
)
from .features import (
    FeatureVector,
    MultiChannelImage,
    cellcount_features,
    pixel_features,
    singleconv_features,
)
from .metrics import (
    MapResult,
    PairSet,
    SimilarityMatrix,
    cosine_matrix,
    knn_probe,
    map_retrieval,
    pair_ranking,
    pearson_r,
    read_labels_csv,
    recall_at_tail,
    rsa_matrix,
    spearman_rho,
)
from .regression import (
    PCAModel,
    RegressionReport,
    RidgeModel,
    expression_pipeline,
    pca_fit,
    pca_transform,
    ridge_fit,
    ridge_predict,
    variance_explained_first2,
)
from .interchange import EmbeddingTable, read_table, write_table
from .profiles import FoldSpec, build_profiles, make_folds
from .reports import Report, RunConfig, emit_report, run_benchmark

__all__ = [
    "__version__",
    "PointPattern",
    "IntensityLandscape",
    "LandscapeKind",
    "eval_landscape",
    "CLASS_REGISTRY",
    "AugmentMode",
    "ClassSpec",
    "SamplingKind",
    "SynthDataset",
    "augment_points",
    "generate_class",
    "make_splits",
    "sample_noisy_grid",
    "sample_poisson",
    "EdgeList",
    "knn_graph",
    "local_degree_profile",
    "normalize_coords",
    "BinaryRaster",
    "rasterize_edges",
    "render_edges",
    "resize_bilinear",
    "BinnedPatch",
    "GridKind",
    "SpotGrid",
    "average_targets",
    "bin_spots",
    "drop_empty_patches",
    "FeatureVector",
    "MultiChannelImage",
    "cellcount_features",
    "pixel_features",
    "singleconv_features",
    "MapResult",
    "PairSet",
    "SimilarityMatrix",
    "cosine_matrix",
    "knn_probe",
    "map_retrieval",
    "pair_ranking",
    "pearson_r",
    "read_labels_csv",
    "recall_at_tail",
    "rsa_matrix",
    "spearman_rho",
    "PCAModel",
    "RegressionReport",
    "RidgeModel",
    "expression_pipeline",
    "pca_fit",
    "pca_transform",
    "ridge_fit",
    "ridge_predict",
    "variance_explained_first2",
    "EmbeddingTable",
    "read_table",
    "write_table",
    "FoldSpec",
    "build_profiles",
    "make_folds",
    "Report",
    "RunConfig",
    "emit_report",
    "run_benchmark",
]
