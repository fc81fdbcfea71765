"""Python bindings for the imagetypes C++ library."""

from ._core import (
    ImagetypesError,
    __version__,
    assign,
    consistency_curve,
    crosstab,
    davies_bouldin,
    fit_kmeans,
    inertia,
    jaccard,
    kmeanspp_init,
    ols_fit,
    overlap_matrix,
    rank_near_duplicates,
    read_embeddings,
    sample_per_account,
    scan_k,
    significance_stars,
    silhouette,
    spearman,
    threshold_pairs,
    topk_pairs_within_cluster,
    write_embeddings,
)

__all__ = [
    "ImagetypesError",
    "__version__",
    "assign",
    "consistency_curve",
    "crosstab",
    "davies_bouldin",
    "fit_kmeans",
    "inertia",
    "jaccard",
    "kmeanspp_init",
    "ols_fit",
    "overlap_matrix",
    "rank_near_duplicates",
    "read_embeddings",
    "sample_per_account",
    "scan_k",
    "significance_stars",
    "silhouette",
    "spearman",
    "threshold_pairs",
    "topk_pairs_within_cluster",
    "write_embeddings",
]
