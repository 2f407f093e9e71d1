"""Layer-wise CKA network similarity, Diagonal Box Similarity, and
transferred adversarial-attack prediction analytics."""

from .aggregate import (PositionGrid, SummaryStats, extremal_pairs,
                        position_curve, position_grid, size_delta_series,
                        summary_stats, type_matrix)
from .cka import (center_columns, flatten_layer, layer_similarity_matrix,
                  linear_cka, read_similarity_csv, write_similarity_csv)
from .correlation import (CorrelationReport, correlation_scan,
                          distance_correlation, kendall_tau_b, pearson,
                          spearman)
from .data import (ActivationSet, AttackRecord, LayerMeta, NetworkManifest,
                   PairScore, SimilarityMatrix, load_activation_set,
                   load_manifest, read_attack_csv, save_activation_set,
                   write_attack_csv)
from .dbs import (SWEEP_RADII, bresenham_trace, dbs, dbs_sweep,
                  network_cka_score, pair_score, read_pair_scores,
                  write_pair_scores)
from .errors import (DataError, DegenerateActivationsError, FormatError,
                     ShapeError, UndefinedCorrelationError)
from .heatmap import render_heatmap, value_to_color, write_heatmap
from .npyio import read_array, write_array
from .pipeline import (RunConfig, cmd_aggregate, cmd_correlate, cmd_report,
                       cmd_sim, cmd_tree)
from .tree import (Dataset, EvalMetrics, SubsetCriteria, TreeModel,
                   assemble_features, evaluate, fit, predict, subset_filter,
                   train_test_split)

__version__ = "0.1.0"
