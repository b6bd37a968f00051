"""Benchmark toolkit for graph rewiring with training-free message-passing
models."""

from .curvature import balanced_forman, curvature_delta, curvature_distribution
from .datasets import load_canonical, load_dataset, load_tudataset
from .errors import BudgetExceeded, CompatibilityError, InputError
from .evaluation import (GraphTask, NodeTask, SearchSpace, accuracy, auroc,
                         make_splits, model_select, significance,
                         stratified_kfold)
from .graph import (DatasetStats, Graph, Normalization, OperatorKind,
                    ShiftOperator, build_graph, dataset_stats, diameter,
                    edge_homophily, four_cycle_profile, shift_operator,
                    triangle_count)
from .models import (ReadoutParams, ReservoirParams, gesn_embed, gesn_init,
                     input_features, one_hot, pool, predict, ridge_fit,
                     sgc_embed)
from .rewiring import (RewireConfig, RewiredGraph, apply_rewiring,
                       cayley_graph, rewire_diffusion, rewire_diffwire,
                       rewire_egp, rewire_grlef, rewire_sdrf, sl2_order)
from .spectral import (ResistanceMatrix, cheeger_bruteforce,
                       effective_resistance, heat_kernel,
                       laplacian_pseudoinverse, pagerank_kernel,
                       sensitivity_topology_factor, spectral_gap,
                       spectral_radius)

__version__ = "0.1.0"
