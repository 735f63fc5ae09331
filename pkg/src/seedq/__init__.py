"""Learning-based influence maximization: embed, learn node scores, pick seeds.

Pipeline: sample training subgraphs from a target network, train a scoring
network with n-step Q-learning over Monte-Carlo cascade rewards, then select
all k seeds in one shot from the learned scores.  Brute-force live-edge
oracles and CELF lazy greedy are built in so the quality claims are
machine-checkable at small scale.
"""

from .backend import active_backend, set_backend
from .diffusion import (
    DiffusionModel,
    SpreadEstimate,
    estimate_spread,
    exact_spread,
    marginal_gain,
    simulate_once,
)
from .embedding import Embedding, QNetParams, embed, init_params, load_model, q_values, save_model
from .graph import (
    EmpiricalCdf,
    Graph,
    GraphFormatError,
    average_degree,
    clustering_distribution,
    degree_distribution,
    load_edge_list,
    save_edge_list,
)
from .pipeline import ExperimentConfig, PipelineError, SnapshotSeries, run_evolution, run_pipeline
from .sampling import SampleSpec, ks_d_statistic, sample_subgraph
from .selection import (
    SeedSet,
    StabilityReport,
    celf_greedy,
    naive_greedy,
    random_seeds,
    select_iterative,
    select_topk,
    stability_report,
    top_k_ids,
)
from .training import (
    ReplayMemory,
    TrainConfig,
    TrainResult,
    Transition,
    epsilon_greedy_action,
    grad_params,
    loss,
    n_step_target,
    reward,
    train,
)

__version__ = "0.1.0"
