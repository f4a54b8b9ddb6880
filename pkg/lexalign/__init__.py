from importlib.metadata import version

from lexalign.lib import validators
from lexalign.lib.config_utils import dump_config, load_config_file, validate_config
from lexalign.lib.csls import csls_penalties, csls_score
from lexalign.lib.default_config import get_default_config
from lexalign.lib.embio import (
    BilingualTables,
    ContextualTable,
    EmbeddingTable,
    build_contextual_table,
    load_table,
    load_vec_file,
    normalization_stages,
    normalize_pipeline,
    save_table,
    write_vec_file,
)
from lexalign.lib.errors import (
    ConfigError,
    DataError,
    LexAlignError,
    NumericError,
)
from lexalign.lib.lexicon import (
    SeedLexicon,
    parse_dictionary,
    split_lexicon,
    write_dictionary,
)
from lexalign.lib.mapping import (
    AlignmentModel,
    DenseProjection,
    HouseholderChain,
    adapter_calibrate,
    chain_apply,
    chain_matrix,
    create_alignment_model,
    create_householder_chain,
    forward_map,
    householder_reflect,
    load_checkpoint,
    load_model,
    save_model,
)
from lexalign.lib.merge_configs import merge_configs
from lexalign.lib.negatives import NegativeSet, sample_negatives
from lexalign.lib.objective import gradients, mse_loss, rank_loss, total_loss
from lexalign.lib.optimizer import OptimizerState, adam_step, create_optimizer_state
from lexalign.lib.procrustes import fit_lexicon, fit_procrustes
from lexalign.lib.retrieval import (
    RetrievalIndex,
    build_index,
    evaluation_report,
    induce,
    precision_at_k,
    top_k,
)
from lexalign.lib.synth import generate_synthetic, make_synthetic
from lexalign.lib.training import TrainResult, augment_dictionary, train
from lexalign.lib.types import Projection

__version__ = version("lexalign")

__all__ = [
    "validators",
    "get_default_config",
    "merge_configs",
    "load_config_file",
    "dump_config",
    "validate_config",
    "LexAlignError",
    "ConfigError",
    "DataError",
    "NumericError",
    "EmbeddingTable",
    "ContextualTable",
    "BilingualTables",
    "load_vec_file",
    "write_vec_file",
    "normalization_stages",
    "normalize_pipeline",
    "build_contextual_table",
    "save_table",
    "load_table",
    "SeedLexicon",
    "parse_dictionary",
    "write_dictionary",
    "split_lexicon",
    "AlignmentModel",
    "HouseholderChain",
    "DenseProjection",
    "Projection",
    "create_alignment_model",
    "create_householder_chain",
    "adapter_calibrate",
    "householder_reflect",
    "chain_apply",
    "chain_matrix",
    "forward_map",
    "save_model",
    "load_model",
    "load_checkpoint",
    "csls_penalties",
    "csls_score",
    "NegativeSet",
    "sample_negatives",
    "rank_loss",
    "mse_loss",
    "total_loss",
    "gradients",
    "OptimizerState",
    "create_optimizer_state",
    "adam_step",
    "augment_dictionary",
    "train",
    "TrainResult",
    "RetrievalIndex",
    "build_index",
    "top_k",
    "precision_at_k",
    "evaluation_report",
    "induce",
    "fit_procrustes",
    "fit_lexicon",
    "make_synthetic",
    "generate_synthetic",
]
