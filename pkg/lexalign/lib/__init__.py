from . import validators
from .config_utils import dump_config, load_config_file, validate_config
from .default_config import get_default_config
from .embio import (
    BilingualTables,
    build_contextual_table,
    load_vec_file,
    normalize_pipeline,
)
from .lexicon import SeedLexicon, parse_dictionary, split_lexicon
from .mapping import AlignmentModel, create_alignment_model, forward_map
from .merge_configs import merge_configs
from .retrieval import build_index, precision_at_k, top_k
from .training import augment_dictionary, train
