"""Scalable multi-label classification with classifier chains and classifier trellises."""
from .base_learner import LinearModel, SgdConfig, predict_proba, train_binary
from .data import Dataset, generate_bn_dataset, kfold_split, label_cardinality, load_dataset, save_dataset
from .errors import ConfigurationError, DatasetParseError, InputError
from .inference import GibbsConfig, ancestral_sample, gibbs_sample, marginal_map
from .metrics import average_ranks, exact_match, hamming_score, jaccard_accuracy, nemenyi_cd
from .models import (
    train_bcc,
    train_cc,
    train_cdt,
    train_ct,
    train_ebcc,
    train_ect,
    train_ensemble_cc,
    train_ic,
    select_mcc,
)
from .structure import (
    build_trellis,
    edge_f_measure,
    fs_structure,
    lead_structure,
    mutual_information_matrix,
    spanning_tree_structure,
)

__version__ = "0.1.0"
