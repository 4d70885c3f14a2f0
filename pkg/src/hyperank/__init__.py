"""hyperank: rank financial hypernyms by learned semantic similarity.

The pipeline ingests a labeled term set, augments it from acronym and
knowledge-base sources, generates graded training pairs from the label
taxonomy, trains a linear projection head over frozen base embeddings,
ranks all taxonomy labels per term by cosine similarity, and scores the
ranking with top-cutoff Accuracy and Mean Rank.
"""

from .analysis import pca_project
from .baselines import (
    LogRegModel,
    distance_rank,
    load_logreg,
    logreg_rank,
    predict_proba,
    save_logreg,
    train_logreg,
)
from .corpus import (
    AcronymEntry,
    DbpediaDoc,
    TermRecord,
    add_external_terms,
    augmentation_report,
    detect_acronyms,
    expand_acronyms,
    fetch_dbpedia,
    filter_acronyms,
    load_term_file,
    match_dbpedia,
    merge_glossaries,
    overlap_ratios,
    preprocess,
    read_records,
    split_dataset,
    write_records,
)
from .embeddings import (
    EmbeddingTable,
    cosine,
    hash_embed,
    hash_table,
    load_embeddings,
    save_embeddings,
    text_vector,
    wire_id,
)
from .errors import DataValidationError
from .evaluation import EvalReport, PerLabelRow, evaluate, per_label_report
from .negsampler import ScoredPair, generate_pairs, read_pairs, subsample_zeros, write_pairs
from .ranker import (
    RankedList,
    ensemble_mean,
    rank,
    read_ranked,
    read_similarity,
    rollup_mean,
    score,
    write_ranked,
    write_similarity,
)
from .taxonomy import LabelTaxonomy, default_hierarchy_path, load_taxonomy
from .trainer import (
    ProjectionModel,
    TrainConfig,
    contrastive_loss,
    encode,
    init_model,
    load_model,
    mnr_loss,
    regression_loss,
    save_model,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "AcronymEntry",
    "DataValidationError",
    "DbpediaDoc",
    "EmbeddingTable",
    "EvalReport",
    "LabelTaxonomy",
    "LogRegModel",
    "PerLabelRow",
    "ProjectionModel",
    "RankedList",
    "ScoredPair",
    "TermRecord",
    "TrainConfig",
    "add_external_terms",
    "augmentation_report",
    "contrastive_loss",
    "cosine",
    "default_hierarchy_path",
    "detect_acronyms",
    "distance_rank",
    "encode",
    "ensemble_mean",
    "evaluate",
    "expand_acronyms",
    "fetch_dbpedia",
    "filter_acronyms",
    "generate_pairs",
    "hash_embed",
    "hash_table",
    "init_model",
    "load_embeddings",
    "load_logreg",
    "load_model",
    "load_taxonomy",
    "load_term_file",
    "logreg_rank",
    "match_dbpedia",
    "merge_glossaries",
    "mnr_loss",
    "overlap_ratios",
    "pca_project",
    "per_label_report",
    "predict_proba",
    "preprocess",
    "rank",
    "read_pairs",
    "read_ranked",
    "read_records",
    "read_similarity",
    "regression_loss",
    "rollup_mean",
    "save_embeddings",
    "save_logreg",
    "save_model",
    "score",
    "split_dataset",
    "subsample_zeros",
    "text_vector",
    "train",
    "train_logreg",
    "wire_id",
    "write_pairs",
    "write_ranked",
    "write_records",
    "write_similarity",
]
