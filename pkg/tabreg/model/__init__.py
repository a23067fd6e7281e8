from .config import ABLATION_PRESETS, ModelConfig, TrainConfig
from .featurizer import CellFeatures, Featurizer, featurize, positional_embedding_2d, positional_embedding_2d_batch
from .regressor import LogicalPrediction, LoreModel, RoundedLocations, round_to_logical
from .losses import build_adjacent_pairs, loss_inter, loss_intra, loss_log, loss_total
