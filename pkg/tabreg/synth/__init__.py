from .config import GenConfig, parse_range
from .grid import LdpPairLabel, WordBox, cluster_to_grid, cluster_word_grid, ldp_labels
