import math
import re
from typing import Sequence

from nltk.translate.bleu_score import brevity_penalty, modified_precision

_TOKEN_RE = re.compile(r"<[^>]+>|[^<]+")


def markup_tokens(markup: str) -> list[str]:
    """Split markup into tag tokens and text runs, e.g. ``<tr>``, ``<td rowspan="1" colspan="2">``."""
    return [tok for tok in _TOKEN_RE.findall(markup) if tok.strip()]


def bleu(candidate: Sequence[str], reference: Sequence[str], max_n: int = 4) -> float:
    """Uniform-weight BLEU against one reference, no smoothing."""
    if not candidate or not reference:
        return 0.0
    candidate, reference = list(candidate), list(reference)
    precisions = [modified_precision([reference], candidate, n) for n in range(1, max_n + 1)]
    if any(p.numerator == 0 for p in precisions):
        return 0.0
    log_mean = sum(math.log(float(p)) for p in precisions) / max_n
    bp = brevity_penalty(len(reference), len(candidate))
    return float(bp * math.exp(log_mean))
