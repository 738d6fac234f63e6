import logging
from collections import Counter
from typing import Iterable, List

from app.exceptions import UsageError
from app.services.graph_service import Edge

logger = logging.getLogger(__name__)


class CorpusService:

    @staticmethod
    def cooccurrence_edges(lines: Iterable[str], window: int = 5, min_count: int = 5,
                           directed: bool = False) -> List[Edge]:
        """Language network: words inside one ``window``-word span co-occur.

        Words rarer than ``min_count`` are removed before windowing. The weight
        is the co-occurrence count, emitted in both directions unless
        ``directed``, which keeps only the reading-order edge.
        """
        if window < 2:
            raise UsageError("window must span at least 2 words")
        sentences = [line.split() for line in lines]
        frequency = Counter(word for sentence in sentences for word in sentence)
        kept = {word for word, count in frequency.items() if count >= min_count}
        logger.info(f"Vocabulary: {len(kept)} of {len(frequency)} words with frequency >= {min_count}")

        counts: Counter = Counter()
        for sentence in sentences:
            tokens = [word for word in sentence if word in kept]
            for i, word in enumerate(tokens):
                for other in tokens[i + 1:i + window]:
                    counts[(word, other)] += 1
                    if directed or other == word:
                        continue
                    counts[(other, word)] += 1
        return [Edge(source, target, float(weight)) for (source, target), weight in counts.items()]
