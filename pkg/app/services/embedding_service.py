"""word2vec text format: a ``<count> <dimensions>`` header, then ``<name> <v1> ... <vd>`` lines."""
import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence

import numpy as np

from app.exceptions import EmbeddingFormatError
from app.services.graph_service import utf8_lines

logger = logging.getLogger(__name__)


@dataclass
class KeyedEmbeddings:
    names: List[str]
    vectors: np.ndarray

    def __post_init__(self):
        if len(self.names) != self.vectors.shape[0]:
            raise EmbeddingFormatError("Names and vectors differ in length.")
        self.index: Dict[str, int] = {name: i for i, name in enumerate(self.names)}

    def __contains__(self, name: str) -> bool:
        return name in self.index

    def __len__(self) -> int:
        return len(self.names)

    @property
    def dimensions(self) -> int:
        return self.vectors.shape[1]

    def vector(self, name: str) -> np.ndarray:
        return self.vectors[self.index[name]]


class EmbeddingService:

    @staticmethod
    def save(path, names: Sequence[str], vectors: np.ndarray) -> None:
        with open(path, "w", encoding="utf-8") as out:
            out.write(f"{vectors.shape[0]} {vectors.shape[1]}\n")
            for name, row in zip(names, vectors):
                out.write(name + " " + " ".join(f"{value:.6f}" for value in row) + "\n")
        logger.info(f"Saved {vectors.shape[0]}x{vectors.shape[1]} embeddings to {path}")

    @staticmethod
    def load(path) -> KeyedEmbeddings:
        lines = utf8_lines(path, lambda n, detail: EmbeddingFormatError(f"{path}: line {n}: {detail}"))
        header = next(lines, "").split()
        if len(header) != 2:
            raise EmbeddingFormatError(f"{path}: header must be '<count> <dimensions>'")
        try:
            count, dimensions = int(header[0]), int(header[1])
        except ValueError:
            raise EmbeddingFormatError(f"{path}: non-integer header") from None

        names: List[str] = []
        vectors = np.zeros((count, dimensions), dtype=np.float64)
        for line_number, line in enumerate(lines, start=2):
            fields = line.split()
            if not fields:
                continue
            if len(names) >= count:
                raise EmbeddingFormatError(f"{path}: more rows than the header declares")
            if len(fields) != dimensions + 1:
                raise EmbeddingFormatError(f"{path}: line {line_number} has {len(fields) - 1} values")
            try:
                vectors[len(names)] = [float(value) for value in fields[1:]]
            except ValueError:
                raise EmbeddingFormatError(f"{path}: line {line_number} has a non-numeric value") from None
            names.append(fields[0])
        if len(names) != count:
            raise EmbeddingFormatError(f"{path}: expected {count} rows, found {len(names)}")
        return KeyedEmbeddings(names, vectors)
