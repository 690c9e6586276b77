# src/data_loader.py
"""
Readers for the comma-separated input files.

Scored pairs ``id1,id2,p`` come out of an external blocker/classifier; the
absence of a pair is the blocking decision. Raw costs ``id1,id2,theta`` and
reference partitions ``id,cluster_label`` share the same parsing rules.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple

import pandas as pd

from config.config import PROBABILITY_BIAS
from src.core import Instance, canonical_pair
from src.exceptions import DuplicatePair, ParseError, ProbabilityOutOfRange, UnknownId
from src.metrics import LabeledPartition

logger = logging.getLogger(__name__)

_SPARE = "_extra"
_VALUE_HEADERS = ("p", "theta")


@dataclass
class IdTable:
    """Dense observation indices for the external ids, in first-appearance order"""

    ids: List[str] = field(default_factory=list)
    _index: Dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {key: d for d, key in enumerate(self.ids)}
        if len(self._index) != len(self.ids):
            raise ValueError("Ids must be unique")

    def __len__(self):
        return len(self.ids)

    def __contains__(self, key) -> bool:
        return key in self._index

    def intern(self, key: str) -> int:
        d = self._index.get(key)
        if d is None:
            d = len(self.ids)
            self.ids.append(key)
            self._index[key] = d
        return d

    def index_of(self, key: str) -> int:
        return self._index[key]

    def id_of(self, d: int) -> str:
        return self.ids[d]


class PairFileLoader:
    """Turns scored-pair, raw-cost and truth files into model objects"""

    def __init__(self, bias: float = PROBABILITY_BIAS):
        if not math.isfinite(bias):
            raise ValueError(f"bias must be finite, got {bias}")
        self.bias = bias
        self.logger = logging.getLogger(__name__)

    def _rows(self, path: Path, columns: List[str]) -> Iterator[Tuple[int, List[str]]]:
        """(line number, stripped fields) of every non-blank record, header skipped"""
        try:
            frame = pd.read_csv(path, header=None, names=columns + [_SPARE], index_col=False, dtype=str,
                                keep_default_na=False, skip_blank_lines=False, engine="python",
                                encoding="utf-8")
        except pd.errors.EmptyDataError:
            return
        except pd.errors.ParserError as e:
            raise ParseError(f"malformed record: {e}", path=path) from e
        except UnicodeDecodeError as e:
            raise ParseError(f"not UTF-8: {e}", path=path) from e

        for position, record in enumerate(frame.itertuples(index=False, name=None)):
            line = position + 1
            if all(pd.isna(value) or value.strip() == "" for value in record):
                continue
            if not pd.isna(record[-1]):
                raise ParseError(f"expected {len(columns)} fields", line=line, path=path)
            fields = list(record[:-1])
            if any(pd.isna(value) for value in fields):
                raise ParseError(f"expected {len(columns)} fields", line=line, path=path)
            fields = [value.strip() for value in fields]
            if line == 1 and self._is_header(fields, columns):
                self.logger.debug(f"{path}: skipping header {fields}")
                continue
            yield line, fields

    @staticmethod
    def _is_header(fields: List[str], columns: List[str]) -> bool:
        """Only an exact column-name row counts; anything else on line 1 is data"""
        names = [value.lower() for value in fields]
        if len(columns) == 3:
            return names[:2] == columns[:2] and names[2] in _VALUE_HEADERS
        return names == columns

    def _read_pairs(self, path: Path, value_name: str) -> Tuple[Instance, IdTable]:
        path = Path(path)
        ids = IdTable()
        costs: Dict[Tuple[int, int], float] = {}

        for line, (id1, id2, raw) in self._rows(path, ["id1", "id2", value_name]):
            if not id1 or not id2:
                raise ParseError("empty observation id", line=line, path=path)
            if id1 == id2:
                raise ParseError(f"self pair {id1},{id2}", line=line, path=path)
            try:
                value = float(raw)
            except ValueError:
                raise ParseError(f"{value_name} {raw!r} is not a number", line=line, path=path)

            if value_name == "p":
                if not 0.0 <= value <= 1.0:
                    raise ProbabilityOutOfRange(f"probability {raw} outside [0, 1]", line=line, path=path)
                theta = self.bias - value
            else:
                if not math.isfinite(value):
                    raise ParseError(f"theta {raw!r} must be finite", line=line, path=path)
                theta = value

            key = canonical_pair(ids.intern(id1), ids.intern(id2))
            if key in costs:
                raise DuplicatePair(f"pair {id1},{id2} listed twice", line=line, path=path)
            costs[key] = theta

        instance = Instance(len(ids), costs)
        self.logger.info(f"Loaded {path}: {len(ids)} observations, {len(costs)} scored pairs")
        return instance, ids

    def ingest_pairs(self, path) -> Tuple[Instance, IdTable]:
        return self._read_pairs(path, "p")

    def ingest_theta(self, path) -> Tuple[Instance, IdTable]:
        return self._read_pairs(path, "theta")

    def ingest_truth(self, path, ids: Optional[IdTable] = None) -> LabeledPartition:
        """
        Reference partition keyed by external id.

        With ``ids`` given, unknown ids raise UnknownId and ids the file does
        not mention become singleton clusters.
        """
        path = Path(path)
        assignment: Dict[str, object] = {}
        for line, (key, label) in self._rows(path, ["id", "cluster_label"]):
            if not key:
                raise ParseError("empty observation id", line=line, path=path)
            if key in assignment:
                raise ParseError(f"id {key} listed twice", line=line, path=path)
            if ids is not None and key not in ids:
                raise UnknownId(f"{path}:{line}: id {key} is not part of the instance")
            assignment[key] = label

        if ids is not None:
            missing = [key for key in ids.ids if key not in assignment]
            if missing:
                self.logger.warning(f"{len(missing)} observations missing from {path}; treating them as singletons")
            for key in missing:
                assignment[key] = ("singleton", key)
            assignment = {key: assignment[key] for key in ids.ids}

        self.logger.info(f"Loaded reference partition from {path}: {len(assignment)} observations")
        return LabeledPartition(assignment)


def ingest_pairs(path, bias: float = PROBABILITY_BIAS) -> Tuple[Instance, IdTable]:
    """theta = bias - p for every listed pair; unlisted pairs stay blocked"""
    return PairFileLoader(bias).ingest_pairs(path)


def ingest_theta(path) -> Tuple[Instance, IdTable]:
    return PairFileLoader().ingest_theta(path)


def ingest_truth(path, ids: Optional[IdTable] = None) -> LabeledPartition:
    return PairFileLoader().ingest_truth(path, ids)
