from typing import TYPE_CHECKING, List, Sequence

import numpy as np

from app.exception.exception import MetricError
from app.graph.models import Triple

from .models import RankReport

if TYPE_CHECKING:
    from .transe import TransEModel


def _worst_rank(scores: np.ndarray, true_index: int) -> int:
    """1 + number of entities scoring at least as high as the true one, itself excluded."""
    return int(np.count_nonzero(scores >= scores[true_index]))


def rank_metrics(model: "TransEModel", test: Sequence[Triple]) -> RankReport:
    """Raw (unfiltered) head and tail ranking; ties take the worst rank."""
    if not test:
        raise MetricError("Cannot rank an empty test set")
    entities = model.entity_matrix()
    relations = model.relation_matrix()
    ranks: List[int] = []
    for triple in test:
        r = relations[model.relation_id(triple.relation)]
        tail_scores = -np.linalg.norm(entities[triple.head] + r - entities, ord=model.norm_order, axis=1)
        ranks.append(_worst_rank(tail_scores, triple.tail))
        head_scores = -np.linalg.norm(entities + r - entities[triple.tail], ord=model.norm_order, axis=1)
        ranks.append(_worst_rank(head_scores, triple.head))
    array = np.asarray(ranks, dtype=np.float64)
    return RankReport(
        hits1=float(np.mean(array <= 1)),
        hits10=float(np.mean(array <= 10)),
        hits100=float(np.mean(array <= 100)),
        mrr=float(np.mean(1.0 / array)),
        rankings=len(ranks),
    )
