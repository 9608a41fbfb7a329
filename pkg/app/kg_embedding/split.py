import logging
from typing import List, Set, Tuple

import numpy as np

from app.exception.exception import GraphTooSmallError
from app.graph.knowledge_graph import KnowledgeGraph
from app.graph.models import HAS_CUI, Triple

from .models import TripleSplit

logger = logging.getLogger(__name__)


def _covered(triple: Triple, entities: Set[int], relations: Set[str]) -> bool:
    return triple.head in entities and triple.tail in entities and triple.relation in relations


def split_triples(
        kg: KnowledgeGraph,
        ratios: Tuple[float, float, float] = (0.85, 0.05, 0.10),
        seed: int = 42,
        include_cui_links: bool = False,
) -> TripleSplit:
    """Seeded shuffle into train/valid/test.

    Valid and test triples whose entities or relation never occur in train are
    moved back to train.
    """
    if abs(sum(ratios) - 1.0) > 1e-9 or any(r < 0 for r in ratios):
        raise ValueError("split ratios must be non-negative and sum to 1")
    triples = [t for t in kg.triples if include_cui_links or t.relation != HAS_CUI]
    if not triples:
        raise GraphTooSmallError("Knowledge graph has no triples to split")

    order = np.random.default_rng(seed).permutation(len(triples))
    shuffled = [triples[i] for i in order]
    n_valid = int(round(len(shuffled) * ratios[1]))
    n_test = int(round(len(shuffled) * ratios[2]))
    n_train = len(shuffled) - n_valid - n_test
    train: List[Triple] = shuffled[:n_train]
    valid = shuffled[n_train:n_train + n_valid]
    test = shuffled[n_train + n_valid:]

    entities = {t.head for t in train} | {t.tail for t in train}
    relations = {t.relation for t in train}
    stray = [t for t in valid + test if not _covered(t, entities, relations)]
    moved = len(stray)
    if stray:
        stray_set = set(stray)
        valid = [t for t in valid if t not in stray_set]
        test = [t for t in test if t not in stray_set]
        train.extend(stray)
    if moved:
        logger.warning(f"[TRANSE] Moved {moved} valid/test triples to train for entity/relation coverage")

    if (ratios[1] > 0 and not valid) or (ratios[2] > 0 and not test) or not train:
        raise GraphTooSmallError(
            f"Graph too small for non-empty splits ({len(triples)} triples, "
            f"train={len(train)} valid={len(valid)} test={len(test)})",
        )
    logger.info(f"[TRANSE] Split {len(triples)} triples: train={len(train)} valid={len(valid)} test={len(test)}")
    return TripleSplit(
        train=train,
        valid=valid,
        test=test,
        seed=seed,
        entity_count=len(kg),
        relations=sorted({t.relation for t in triples}),
        moved_to_train=moved,
    )
