import copy
import json
import logging
import math
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from app.config import TransESettings
from app.exception.exception import LoadError, TrainingError
from app.graph.models import Triple

from .models import TripleSplit
from .ranking import rank_metrics

logger = logging.getLogger(__name__)

MODEL_FILE = "transe.txt"
LABELS_FILE = "transe.labels.json"

EpochCallback = Callable[[int, float, "TransEModel"], None]


class TransEModel(nn.Module):
    """Translational embeddings: f(h, r, t) = -||e_h + e_r - e_t||_p."""

    def __init__(self, entity_count: int, relations: Sequence[str], dim: int, norm_order: int = 1):
        super().__init__()
        self.dim = dim
        self.norm_order = norm_order
        self.relations = list(relations)
        self.relation_index: Dict[str, int] = {r: i for i, r in enumerate(self.relations)}
        self.entity_labels: List[str] = [str(i) for i in range(entity_count)]
        self.entity_emb = nn.Embedding(entity_count, dim)
        self.relation_emb = nn.Embedding(len(self.relations), dim)
        self.history: List[float] = []
        self.best_valid_mrr: Optional[float] = None

    @property
    def entity_count(self) -> int:
        return self.entity_emb.num_embeddings

    def reset_parameters(self) -> None:
        bound = 6.0 / math.sqrt(self.dim)
        nn.init.uniform_(self.entity_emb.weight, -bound, bound)
        nn.init.uniform_(self.relation_emb.weight, -bound, bound)
        with torch.no_grad():
            self.relation_emb.weight.div_(self.relation_emb.weight.norm(dim=1, keepdim=True).clamp_min(1e-12))
        self.normalize_entities()

    def normalize_entities(self) -> None:
        with torch.no_grad():
            self.entity_emb.weight.div_(self.entity_emb.weight.norm(dim=1, keepdim=True).clamp_min(1e-12))

    def forward(self, heads: torch.Tensor, relations: torch.Tensor, tails: torch.Tensor) -> torch.Tensor:
        translated = self.entity_emb(heads) + self.relation_emb(relations) - self.entity_emb(tails)
        return -torch.linalg.vector_norm(translated, ord=self.norm_order, dim=-1)

    def entity_matrix(self) -> np.ndarray:
        return self.entity_emb.weight.detach().cpu().numpy().astype(np.float64)

    def relation_matrix(self) -> np.ndarray:
        return self.relation_emb.weight.detach().cpu().numpy().astype(np.float64)

    def relation_id(self, relation: str) -> int:
        try:
            return self.relation_index[relation]
        except KeyError:
            raise ValueError(f"Unknown relation: {relation!r}")


def score_triple(model: TransEModel, h: int, r: Union[str, int], t: int) -> float:
    relation = model.relation_id(r) if isinstance(r, str) else r
    if not 0 <= relation < len(model.relations):
        raise ValueError(f"Unknown relation id: {r}")
    for entity in (h, t):
        if not 0 <= entity < model.entity_count:
            raise ValueError(f"Unknown entity id: {entity}")
    entities = model.entity_matrix()
    vector = entities[h] + model.relation_matrix()[relation] - entities[t]
    return -float(np.linalg.norm(vector, ord=model.norm_order))


def _tensor(triples: Sequence[Triple], model: TransEModel) -> torch.Tensor:
    return torch.tensor(
        [[t.head, model.relation_id(t.relation), t.tail] for t in triples], dtype=torch.long
    )


def init_transe(split: TripleSplit, config: TransESettings) -> TransEModel:
    """The seeded, normalized starting point of training."""
    torch.manual_seed(config.seed)
    model = TransEModel(split.entity_count, split.relations, config.dim, config.norm_order)
    model.reset_parameters()
    return model


def _corrupt(batch: torch.Tensor, k: int, entity_count: int, generator: torch.Generator) -> torch.Tensor:
    """k negatives per positive, replacing head or tail uniformly at random."""
    negatives = batch.unsqueeze(1).repeat(1, k, 1)
    replace_head = torch.rand(negatives.shape[:2], generator=generator) < 0.5
    random_entities = torch.randint(0, entity_count, negatives.shape[:2], generator=generator)
    negatives[..., 0] = torch.where(replace_head, random_entities, negatives[..., 0])
    negatives[..., 2] = torch.where(replace_head, negatives[..., 2], random_entities)
    return negatives


def _loss(model: TransEModel, batch: torch.Tensor, negatives: torch.Tensor, config: TransESettings) -> torch.Tensor:
    positive = model(batch[:, 0], batch[:, 1], batch[:, 2])
    negative = model(negatives[..., 0], negatives[..., 1], negatives[..., 2])
    if config.loss == "margin":
        return F.relu(config.margin - positive.unsqueeze(1) + negative).mean()
    # softmax NLL with the positive in column 0
    logits = torch.cat([positive.unsqueeze(1), negative], dim=1)
    target = torch.zeros(logits.shape[0], dtype=torch.long)
    return F.cross_entropy(logits, target)


def train_transe(
        split: TripleSplit,
        config: TransESettings,
        epoch_callback: Optional[EpochCallback] = None,
) -> TransEModel:
    """Adam training with early stopping on validation MRR.

    The weights with the best validation MRR are restored at the end.
    """
    if not split.train:
        raise TrainingError("Training split is empty")
    model = init_transe(split, config)
    if config.max_epochs == 0:
        return model

    generator = torch.Generator().manual_seed(config.seed)
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr)
    train = _tensor(split.train, model)
    best_state = None
    bad_evaluations = 0

    logger.info(
        f"[TRANSE] Training dim={config.dim} lr={config.lr} batch={config.batch_size} "
        f"negatives={config.negatives_per_positive} loss={config.loss} on {len(train)} triples"
    )
    for epoch in range(1, config.max_epochs + 1):
        model.train()
        order = torch.randperm(len(train), generator=generator)
        total, batches = 0.0, 0
        for start in range(0, len(train), config.batch_size):
            batch = train[order[start:start + config.batch_size]]
            negatives = _corrupt(batch, config.negatives_per_positive, model.entity_count, generator)
            optimizer.zero_grad()
            loss = _loss(model, batch, negatives, config)
            if not torch.isfinite(loss):
                raise TrainingError(
                    f"Non-finite loss at epoch {epoch}, batch {batches}: {loss.item()}",
                    data={"epoch": epoch, "batch": batches},
                )
            loss.backward()
            optimizer.step()
            total += loss.item()
            batches += 1
        model.normalize_entities()
        epoch_loss = total / batches
        model.history.append(epoch_loss)
        if epoch_callback is not None:
            epoch_callback(epoch, epoch_loss, model)

        if split.valid and epoch % config.eval_every == 0:
            valid_mrr = rank_metrics(model, split.valid).mrr
            logger.info(f"[TRANSE] Epoch {epoch}: loss={epoch_loss:.4f} valid MRR={valid_mrr:.4f}")
            if model.best_valid_mrr is None or valid_mrr > model.best_valid_mrr:
                model.best_valid_mrr = valid_mrr
                best_state = copy.deepcopy(model.state_dict())
                bad_evaluations = 0
            else:
                bad_evaluations += 1
                if bad_evaluations >= config.patience:
                    logger.info(f"[TRANSE] Early stop at epoch {epoch}: no MRR gain in {config.patience} evaluations")
                    break

    if best_state is not None:
        model.load_state_dict(best_state)
    return model


def persist_model(model: TransEModel, path: Union[str, Path]) -> Path:
    """Header line, then one row of reals per entity and per relation, plus a labels sidecar."""
    path = Path(path)
    if path.suffix == "":
        path = path / MODEL_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "dim": model.dim,
        "norm_order": model.norm_order,
        "entity_count": model.entity_count,
        "relation_count": len(model.relations),
    }
    with path.open("w", encoding="utf-8", newline="\n") as handle:
        handle.write(json.dumps(header) + "\n")
        for matrix in (model.entity_matrix(), model.relation_matrix()):
            for row in matrix:
                handle.write(" ".join(repr(float(v)) for v in row) + "\n")
    sidecar = path.with_name(LABELS_FILE)
    sidecar.write_text(
        json.dumps({"entities": model.entity_labels, "relations": model.relations}, ensure_ascii=False),
        encoding="utf-8",
    )
    logger.info(f"[TRANSE] Persisted model to {path}")
    return path


def load_model(path: Union[str, Path]) -> TransEModel:
    path = Path(path)
    if path.is_dir():
        path = path / MODEL_FILE
    sidecar = path.with_name(LABELS_FILE)
    if not path.exists() or not sidecar.exists():
        raise LoadError(f"Model file or labels sidecar missing: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    try:
        header = json.loads(lines[0])
        labels = json.loads(sidecar.read_text(encoding="utf-8"))
        rows = np.array([[float(v) for v in line.split()] for line in lines[1:] if line.strip()])
    except (IndexError, ValueError) as e:
        raise LoadError(f"Malformed model file {path}: {e}")
    entity_count, relation_count = header["entity_count"], header["relation_count"]
    if rows.shape != (entity_count + relation_count, header["dim"]):
        raise LoadError(f"Model file {path} does not match its header")
    model = TransEModel(entity_count, labels["relations"], header["dim"], header["norm_order"])
    model.entity_labels = list(labels["entities"])
    with torch.no_grad():
        model.entity_emb.weight.copy_(torch.from_numpy(rows[:entity_count]))
        model.relation_emb.weight.copy_(torch.from_numpy(rows[entity_count:]))
    return model
