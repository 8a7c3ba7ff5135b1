from __future__ import annotations

import torch


def greedy_match_f1(source_vecs: torch.Tensor, text_vecs: torch.Tensor) -> float:
    """Greedy token-matching F1 between two embedded token sequences.

    Rows must be L2-normalized token vectors. Every source token is matched
    to its maximum-cosine counterpart in the text and vice versa; the means
    of those maxima give recall and precision.
    """
    if source_vecs.ndim != 2 or text_vecs.ndim != 2:
        raise ValueError("expected (tokens, dim) embedding matrices")
    if source_vecs.shape[0] == 0 or text_vecs.shape[0] == 0:
        raise ValueError("cannot match empty token sequences")
    sim = source_vecs @ text_vecs.T
    recall = sim.max(dim=1).values.mean().item()
    precision = sim.max(dim=0).values.mean().item()
    denom = precision + recall
    return 2.0 * precision * recall / denom if denom > 0 else 0.0


def normalize_rows(matrix: torch.Tensor, eps: float = 1e-12) -> torch.Tensor:
    return matrix / matrix.norm(dim=-1, keepdim=True).clamp_min(eps)
