"""Dense complex tensor algebra: pairwise contraction and truncated SVD.

Tensors are plain numpy arrays of complex amplitudes in row-major order.
Everything here is a pure function; nothing mutates its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericError

# Singular values below this fraction of the largest one count as zero
# when determining the numerical rank.
RANK_FLOOR = 1e-14


@dataclass(frozen=True)
class TruncationSpec:
    """Bond truncation policy: hard cap plus relative discarded-weight cutoff."""

    max_bond: int = 800
    rel_cutoff: float = 1e-10

    def __post_init__(self):
        if self.max_bond < 1:
            raise ValueError(f"max_bond must be >= 1, got {self.max_bond}")
        if not 0.0 <= self.rel_cutoff < 1.0:
            raise ValueError(f"rel_cutoff must be in [0, 1), got {self.rel_cutoff}")


@dataclass(frozen=True)
class SvdResult:
    """Truncated SVD factors, kept spectrum and the relative discarded weight."""

    left_isometry: np.ndarray
    singular_values: np.ndarray
    right_isometry: np.ndarray
    discarded_weight: float


def contract(a, b, pairs):
    """Contract tensor ``a`` with tensor ``b`` over the given axis pairs.

    ``pairs`` is a sequence of (axis-of-a, axis-of-b) tuples.  The result
    carries the free axes of ``a`` (in order) followed by the free axes of
    ``b``.  Implemented as permute-reshape-matmul.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    axes_a = [p[0] for p in pairs]
    axes_b = [p[1] for p in pairs]
    if len(set(axes_a)) != len(axes_a) or len(set(axes_b)) != len(axes_b):
        raise ValueError("contraction pairs repeat an axis")
    for ax_a, ax_b in pairs:
        if a.shape[ax_a] != b.shape[ax_b]:
            raise DimensionError(
                f"axis {ax_a} of a (extent {a.shape[ax_a]}) does not match "
                f"axis {ax_b} of b (extent {b.shape[ax_b]})"
            )
    free_a = [i for i in range(a.ndim) if i not in axes_a]
    free_b = [i for i in range(b.ndim) if i not in axes_b]
    am = a.transpose(free_a + axes_a).reshape(
        int(np.prod([a.shape[i] for i in free_a], dtype=np.int64)), -1
    )
    bm = b.transpose(axes_b + free_b).reshape(
        -1, int(np.prod([b.shape[i] for i in free_b], dtype=np.int64))
    )
    out = am @ bm
    return out.reshape([a.shape[i] for i in free_a] + [b.shape[i] for i in free_b])


def truncated_svd(m, spec: TruncationSpec) -> SvdResult:
    """SVD of a rank-2 tensor, truncated per ``spec``.

    The kept count is the minimum of ``spec.max_bond``, the numerical rank,
    and the smallest count whose relative discarded weight (sum of squared
    discarded singular values over the total) is at most ``spec.rel_cutoff``.
    A zero matrix keeps one singular value (0) so bonds never vanish.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError(f"truncated_svd expects a rank-2 tensor, got rank {m.ndim}")
    if not np.all(np.isfinite(m)):
        raise NumericError("non-finite entries in SVD input")
    try:
        u, s, vh = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails to converge; gesvd is slower but robust
        import scipy.linalg

        u, s, vh = scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")
    total = float(np.sum(s**2))
    if total == 0.0:
        return SvdResult(u[:, :1], s[:1], vh[:1], 0.0)
    rank = int(np.count_nonzero(s > RANK_FLOOR * s[0]))
    rank = max(rank, 1)
    # smallest keep count with discarded weight <= rel_cutoff
    tail = np.cumsum((s[::-1] ** 2))[::-1] / total  # tail[i] = weight of s[i:]
    over = np.nonzero(tail <= spec.rel_cutoff)[0]
    keep_cut = int(over[0]) if len(over) else len(s)
    keep = max(1, min(spec.max_bond, rank, keep_cut))
    discarded = float(np.sum(s[keep:] ** 2) / total)
    return SvdResult(u[:, :keep], s[:keep], vh[:keep], discarded)
