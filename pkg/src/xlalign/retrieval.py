"""Translation retrieval: cosine, nearest neighbor, and CSLS.

CSLS rescales cosine similarity by the mean similarity of each point to its
k nearest neighbors on the other side, which demotes hub vectors. All argmax
tie-breaking is lowest-index-wins, and queries are processed in fixed-size
row blocks so large vocabularies never materialize an n x n matrix; block
size does not affect results.
"""
from __future__ import annotations

import numpy as np

from .errors import ContractError
from .io import BilingualDictionary

DEFAULT_CSLS_K = 10
DEFAULT_BLOCK_SIZE = 1024


def _unit_rows(m):
    m = np.asarray(m, dtype=np.float64)
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    return np.divide(m, norms, out=np.zeros_like(m), where=norms != 0.0)


def cosine_block(queries, candidates):
    """Cosine similarity matrix between query rows and candidate rows.

    Zero-norm rows get similarity 0 against everything.
    """
    queries = np.asarray(queries, dtype=np.float64)
    candidates = np.asarray(candidates, dtype=np.float64)
    if queries.shape[1] != candidates.shape[1]:
        raise ContractError(
            f"dimension mismatch: queries d={queries.shape[1]}, candidates d={candidates.shape[1]}"
        )
    return _unit_rows(queries) @ _unit_rows(candidates).T


def nn_retrieve(sim):
    """Argmax candidate per query row; ties go to the lowest index."""
    sim = np.asarray(sim)
    if sim.shape[1] < 1:
        raise ContractError("need at least one candidate")
    return sim.argmax(axis=1).tolist()


def _knn_means(unit_a, unit_b, k, block_size):
    """For each row of unit_a, mean cosine to its k nearest rows of unit_b."""
    n = unit_a.shape[0]
    out = np.empty(n)
    for start in range(0, n, block_size):
        sim = unit_a[start : start + block_size] @ unit_b.T
        # top-k values per row; order within the top-k does not matter
        top = np.partition(sim, sim.shape[1] - k, axis=1)[:, -k:]
        out[start : start + block_size] = top.mean(axis=1)
    return out


def csls_scores(x_mapped, z_mapped, k=DEFAULT_CSLS_K, query_indices=None,
                block_size=DEFAULT_BLOCK_SIZE):
    """CSLS score rows for the selected queries against all candidates.

    score(x, z) = 2 cos(x, z) - rT(x) - rS(z), where rT(x) is the mean cosine
    of x to its k nearest candidates and rS(z) the mean cosine of z to its k
    nearest queries. Both penalties are computed over the full sets passed in,
    regardless of ``query_indices``. Yields (start, block) pairs over the
    selected queries.
    """
    x = np.asarray(x_mapped, dtype=np.float64)
    z = np.asarray(z_mapped, dtype=np.float64)
    if x.shape[1] != z.shape[1]:
        raise ContractError("query and candidate spaces must share dimensionality")
    if not 1 <= k <= z.shape[0] - 1 or k > x.shape[0]:
        raise ContractError(
            f"csls k={k} out of range for {x.shape[0]} queries and {z.shape[0]} candidates"
        )
    ux, uz = _unit_rows(x), _unit_rows(z)
    r_t = _knn_means(ux, uz, k, block_size)
    r_s = _knn_means(uz, ux, k, block_size)
    queries = np.arange(x.shape[0]) if query_indices is None else np.asarray(query_indices)
    for start in range(0, queries.shape[0], block_size):
        idx = queries[start : start + block_size]
        sim = 2.0 * (ux[idx] @ uz.T) - r_t[idx][:, None] - r_s[None, :]
        yield start, sim


def csls_retrieve(x_mapped, z_mapped, k=DEFAULT_CSLS_K, query_indices=None,
                  block_size=DEFAULT_BLOCK_SIZE):
    """CSLS argmax candidate per query; ties go to the lowest index."""
    n = np.asarray(x_mapped).shape[0] if query_indices is None else len(query_indices)
    out = np.empty(n, dtype=np.int64)
    for start, sim in csls_scores(x_mapped, z_mapped, k, query_indices, block_size):
        out[start : start + sim.shape[0]] = sim.argmax(axis=1)
    return out.tolist()


def _retrieve(queries, candidates, method, k, block_size):
    if method == "nn":
        n = queries.shape[0]
        out = np.empty(n, dtype=np.int64)
        uq, uc = _unit_rows(queries), _unit_rows(candidates)
        for start in range(0, n, block_size):
            out[start : start + block_size] = (uq[start : start + block_size] @ uc.T).argmax(axis=1)
        return out.tolist()
    if method == "csls":
        return csls_retrieve(queries, candidates, k, block_size=block_size)
    raise ContractError(f"unknown retrieval method {method!r}")


def induce_dictionary(x_mapped, z_mapped, method="csls", k=DEFAULT_CSLS_K,
                      directions="union", block_size=DEFAULT_BLOCK_SIZE) -> BilingualDictionary:
    """Induce translation pairs between two mapped spaces.

    forward: (i, retrieve(i)) for every source i. backward: (retrieve(j), j)
    for every target j. union: both, deduplicated and sorted by source then
    target index.
    """
    x = np.asarray(x_mapped, dtype=np.float64)
    z = np.asarray(z_mapped, dtype=np.float64)
    pairs: list[tuple[int, int]] = []
    if directions in ("forward", "union"):
        pairs += [(i, j) for i, j in enumerate(_retrieve(x, z, method, k, block_size))]
    if directions in ("backward", "union"):
        pairs += [(i, j) for j, i in enumerate(_retrieve(z, x, method, k, block_size))]
    if directions not in ("forward", "backward", "union"):
        raise ContractError(f"unknown directions {directions!r}")
    if directions == "union":
        pairs = sorted(set(pairs))
    return pairs
