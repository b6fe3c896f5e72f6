"""From-scratch inverted-file (IVF) index for cosine search over clip embeddings.

Embeddings are stored unit-normalized as float32, so cosine similarity is a
plain dot product and Euclidean nearest-centroid assignment agrees with the
cosine geometry. The coarse quantizer is k-means (k-means++ init, Lloyd
iterations), built deterministically from a seed. `exact_search` is the
brute-force oracle sharing the ordering contract with `search`.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass
from typing import BinaryIO, NamedTuple, Protocol, Sequence

import httpx
import numpy as np

from .errors import (
    DegenerateEmbeddingError,
    DuplicateIdError,
    EmptyInputError,
    FileFormatError,
    MalformedPayloadError,
    OutOfRangeError,
    RemoteTimeoutError,
    TooManyListsError,
)
from .textutil import tokenize

DEFAULT_DIM = 128

EMBEDDING_MAGIC = b"EMB1"
INDEX_MAGIC = b"IVF1"

_UNIT_TOL = 1e-6
_ZERO_NORM = 1e-12
_KMEANS_TOL = 1e-6
_KMEANS_MAX_ITER = 100


def default_nlist(count: int) -> int:
    """Conventional list count: ceil(sqrt(corpus size))."""
    if count < 1:
        raise OutOfRangeError("corpus must be non-empty")
    return int(math.ceil(math.sqrt(count)))


def default_nprobe(nlist: int) -> int:
    """Conventional probe count: nlist/8, at least 1."""
    if nlist < 1:
        raise OutOfRangeError("nlist must be >= 1")
    return max(1, nlist // 8)


def unit_normalize(vector) -> np.ndarray:
    """L2-normalize to a read-only float32 vector."""
    v = np.asarray(vector, dtype=np.float64).reshape(-1)
    if v.size == 0:
        raise EmptyInputError("empty vector")
    if not np.all(np.isfinite(v)):
        raise OutOfRangeError("vector contains non-finite entries")
    norm = float(np.linalg.norm(v))
    if norm < _ZERO_NORM:
        raise DegenerateEmbeddingError("cannot normalize a (near-)zero vector")
    out = (v / norm).astype(np.float32)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ClipEmbedding:
    """A clip id plus its unit-norm embedding (stored float32)."""

    clip_id: str
    vector: np.ndarray

    def __post_init__(self) -> None:
        if not self.clip_id:
            raise OutOfRangeError("clip_id must be non-empty")
        if len(self.clip_id.encode("utf-8")) > 0xFFFF:
            raise OutOfRangeError("clip_id longer than 65535 bytes")
        v = np.asarray(self.vector, dtype=np.float32).reshape(-1)
        if v.size == 0:
            raise EmptyInputError("empty vector")
        norm = float(np.linalg.norm(v.astype(np.float64)))
        if abs(norm - 1.0) >= _UNIT_TOL:
            raise OutOfRangeError(f"vector for {self.clip_id!r} is not unit-norm ({norm})")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)

    @classmethod
    def from_vector(cls, clip_id: str, raw) -> "ClipEmbedding":
        """Build an embedding from an arbitrary vector, normalizing it first."""
        return cls(clip_id, unit_normalize(raw))

    @property
    def dim(self) -> int:
        return int(self.vector.size)


def temporal_average_pool(frames: Sequence) -> np.ndarray:
    """Per-dimension mean of the frame vectors, then L2-normalized."""
    if len(frames) == 0:
        raise EmptyInputError("no frames to pool")
    arr = np.asarray(frames, dtype=np.float64)
    if arr.ndim != 2:
        raise OutOfRangeError("frames must share one dimension")
    mean = arr.mean(axis=0)
    if float(np.linalg.norm(mean)) < _ZERO_NORM:
        raise DegenerateEmbeddingError("frame vectors cancel out to a zero mean")
    return unit_normalize(mean)


class Hit(NamedTuple):
    clip_id: str
    similarity: float


@dataclass(frozen=True)
class SearchResult:
    """Hits ordered by descending similarity, ties by ascending clip id."""

    hits: tuple[Hit, ...] = ()

    def ids(self) -> tuple[str, ...]:
        return tuple(h.clip_id for h in self.hits)

    def __len__(self) -> int:
        return len(self.hits)


@dataclass(frozen=True)
class InvertedList:
    """Members of one coarse cell: parallel ids and a (m, d) float32 matrix."""

    ids: tuple[str, ...]
    vectors: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.vectors, dtype=np.float32)
        if v.ndim != 2 or v.shape[0] != len(self.ids):
            raise OutOfRangeError("ids and vectors of an inverted list must align")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)


@dataclass(frozen=True)
class IvfIndex:
    """Immutable coarse-quantized index; safe for concurrent searchers."""

    centroids: np.ndarray
    lists: tuple[InvertedList, ...]

    def __post_init__(self) -> None:
        c = np.asarray(self.centroids, dtype=np.float32)
        if c.ndim != 2 or c.shape[0] != len(self.lists) or c.shape[0] < 1:
            raise OutOfRangeError("centroids must be (nlist, d) with one list each")
        for lst in self.lists:
            if lst.vectors.shape[0] and lst.vectors.shape[1] != c.shape[1]:
                raise OutOfRangeError("inverted list dimension mismatch")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "centroids", c)

    @property
    def d(self) -> int:
        return int(self.centroids.shape[1])

    @property
    def nlist(self) -> int:
        return int(self.centroids.shape[0])

    @property
    def size(self) -> int:
        return sum(len(lst.ids) for lst in self.lists)

    def embeddings(self) -> list[ClipEmbedding]:
        """Reconstruct every stored embedding (useful as an exact-search corpus)."""
        out = []
        for lst in self.lists:
            for cid, row in zip(lst.ids, lst.vectors):
                out.append(ClipEmbedding(cid, row))
        return out


def _nearest_centroid_exact(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Nearest centroid per row via per-centroid squared distances.

    Ties resolve to the lowest centroid index. This is the assignment of
    record: per-element arithmetic matches an independent per-vector scan.
    """
    n = x.shape[0]
    best = np.full(n, np.inf)
    assign = np.zeros(n, dtype=np.int64)
    for j in range(centroids.shape[0]):
        dist = ((x - centroids[j]) ** 2).sum(axis=1)
        better = dist < best
        best[better] = dist[better]
        assign[better] = j
    return assign


def _nearest_centroid_fast(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # |x-c|^2 = |x|^2 + |c|^2 - 2 x.c; only used inside Lloyd iterations.
    d2 = (
        (x**2).sum(axis=1)[:, None]
        + (centroids**2).sum(axis=1)[None, :]
        - 2.0 * (x @ centroids.T)
    )
    return np.argmin(d2, axis=1)


def _kmeans_pp_init(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n, d = x.shape
    centroids = np.empty((k, d), dtype=np.float64)
    centroids[0] = x[int(rng.integers(n))]
    d2 = ((x - centroids[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            pick = int(rng.integers(n))
        else:
            pick = int(rng.choice(n, p=d2 / total))
        centroids[j] = x[pick]
        d2 = np.minimum(d2, ((x - centroids[j]) ** 2).sum(axis=1))
    return centroids


def _kmeans(x: np.ndarray, k: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp_init(x, k, rng)
    for _ in range(_KMEANS_MAX_ITER):
        assign = _nearest_centroid_fast(x, centroids)
        sums = np.zeros_like(centroids)
        np.add.at(sums, assign, x)
        counts = np.bincount(assign, minlength=k)
        new_centroids = centroids.copy()
        filled = counts > 0
        new_centroids[filled] = sums[filled] / counts[filled, None]
        movement = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        if movement < _KMEANS_TOL:
            break
    return centroids


def build_index(embeddings: Sequence[ClipEmbedding], nlist: int, seed: int = 0) -> IvfIndex:
    """Cluster the corpus into nlist cells and fill the inverted lists.

    Deterministic for a given seed. Each embedding lands in the list of its
    nearest centroid (Euclidean, ties to the lowest centroid index); empty
    lists are legal.
    """
    count = len(embeddings)
    if nlist < 1:
        raise OutOfRangeError("nlist must be >= 1")
    if nlist > count:
        raise TooManyListsError(f"nlist={nlist} exceeds corpus size {count}")
    seen: set[str] = set()
    for e in embeddings:
        if e.clip_id in seen:
            raise DuplicateIdError(f"duplicate clip_id {e.clip_id!r}")
        seen.add(e.clip_id)
    dims = {e.dim for e in embeddings}
    if len(dims) != 1:
        raise OutOfRangeError(f"embeddings must share one dimension, got {sorted(dims)}")

    x = np.stack([e.vector for e in embeddings]).astype(np.float64)
    centroids32 = _kmeans(x, nlist, seed).astype(np.float32)
    assign = _nearest_centroid_exact(x, centroids32.astype(np.float64))

    d = x.shape[1]
    lists = []
    for j in range(nlist):
        member_idx = np.nonzero(assign == j)[0]
        ids = tuple(embeddings[int(i)].clip_id for i in member_idx)
        if member_idx.size:
            vectors = np.stack([embeddings[int(i)].vector for i in member_idx])
        else:
            vectors = np.zeros((0, d), dtype=np.float32)
        lists.append(InvertedList(ids, vectors))
    return IvfIndex(centroids32, tuple(lists))


def _row_dots(matrix: np.ndarray, q: np.ndarray) -> np.ndarray:
    # Elementwise multiply + per-row pairwise sum instead of BLAS gemv:
    # each row reduces independently of the matrix height, so identical
    # vectors always produce bitwise-identical similarities.
    return (matrix.astype(np.float64) * q).sum(axis=1)


def _ranked_hits(pairs: list[tuple[float, str]], k: int) -> SearchResult:
    pairs.sort(key=lambda item: (-item[0], item[1]))
    return SearchResult(tuple(Hit(cid, sim) for sim, cid in pairs[:k]))


def _prepare_query(query, d: int) -> np.ndarray:
    q = np.asarray(query, dtype=np.float64).reshape(-1)
    if q.size != d:
        raise OutOfRangeError(f"query dimension {q.size} does not match index d={d}")
    if not np.all(np.isfinite(q)):
        raise OutOfRangeError("query contains non-finite entries")
    norm = float(np.linalg.norm(q))
    if norm < _ZERO_NORM:
        raise DegenerateEmbeddingError("cannot search with a zero query")
    return q / norm


def search(index: IvfIndex, query, k: int, nprobe: int) -> SearchResult:
    """Top-k cosine hits from the nprobe lists nearest the query."""
    if k < 1:
        raise OutOfRangeError("k must be >= 1")
    if not 1 <= nprobe <= index.nlist:
        raise OutOfRangeError(f"nprobe={nprobe} outside [1, {index.nlist}]")
    if index.size == 0:
        return SearchResult(())
    q = _prepare_query(query, index.d)
    cd = ((index.centroids.astype(np.float64) - q) ** 2).sum(axis=1)
    probes = np.argsort(cd, kind="stable")[:nprobe]
    pairs: list[tuple[float, str]] = []
    for j in probes:
        lst = index.lists[int(j)]
        if not lst.ids:
            continue
        sims = _row_dots(lst.vectors, q)
        pairs.extend(zip((float(s) for s in sims), lst.ids))
    return _ranked_hits(pairs, k)


def exact_search(embeddings: Sequence[ClipEmbedding], query, k: int) -> SearchResult:
    """Full linear scan with the same ordering contract as `search`."""
    if k < 1:
        raise OutOfRangeError("k must be >= 1")
    if len(embeddings) == 0:
        return SearchResult(())
    q = _prepare_query(query, embeddings[0].dim)
    matrix = np.stack([e.vector for e in embeddings])
    sims = _row_dots(matrix, q)
    pairs = [(float(s), e.clip_id) for s, e in zip(sims, embeddings)]
    return _ranked_hits(pairs, k)


def recall_at_k(
    index: IvfIndex,
    corpus: Sequence[ClipEmbedding],
    queries: Sequence,
    k: int,
    nprobe: int,
) -> float:
    """Mean fraction of the exact top-k recovered by the probed search."""
    if len(corpus) == 0 or len(queries) == 0:
        raise EmptyInputError("recall needs a non-empty corpus and query set")
    total = 0.0
    for query in queries:
        approx = set(search(index, query, k, nprobe).ids())
        exact = set(exact_search(corpus, query, k).ids())
        total += len(approx & exact) / k
    return total / len(queries)


def stub_encode(text: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Deterministic signed feature hashing of word tokens, L2-normalized.

    Stable across runs and platforms (keyed on blake2b digests, not
    Python's randomized hash). Identical text yields identical vectors.
    """
    if dim < 1:
        raise OutOfRangeError("dim must be >= 1")
    if not text or not text.strip():
        raise EmptyInputError("text is empty")
    tokens = tokenize(text)
    if not tokens:
        raise EmptyInputError("text has no word tokens")
    acc = np.zeros(dim, dtype=np.float64)
    for token in tokens:
        value = int.from_bytes(
            hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest(), "little"
        )
        bucket = value % dim
        sign = 1.0 if (value >> 63) & 1 == 0 else -1.0
        acc[bucket] += sign
    if float(np.linalg.norm(acc)) < _ZERO_NORM:
        raise DegenerateEmbeddingError("token hashes cancelled out")
    return unit_normalize(acc)


class TextEncoder(Protocol):
    """Seam for the production text encoder; `dim` must match the index."""

    dim: int

    def encode(self, text: str) -> np.ndarray: ...


@dataclass(frozen=True)
class HashingTextEncoder:
    """Deterministic in-process encoder backed by `stub_encode`."""

    dim: int = DEFAULT_DIM

    def encode(self, text: str) -> np.ndarray:
        return stub_encode(text, self.dim)


@dataclass(frozen=True)
class RemoteTextEncoder:
    """Adapter for an external encoder service.

    Wire contract: POST {"text": ...}, expect 200 with
    {"embedding": [dim numbers]}. The vector is re-normalized locally.
    """

    endpoint: str
    dim: int = DEFAULT_DIM
    timeout_ms: float = 2000.0

    def encode(self, text: str) -> np.ndarray:
        if not text or not text.strip():
            raise EmptyInputError("text is empty")
        try:
            response = httpx.post(
                self.endpoint, json={"text": text}, timeout=self.timeout_ms / 1000.0
            )
        except httpx.TransportError as exc:
            raise RemoteTimeoutError(f"encoder at {self.endpoint} unreachable: {exc}") from exc
        if response.status_code != 200:
            raise MalformedPayloadError(f"encoder returned HTTP {response.status_code}")
        try:
            payload = response.json()
        except ValueError as exc:
            raise MalformedPayloadError("encoder response is not JSON") from exc
        if not isinstance(payload, dict) or "embedding" not in payload:
            raise MalformedPayloadError('encoder response missing "embedding"')
        values = payload["embedding"]
        if not isinstance(values, list) or len(values) != self.dim:
            raise MalformedPayloadError(f"expected {self.dim} embedding values")
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
            raise MalformedPayloadError("embedding values must all be numbers")
        return unit_normalize(np.asarray(values, dtype=np.float64))


def _write_record(fh: BinaryIO, clip_id: str, vector: np.ndarray) -> None:
    id_bytes = clip_id.encode("utf-8")
    fh.write(struct.pack("<H", len(id_bytes)))
    fh.write(id_bytes)
    fh.write(np.ascontiguousarray(vector, dtype="<f4").tobytes())


def _read_exact(fh: BinaryIO, size: int) -> bytes:
    data = fh.read(size)
    if len(data) != size:
        raise FileFormatError("unexpected end of file")
    return data


def _read_record(fh: BinaryIO, d: int) -> tuple[str, np.ndarray]:
    (id_len,) = struct.unpack("<H", _read_exact(fh, 2))
    clip_id = _read_exact(fh, id_len).decode("utf-8")
    vector = np.frombuffer(_read_exact(fh, 4 * d), dtype="<f4").copy()
    return clip_id, vector


def write_embeddings(path: str, embeddings: Sequence[ClipEmbedding]) -> None:
    """Write the ingest file: magic EMB1, u32 d, u32 count, then records."""
    if len(embeddings) == 0:
        raise EmptyInputError("nothing to write")
    d = embeddings[0].dim
    with open(path, "wb") as fh:
        fh.write(EMBEDDING_MAGIC)
        fh.write(struct.pack("<II", d, len(embeddings)))
        for e in embeddings:
            if e.dim != d:
                raise OutOfRangeError("embeddings must share one dimension")
            _write_record(fh, e.clip_id, e.vector)


def read_embeddings(path: str) -> list[ClipEmbedding]:
    """Read an ingest file back into validated embeddings (bit-exact)."""
    with open(path, "rb") as fh:
        if _read_exact(fh, 4) != EMBEDDING_MAGIC:
            raise FileFormatError(f"{path}: not an embedding ingest file")
        d, count = struct.unpack("<II", _read_exact(fh, 8))
        out = []
        for _ in range(count):
            clip_id, vector = _read_record(fh, d)
            out.append(ClipEmbedding(clip_id, vector))
        if fh.read(1):
            raise FileFormatError(f"{path}: trailing bytes after {count} records")
    return out


def save_index(path: str, index: IvfIndex) -> None:
    """Write the snapshot: magic IVF1, u32 d, u32 nlist, centroids, lists."""
    with open(path, "wb") as fh:
        fh.write(INDEX_MAGIC)
        fh.write(struct.pack("<II", index.d, index.nlist))
        fh.write(np.ascontiguousarray(index.centroids, dtype="<f4").tobytes())
        for lst in index.lists:
            fh.write(struct.pack("<I", len(lst.ids)))
            for cid, row in zip(lst.ids, lst.vectors):
                _write_record(fh, cid, row)


def load_index(path: str) -> IvfIndex:
    """Read a snapshot; member vectors are re-validated as unit-norm."""
    with open(path, "rb") as fh:
        if _read_exact(fh, 4) != INDEX_MAGIC:
            raise FileFormatError(f"{path}: not an index snapshot")
        d, nlist = struct.unpack("<II", _read_exact(fh, 8))
        if d < 1 or nlist < 1:
            raise FileFormatError(f"{path}: bad header (d={d}, nlist={nlist})")
        centroids = np.frombuffer(_read_exact(fh, 4 * d * nlist), dtype="<f4")
        centroids = centroids.reshape(nlist, d).copy()
        lists = []
        for _ in range(nlist):
            (length,) = struct.unpack("<I", _read_exact(fh, 4))
            ids = []
            rows = np.zeros((length, d), dtype=np.float32)
            for i in range(length):
                clip_id, vector = _read_record(fh, d)
                ids.append(clip_id)
                rows[i] = vector
            if length:
                norms = np.linalg.norm(rows.astype(np.float64), axis=1)
                if np.any(np.abs(norms - 1.0) >= _UNIT_TOL):
                    raise FileFormatError(f"{path}: stored vector is not unit-norm")
            lists.append(InvertedList(tuple(ids), rows))
        if fh.read(1):
            raise FileFormatError(f"{path}: trailing bytes after {nlist} lists")
    return IvfIndex(centroids, tuple(lists))
