"""Keyed isometric template protection and nearest-centroid classification.

A client extracts a feature vector (template) from each sample, multiplies it
by a secret orthogonal matrix derived from their key, and ships only the
protected vectors. Orthogonal maps preserve Euclidean geometry, so a server
holding no keys can still run distance-based learning on the protected
vectors and reach exactly the decisions it would have reached in the clear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .images import ImageBuffer
from .keystream import TAG_TEMPLATE, MasterKey, StepStream

_LUMA = (0.299, 0.587, 0.114)
_RANK_TOL = 1e-12


@dataclass(frozen=True)
class Template:
    values: np.ndarray
    client_id: int
    label: int | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("template values must form a non-empty 1-d vector")
        if not np.isfinite(vals).all():
            raise ValueError("template values must be finite")
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class ProtectedTemplate:
    values: np.ndarray
    client_id: int
    label: int | None = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("protected values must form a non-empty 1-d vector")
        object.__setattr__(self, "values", vals)

    @property
    def dim(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class CentroidModel:
    class_ids: tuple[int, ...]
    centroids: np.ndarray  # (n_classes, d)


def _grid_shape(d: int, height: int, width: int) -> tuple[int, int]:
    """Most nearly square (rows, cols) with rows*cols = d that fits the image."""
    feasible = [
        (a, d // a) for a in range(1, d + 1) if d % a == 0 and a <= height and d // a <= width
    ]
    if not feasible:
        raise ValueError(f"cannot partition a {height}x{width} image into {d} cells")
    def rank(pair):
        a, b = pair
        skew = abs(a - b)
        # prefer more rows on tall images, more cols on wide ones
        return (skew, -a if height >= width else a)
    return min(feasible, key=rank)


def extract_template(sample: ImageBuffer, d: int, client_id: int = 0,
                     label: int | None = None) -> Template:
    """Baseline extractor: mean intensity of each cell in a near-square grid
    of d cells over the grayscale image, scaled to [0, 1]."""
    if d < 1:
        raise ValueError("dimension must be positive")
    h, w = sample.height, sample.width
    if d > h * w:
        raise ValueError(f"dimension {d} exceeds pixel count {h * w}")
    data = sample.data.astype(np.float64)
    if sample.channels == 3:
        gray = data @ np.asarray(_LUMA)
    else:
        gray = data[:, :, 0]
    rows, cols = _grid_shape(d, h, w)
    row_bounds = [h * i // rows for i in range(rows + 1)]
    col_bounds = [w * j // cols for j in range(cols + 1)]
    values = np.empty(d)
    for i in range(rows):
        for j in range(cols):
            cell = gray[row_bounds[i]:row_bounds[i + 1], col_bounds[j]:col_bounds[j + 1]]
            values[i * cols + j] = cell.mean() / 255.0
    return Template(values, client_id, label)


def _gaussian_draws(stream: StepStream, count: int) -> np.ndarray:
    """Standard normals via Box-Muller on consecutive 64-bit draws, each draw
    mapped to (0, 1) as (draw + 1) / 2**64."""
    out = np.empty(count + count % 2)
    for i in range(0, out.size, 2):
        u1 = (stream.next_u64() + 1) / 2.0**64
        u2 = (stream.next_u64() + 1) / 2.0**64
        r = math.sqrt(-2.0 * math.log(u1))
        out[i] = r * math.cos(2.0 * math.pi * u2)
        out[i + 1] = r * math.sin(2.0 * math.pi * u2)
    return out[:count]


@lru_cache(maxsize=256)
def _cached_orthogonal(key: MasterKey, d: int) -> np.ndarray:
    if d < 1:
        raise ValueError("dimension must be positive")
    tag = TAG_TEMPLATE
    while True:
        stream = StepStream.for_step(key, tag)
        m = _gaussian_draws(stream, d * d).reshape(d, d)
        q = np.empty((d, d))
        ok = True
        for j in range(d):
            v = m[:, j].copy()
            for i in range(j):
                v -= (q[:, i] @ v) * q[:, i]
            norm = float(np.linalg.norm(v))
            if norm < _RANK_TOL:
                ok = False
                break
            col = v / norm
            if col[j] < 0:
                col = -col
            q[:, j] = col
        if ok:
            q.setflags(write=False)
            return q
        tag += 1


def orthogonal_matrix(key: MasterKey, d: int) -> np.ndarray:
    """Deterministic keyed orthogonal d x d matrix.

    Fills a matrix with keyed Gaussian draws row-major, then orthonormalizes
    by modified Gram-Schmidt, columns left to right, flipping each column so
    its diagonal entry is non-negative. A rank-deficient draw retries with
    the next derivation tag. Matrices are cached per (key, dimension).
    """
    return _cached_orthogonal(key, d).copy()


def protect_template(t: Template, key: MasterKey) -> ProtectedTemplate:
    q = _cached_orthogonal(key, t.dim)
    return ProtectedTemplate(q @ t.values, t.client_id, t.label)


def enroll(templates: list[ProtectedTemplate]) -> CentroidModel:
    if not templates:
        raise ValueError("cannot enroll an empty template set")
    d = templates[0].dim
    groups: dict[int, list[np.ndarray]] = {}
    for t in templates:
        if t.label is None:
            raise ValueError("enrollment requires labeled templates")
        if t.dim != d:
            raise ValueError("all templates must share one dimension")
        groups.setdefault(t.label, []).append(t.values)
    if len(groups) < 2:
        raise ValueError("enrollment requires at least two classes")
    class_ids = tuple(sorted(groups))
    centroids = np.stack([np.mean(groups[cid], axis=0) for cid in class_ids])
    return CentroidModel(class_ids, centroids)


def classify(query: ProtectedTemplate, model: CentroidModel) -> tuple[int, float]:
    """Nearest centroid by Euclidean distance; ties go to the lowest class id."""
    if not model.class_ids:
        raise ValueError("model has no classes")
    if query.dim != model.centroids.shape[1]:
        raise ValueError("query dimension does not match the model")
    dists = np.linalg.norm(model.centroids - query.values[None, :], axis=1)
    idx = int(np.argmin(dists))  # first minimum = lowest class id (ids sorted)
    return model.class_ids[idx], float(dists[idx])


# ---------------------------------------------------------------------------
# CSV interchange


def format_template_csv(templates) -> str:
    """Serialize templates (plain or protected) with round-trip fidelity."""
    if not templates:
        raise ValueError("nothing to serialize")
    d = templates[0].dim
    header = "client_id,label," + ",".join(f"v{i}" for i in range(d))
    lines = [header]
    for t in templates:
        if t.dim != d:
            raise ValueError("all templates must share one dimension")
        label = "" if t.label is None else str(t.label)
        vals = ",".join(f"{v:.17g}" for v in t.values)
        lines.append(f"{t.client_id},{label},{vals}")
    return "\n".join(lines) + "\n"


def parse_template_csv(text: str, protected: bool = False):
    """Parse the template CSV format; returns Template or ProtectedTemplate rows."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty template CSV")
    header = lines[0].split(",")
    if header[:2] != ["client_id", "label"] or len(header) < 3:
        raise ValueError("template CSV must start with client_id,label,v0,...")
    d = len(header) - 2
    cls = ProtectedTemplate if protected else Template
    out = []
    for ln in lines[1:]:
        fields = ln.split(",")
        if len(fields) != d + 2:
            raise ValueError(f"row has {len(fields)} fields, expected {d + 2}")
        client_id = int(fields[0])
        label = int(fields[1]) if fields[1] != "" else None
        values = np.asarray([float(x) for x in fields[2:]])
        out.append(cls(values, client_id, label))
    return out
