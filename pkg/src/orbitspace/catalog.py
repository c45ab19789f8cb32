"""Orbit catalogs: file formats, distance matrices and nearest-neighbour queries.

CSV catalogs need the header ``id,a,ecc,inc_deg,raan_deg,argp_deg``; JSON
catalogs are a list of objects with the same keys (or an object with a
``records`` list). Angles are degrees on disk and radians in memory.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import DEFAULT_KAPPA2, KeplerElements, OrbitError, elements_to_orbit
from .metrics import MetricSpec, parse_exponent, rho_many, rho_star_many

COLUMNS = ("id", "a", "ecc", "inc_deg", "raan_deg", "argp_deg")
SIG_DIGITS = 12


class CatalogError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        lines = "; ".join(f"line {ln}: {msg}" for ln, msg in self.problems)
        super().__init__(f"invalid catalog ({len(self.problems)} problem(s)): {lines}")


@dataclass(frozen=True)
class CatalogRecord:
    """One catalog entry.

    ``angles_deg`` keeps the (inc, raan, argp) degrees read from disk so that
    saving a loaded catalog writes back the same numbers; degree-radian
    conversion alone is only exact to an ulp or so.
    """

    id: str
    elements: KeplerElements
    kappa2: float = DEFAULT_KAPPA2
    angles_deg: tuple = field(default=None, compare=False, repr=False)

    @property
    def orbit(self):
        return elements_to_orbit(self.elements, self.kappa2)

    def row(self):
        el = self.elements
        if self.angles_deg is not None:
            inc, raan, argp = self.angles_deg
        else:
            inc, raan, argp = (math.degrees(x) for x in (el.inc, el.raan, el.argp))
        return {"id": self.id, "a": el.a, "ecc": el.ecc, "inc_deg": inc, "raan_deg": raan, "argp_deg": argp}


def _record_from_fields(fields, kappa2):
    try:
        values = {k: float(fields[k]) for k in COLUMNS[1:]}
    except (TypeError, ValueError) as exc:
        raise OrbitError(f"non-numeric field ({exc})") from None
    el = KeplerElements(
        values["a"],
        values["ecc"],
        math.radians(values["inc_deg"]),
        math.radians(values["raan_deg"]),
        math.radians(values["argp_deg"]),
    )
    rid = str(fields["id"]).strip()
    if not rid:
        raise OrbitError("empty id")
    angles = (values["inc_deg"], values["raan_deg"], values["argp_deg"])
    return CatalogRecord(rid, el, kappa2, angles)


def _infer_format(path, fmt):
    if fmt:
        return fmt.lower()
    suffix = Path(str(path)).suffix.lower()
    return "json" if suffix == ".json" else "csv"


def parse_catalog(text, fmt="csv", kappa2=DEFAULT_KAPPA2, skip_bad=False):
    problems = []
    records = []
    if fmt == "csv":
        reader = csv.DictReader(io.StringIO(text))
        header = reader.fieldnames or []
        missing = [c for c in COLUMNS if c not in header]
        if missing:
            raise CatalogError([(1, f"missing columns: {', '.join(missing)}")])
        rows = [(reader.line_num, row) for row in reader]
    elif fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CatalogError([(exc.lineno, f"malformed JSON: {exc.msg}")]) from None
        if isinstance(data, dict):
            kappa2 = float(data.get("kappa2", kappa2))
            data = data.get("records", [])
        if not isinstance(data, list):
            raise CatalogError([(1, "expected a list of records")])
        rows = []
        for i, obj in enumerate(data, start=1):
            if not isinstance(obj, dict) or any(c not in obj for c in COLUMNS):
                problems.append((i, "record misses required keys"))
                continue
            rows.append((i, obj))
    else:
        raise ValueError(f"unknown catalog format {fmt!r}")

    seen = set()
    for line, fields in rows:
        try:
            rec = _record_from_fields(fields, kappa2)
        except OrbitError as exc:
            problems.append((line, str(exc)))
            continue
        if rec.id in seen:
            problems.append((line, f"duplicate id {rec.id!r}"))
            continue
        seen.add(rec.id)
        records.append(rec)
    if problems and not skip_bad:
        raise CatalogError(problems)
    return records, problems


def load_catalog(path, fmt=None, kappa2=DEFAULT_KAPPA2, skip_bad=False):
    """Read a catalog file; malformed rows fail the load unless ``skip_bad``."""
    fmt = _infer_format(path, fmt)
    text = Path(path).read_text()
    return parse_catalog(text, fmt, kappa2, skip_bad)[0]


def dump_catalog(records, fmt="csv"):
    rows = [r.row() for r in records]
    if fmt == "json":
        return json.dumps(rows, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def save_catalog(records, path, fmt=None):
    Path(path).write_text(dump_catalog(records, _infer_format(path, fmt)))


def resolve_threads(threads=None):
    if threads in (None, ""):
        threads = os.environ.get("ORBITS_THREADS", "auto")
    if str(threads).lower() == "auto":
        return os.cpu_count() or 1
    n = int(threads)
    if n < 1:
        raise ValueError("threads must be a positive integer or 'auto'")
    return n


@dataclass(frozen=True)
class RunConfig:
    kappa2: float = DEFAULT_KAPPA2
    metric: str = "rho"
    p: float = 2.0
    n_u: int = 512
    n_s: int = 256
    refine_tol: float = 1e-10
    seed: int = 42
    threads: object = None
    spec: MetricSpec = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.metric not in ("rho", "rho_star"):
            raise ValueError(f"metric must be 'rho' or 'rho_star', got {self.metric!r}")
        object.__setattr__(self, "p", parse_exponent(self.p))
        object.__setattr__(self, "spec", MetricSpec(self.p, self.n_u, self.n_s, self.refine_tol))

    @property
    def p_label(self):
        return "inf" if math.isinf(self.p) else format(self.p, "g")


def _distances(o1s, o2s, config):
    fn = rho_many if config.metric == "rho" else rho_star_many
    return fn(o1s, o2s, config.spec)


def distance_matrix(records, config=None):
    """Symmetric matrix of pairwise distances with zero diagonal.

    The upper triangle is split into contiguous blocks evaluated on a thread
    pool; each entry depends only on its own pair, so the result does not
    depend on the thread count.
    """
    config = config or RunConfig()
    n = len(records)
    orbits = [r.orbit for r in records]
    iu, ju = np.triu_indices(n, 1)
    out = np.zeros((n, n))
    if len(iu) == 0:
        return out
    threads = resolve_threads(config.threads)
    blocks = np.array_split(np.arange(len(iu)), max(1, min(threads * 4, len(iu))))

    def work(block):
        try:
            res = _distances([orbits[i] for i in iu[block]], [orbits[j] for j in ju[block]], config)
        except (OrbitError, ValueError) as exc:
            k = block[0]
            raise OrbitError(f"pair ({records[iu[k]].id}, {records[ju[k]].id}): {exc}") from exc
        return block, [r.value for r in res]

    with ThreadPoolExecutor(max_workers=threads) as pool:
        for block, values in pool.map(work, blocks):
            out[iu[block], ju[block]] = values
    out[ju, iu] = out[iu, ju]
    return out


def _index(records, rid):
    for i, r in enumerate(records):
        if r.id == rid:
            return i
    raise KeyError(f"unknown id {rid!r}")


def pair_distance(records, id_a, id_b, config=None):
    """Distance between two catalog records, evaluated in catalog order like the matrix."""
    config = config or RunConfig()
    i, j = _index(records, id_a), _index(records, id_b)
    if i == j:
        return 0.0
    i, j = min(i, j), max(i, j)
    return _distances([records[i].orbit], [records[j].orbit], config)[0].value


def nearest(records, query_id, k, config=None):
    """The ``k`` closest records to ``query_id`` as ``(id, distance)``.

    Distances equal to 12 significant digits are ties and go to the smaller id.
    """
    config = config or RunConfig()
    q = _index(records, query_id)
    if not 1 <= k < len(records):
        raise ValueError(f"k must lie in [1, {len(records) - 1}], got {k}")
    others = [i for i in range(len(records)) if i != q]
    # evaluate each pair in catalog order so values match the matrix exactly
    lo = [min(q, i) for i in others]
    hi = [max(q, i) for i in others]
    res = _distances([records[i].orbit for i in lo], [records[i].orbit for i in hi], config)
    # rank at the printed precision so that rounding-level differences count as ties
    ranked = sorted((_fmt(r.value), records[i].id, r.value) for r, i in zip(res, others))
    return [(rid, value) for _, rid, value in ranked[:k]]


def _fmt(v):
    return float(format(float(v), f".{SIG_DIGITS}g"))


def matrix_to_json(ids, matrix, config):
    payload = {
        "metric": config.metric,
        "p": config.p_label,
        "seed": config.seed,
        "kappa2": config.kappa2,
        "ids": list(ids),
        "matrix": [[_fmt(v) for v in row] for row in np.asarray(matrix)],
    }
    return json.dumps(payload) + "\n"


def matrix_to_csv(ids, matrix):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", *ids])
    for rid, row in zip(ids, np.asarray(matrix)):
        writer.writerow([rid, *(format(float(v), f".{SIG_DIGITS}g") for v in row)])
    return buf.getvalue()


def random_catalog(n, seed=42, kappa2=DEFAULT_KAPPA2):
    """Seeded synthetic catalog (a in [0.5, 2], ecc < 0.9)."""
    from .sampling import random_elements

    rng = np.random.default_rng(seed)
    return [CatalogRecord(f"obj{i:04d}", random_elements(rng), kappa2) for i in range(n)]
