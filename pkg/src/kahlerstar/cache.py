"""On-disk cache of enumerated graph classes, one versioned JSON file per (n, k).

The directory comes from the ``--cache-dir`` flag, else the ``KAHLERSTAR_CACHE``
environment variable, else ``~/.cache/kahlerstar``. Files are written to a
temporary name and renamed into place, so readers never see a partial file.
A file whose format version differs from the current one is regenerated.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .enumeration import enumerate_graphs
from .graphs import CANONICAL_VERSION, CanonicalForm, Graph, automorphism_count, canonical_form, total_weight

FORMAT_VERSION = f"graphs-1/{CANONICAL_VERSION}"
ENV_VAR = "KAHLERSTAR_CACHE"


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "kahlerstar"


@dataclass(frozen=True)
class CacheEntry:
    n: int
    k: int
    forms: tuple[CanonicalForm, ...]
    automorphisms: tuple[int, ...]
    external_degrees: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def key(self) -> tuple[int, int, str]:
        return self.n, self.k, FORMAT_VERSION

    def graphs(self) -> list[Graph]:
        return [f.to_graph() for f in self.forms]

    def max_external_degree(self) -> list[int]:
        """Largest total degree of each external vertex over the class."""
        best = [0] * self.n
        for degrees in self.external_degrees:
            for i, (a, b) in enumerate(degrees):
                best[i] = max(best[i], a + b)
        return best

    def to_json(self) -> dict:
        return {
            "format": FORMAT_VERSION,
            "n": self.n,
            "k": self.k,
            "count": len(self.forms),
            "max_external_degree": self.max_external_degree(),
            "graphs": [
                {"form": str(f), "aut": a, "external_degrees": [list(d) for d in degs]}
                for f, a, degs in zip(self.forms, self.automorphisms, self.external_degrees)
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CacheEntry":
        if data.get("format") != FORMAT_VERSION:
            raise ValueError(f"cache format {data.get('format')!r} != {FORMAT_VERSION!r}")
        graphs = data["graphs"]
        return cls(
            int(data["n"]),
            int(data["k"]),
            tuple(CanonicalForm(g["form"].encode()) for g in graphs),
            tuple(int(g["aut"]) for g in graphs),
            tuple(tuple(tuple(d) for d in g["external_degrees"]) for g in graphs),
        )


def build_entry(n: int, k: int) -> CacheEntry:
    graphs = enumerate_graphs(n, k)
    return CacheEntry(
        n,
        k,
        tuple(canonical_form(g) for g in graphs),
        tuple(automorphism_count(g) for g in graphs),
        tuple(tuple((g.in_degrees[v], g.out_degrees[v]) for v in range(n)) for g in graphs),
    )


def serialize(entry: CacheEntry) -> bytes:
    return (json.dumps(entry.to_json(), sort_keys=True, separators=(",", ":")) + "\n").encode()


class GraphCache:
    def __init__(self, directory: str | Path | None = None, enabled: bool = True):
        self.directory = Path(directory) if directory is not None else default_cache_dir()
        self.enabled = enabled

    def path(self, n: int, k: int) -> Path:
        tag = FORMAT_VERSION.replace("/", "_")
        return self.directory / f"A_n{n}_k{k}.{tag}.json"

    def load(self, n: int, k: int) -> CacheEntry | None:
        if not self.enabled:
            return None
        path = self.path(n, k)
        try:
            entry = CacheEntry.from_json(json.loads(path.read_text()))
        except (OSError, ValueError, KeyError, TypeError):
            return None
        if entry.n != n or entry.k != k:
            return None
        return entry

    def store(self, entry: CacheEntry) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.path(entry.n, entry.k)
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(serialize(entry))
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        return path

    def get(self, n: int, k: int) -> CacheEntry:
        """Cached entry, regenerated and stored when missing or stale."""
        entry = self.load(n, k)
        if entry is None:
            entry = build_entry(n, k)
            if self.enabled:
                self.store(entry)
        return entry


def entry_weight_check(entry: CacheEntry) -> bool:
    """Every cached form decodes to a graph of the recorded total weight."""
    return all(total_weight(g) == entry.k for g in entry.graphs())
