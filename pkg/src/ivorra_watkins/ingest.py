"""Curve data (modular degree, Manin constant, rank) from CSV or an optional HTTP source."""
from __future__ import annotations

import csv
import json
import os
import urllib.request
from pathlib import Path

from .watkins import CurveData, WatkinsError

REQUIRED = ("label", "a", "b", "modular_degree", "manin_constant", "rank")
URL_ENV = "IVORRA_WATKINS_DATA_URL"
CACHE_ENV = "IVORRA_WATKINS_CACHE"


class IngestError(OSError):
    pass


def _row_to_data(row: dict, provenance: str) -> CurveData:
    try:
        rank = row.get("rank")
        return CurveData(
            label=row["label"].strip(),
            a=int(row["a"]),
            b=int(row["b"]),
            modular_degree=int(row["modular_degree"]),
            manin_constant=int(row["manin_constant"]),
            rank=int(rank) if rank not in (None, "") else None,
            provenance=provenance,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, WatkinsError):
            raise
        raise WatkinsError(f"malformed curve row {row!r}: {exc}") from None


def read_csv(path: str | Path) -> list[CurveData]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.DictReader(fh)
            missing = [c for c in REQUIRED if c not in (reader.fieldnames or [])]
            if missing:
                raise WatkinsError(f"{path}: missing columns {missing}")
            return [_row_to_data(row, f"csv:{path.name}:{row['label']}") for row in reader]
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc


class CurveDatabase:
    """Rows indexed by Weierstrass coefficients, not by label."""

    def __init__(self, rows: list[CurveData]):
        self.rows = list(rows)
        self._by_ab: dict[tuple[int, int], CurveData] = {}
        for r in self.rows:
            self._by_ab.setdefault((r.a, r.b), r)

    @classmethod
    def from_csv(cls, path) -> "CurveDatabase":
        return cls(read_csv(path))

    def lookup(self, a: int, b: int) -> CurveData | None:
        return self._by_ab.get((a, b))


def _cache_dir() -> Path:
    base = os.environ.get(CACHE_ENV) or os.path.join(Path.home(), ".cache", "ivorra_watkins")
    return Path(base)


def fetch(label: str, base_url: str | None = None, cache: Path | None = None, timeout: float = 10.0) -> CurveData:
    """GET {base_url}/curve/{label}; responses are cached on disk by label."""
    base_url = base_url or os.environ.get(URL_ENV)
    if not base_url:
        raise IngestError(f"no data URL: pass one or set {URL_ENV}")
    cache = cache or _cache_dir()
    path = cache / f"{label}.json"
    if path.exists():
        payload = json.loads(path.read_text())
    else:
        url = f"{base_url.rstrip('/')}/curve/{label}"
        try:
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                payload = json.loads(resp.read().decode())
        except (OSError, ValueError) as exc:
            raise IngestError(f"fetching {url} failed: {exc}") from exc
        cache.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, sort_keys=True))
    payload.setdefault("label", label)
    return _row_to_data(payload, f"http:{base_url}:{label}")
