"""Content-addressed on-disk cache for intersection lattices.

Files are keyed by a hash of (spec serialization, level, max_codim) and hold
one element per line in canonical serialization, together with one witnessing
provenance per element.  A payload checksum is stored alongside; a mismatch
or parse failure makes the loader report a miss so the caller recomputes.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from pathlib import Path

from .arrangement import ArrangementSpec, IntersectionLattice, build_lattice
from .exactlin import Subspace
from .fim import Injection, MultiIndex

_MAGIC = "arrstab-lattice v1"
_SUFFIX = ".lattice.txt"


def lattice_key(spec: ArrangementSpec, level: MultiIndex, max_codim: int) -> str:
    payload = f"{spec.serialize()}\n{level.render()}\n{max_codim}"
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _render_witness(witness) -> str:
    return "&".join(f"g{gi}@{f.render()}" for gi, f in witness)


def _parse_witness(text: str, level: MultiIndex):
    out = []
    if not text:
        return tuple(out)
    for chunk in text.split("&"):
        head, _, body = chunk.partition("@")
        out.append((int(head[1:]), Injection.parse(body, level)))
    return tuple(out)


def _payload_lines(lat: IntersectionLattice) -> list[str]:
    return [
        f"{element.serialize()}\t{_render_witness(witness)}"
        for element, witness in zip(lat.elements, lat.provenance)
    ]


def _payload_hash(lines: list[str]) -> str:
    return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()


def store(cache_dir: Path | str, spec: ArrangementSpec, lat: IntersectionLattice) -> Path:
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    key = lattice_key(spec, lat.level, lat.max_codim)
    lines = _payload_lines(lat)
    header = [
        _MAGIC,
        f"level={lat.level.render()}",
        f"max_codim={lat.max_codim}",
        f"r={lat.r}",
        f"count={len(lines)}",
        f"payload-sha256={_payload_hash(lines)}",
    ]
    text = "\n".join(header + lines) + "\n"
    target = cache_dir / f"{key}{_SUFFIX}"
    # atomic replace keeps concurrent writers of identical content safe
    fd, tmp_name = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp_name, target)
    finally:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
    return target


def load(
    cache_dir: Path | str,
    spec: ArrangementSpec,
    level: MultiIndex,
    max_codim: int,
) -> IntersectionLattice | None:
    """Return the cached lattice, or None on miss or detected corruption."""
    path = Path(cache_dir) / f"{lattice_key(spec, level, max_codim)}{_SUFFIX}"
    if not path.is_file():
        return None
    try:
        raw = path.read_text(encoding="utf-8").splitlines()
        if raw[0] != _MAGIC:
            return None
        meta = dict(line.split("=", 1) for line in raw[1:6])
        if (
            MultiIndex.parse(meta["level"]) != level
            or int(meta["max_codim"]) != max_codim
            or int(meta["r"]) != spec.r
        ):
            return None
        count = int(meta["count"])
        lines = raw[6 : 6 + count]
        if len(lines) != count or _payload_hash(lines) != meta["payload-sha256"]:
            return None
        elements = []
        provenance = []
        for line in lines:
            serial, _, witness = line.partition("\t")
            elements.append(Subspace.parse(serial))
            provenance.append(_parse_witness(witness, level))
        return IntersectionLattice(level, max_codim, spec.r, elements, provenance)
    except (ValueError, KeyError, IndexError):
        return None


class CachingBuilder:
    """Lattice builder with an in-memory memo and optional disk persistence."""

    def __init__(self, cache_dir: Path | str | None = None):
        self.cache_dir = Path(cache_dir) if cache_dir is not None else None
        self._memo: dict[tuple[str, MultiIndex, int], IntersectionLattice] = {}

    def __call__(
        self, spec: ArrangementSpec, level: MultiIndex, max_codim: int
    ) -> IntersectionLattice:
        key = (spec.serialize(), level, max_codim)
        lat = self._memo.get(key)
        if lat is not None:
            return lat
        if self.cache_dir is not None:
            lat = load(self.cache_dir, spec, level, max_codim)
        if lat is None:
            lat = build_lattice(spec, level, max_codim)
            if self.cache_dir is not None:
                store(self.cache_dir, spec, lat)
        self._memo[key] = lat
        return lat


def clean(cache_dir: Path | str) -> int:
    """Remove all lattice cache files; returns how many were deleted."""
    cache_dir = Path(cache_dir)
    if not cache_dir.is_dir():
        return 0
    removed = 0
    for path in sorted(cache_dir.glob(f"*{_SUFFIX}")):
        path.unlink()
        removed += 1
    return removed
