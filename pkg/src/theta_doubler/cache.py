"""On-disk cache of ModFormSpace bases.

One entry is a ``.npz`` with the echelon matrix, pivots and recipe
transform, plus a JSON sidecar holding the header and the candidate
recipe.  Writes are serialized with a per-entry file lock.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np
from filelock import FileLock

from .characters import DirichletChar
from .eisbasis import Candidate, ModFormSpace, Recipe
from .errors import CacheFormatError
from .ff import FieldCtx
from .qseries import Basis

FORMAT = 1


def cache_dir(override: str | os.PathLike | None = None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get("THETA_DOUBLER_CACHE")
    if env:
        return Path(env)
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "theta_doubler"


def key(N: int, k: int, chi: DirichletChar, ctx: FieldCtx, prec: int, max_factors: int) -> str:
    raw = f"{FORMAT}|{N}|{k}|{chi.label}|{ctx.label}|{prec}|{max_factors}"
    return f"M{k}_N{N}_p{ctx.p}r{ctx.r}_" + hashlib.sha256(raw.encode()).hexdigest()[:16]


def _header(space: ModFormSpace, max_factors: int) -> dict:
    return {
        "format": FORMAT,
        "N": space.N,
        "k": space.k,
        "chi": space.chi.label,
        "field": space.ctx.label,
        "p": space.ctx.p,
        "r": space.ctx.r,
        "prec": space.prec,
        "dim": space.dim,
        "formula_dim": space.formula_dim,
        "max_factors": max_factors,
        "stats": {k: v for k, v in space.stats.items() if isinstance(v, (int, float, str))},
    }


def save(space: ModFormSpace, directory: Path, name: str, max_factors: int) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    base = directory / name
    with FileLock(str(base) + ".lock"):
        rec = space.recipe
        np.savez_compressed(
            str(base) + ".npz",
            matrix=space.matrix.astype(np.int16 if space.ctx.q < 2**15 else np.int64),
            pivots=np.asarray(space.basis.pivots, dtype=np.int64),
            transform=rec.transform if rec is not None else np.zeros((0, 0), dtype=np.int64),
        )
        side = {
            "header": _header(space, max_factors),
            "recipe": None
            if rec is None
            else {"work_label": rec.work_label, "work_r": rec.work_r, "candidates": [c.to_json() for c in rec.candidates]},
            "excluded": list(space.excluded),
        }
        Path(str(base) + ".json").write_text(json.dumps(side, indent=1))
    return base


def load(directory: Path, name: str, ctx: FieldCtx, chi: DirichletChar) -> ModFormSpace | None:
    base = directory / name
    npz, side = Path(str(base) + ".npz"), Path(str(base) + ".json")
    if not (npz.exists() and side.exists()):
        return None
    with FileLock(str(base) + ".lock"):
        try:
            meta = json.loads(side.read_text())
            arr = np.load(npz)
            M = arr["matrix"].astype(np.int64)
            piv = tuple(int(x) for x in arr["pivots"])
            T = arr["transform"].astype(np.int64)
        except (OSError, ValueError, KeyError) as exc:
            raise CacheFormatError(f"unreadable cache entry {base}: {exc}") from exc
    h = meta.get("header", {})
    if h.get("format") != FORMAT or h.get("field") != ctx.label or h.get("chi") != chi.label:
        raise CacheFormatError(f"cache entry {base} does not match the request")
    if M.shape[0] != len(piv) or h.get("dim") != len(piv):
        raise CacheFormatError(f"cache entry {base} is inconsistent")
    r = meta.get("recipe")
    recipe = None if r is None else Recipe(r["work_label"], int(r["work_r"]), [Candidate.from_json(c) for c in r["candidates"]], T)
    stats = dict(h.get("stats", {}))
    return ModFormSpace(h["N"], h["k"], chi.with_ctx(ctx), ctx, Basis(M, piv, ctx), h["formula_dim"], recipe, meta.get("excluded", []), stats)
