import json

import numpy as np
import pytest

from theta_doubler import cache
from theta_doubler.errors import CacheFormatError
from theta_doubler.ff import make_field


def test_roundtrip(S23, F5, chi23, tmp_path):
    name = cache.key(23, 5, chi23, F5, S23.prec, 3)
    cache.save(S23, tmp_path, name, 3)
    back = cache.load(tmp_path, name, F5, chi23)
    assert back.dim == S23.dim and back.formula_dim == S23.formula_dim
    assert np.array_equal(back.matrix, S23.matrix)
    assert tuple(back.basis.pivots) == tuple(S23.basis.pivots)


def test_missing_entry_is_none(F5, chi23, tmp_path):
    assert cache.load(tmp_path, "nothing", F5, chi23) is None


def test_key_separates_fields(chi23):
    assert cache.key(23, 5, chi23, make_field(5), 40, 3) != cache.key(23, 5, chi23, make_field(5, 2), 40, 3)


def test_mismatched_field_rejected(S23, F5, chi23, tmp_path):
    name = "entry"
    cache.save(S23, tmp_path, name, 3)
    F25 = make_field(5, 2)
    with pytest.raises(CacheFormatError):
        cache.load(tmp_path, name, F25, chi23.with_ctx(F25))


def test_corrupt_entry_rejected(S23, F5, chi23, tmp_path):
    base = cache.save(S23, tmp_path, "entry", 3)
    side = json.loads((tmp_path / "entry.json").read_text())
    side["header"]["format"] = 999
    (tmp_path / "entry.json").write_text(json.dumps(side))
    with pytest.raises(CacheFormatError):
        cache.load(tmp_path, "entry", F5, chi23)
    (tmp_path / "entry.npz").write_bytes(b"junk")
    with pytest.raises(CacheFormatError):
        cache.load(tmp_path, "entry", F5, chi23)


def test_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("THETA_DOUBLER_CACHE", str(tmp_path / "c"))
    assert cache.cache_dir() == tmp_path / "c"
    assert cache.cache_dir(tmp_path / "d") == tmp_path / "d"
