import os
import tempfile

import pytest


@pytest.fixture
def private_cache(tmp_path, monkeypatch):
    """Point the on-disk caches at a throwaway directory."""
    monkeypatch.setenv("INVLEN_CACHE_DIR", str(tmp_path))
    import involution_lengths.exact_series as es
    monkeypatch.setattr(es, "_DEFAULT_CACHE", None)
    return tmp_path
