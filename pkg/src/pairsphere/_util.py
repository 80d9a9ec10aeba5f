"""Small shared utilities."""

from __future__ import annotations

import os
import tempfile

import numpy as np


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file + rename so interrupted runs never leave truncated files."""
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def derive_seed(*key) -> int:
    """Stable scalar seed derived from a tuple of ints/strings."""
    ints = []
    for part in key:
        if isinstance(part, str):
            ints.extend(part.encode())
        else:
            ints.append(int(part) & 0xFFFFFFFF)
    ss = np.random.SeedSequence(ints)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_from(*key) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*key))
