"""Deterministic seed derivation for the experiment harness.

All randomness in a protocol run flows from one root seed. A child seed for
stage `s` of fold `f` in run `r` is the first word generated by
``numpy.random.SeedSequence(root, spawn_key=(r, f, s))``, which makes every
(run, fold, stage) cell independent and reproducible.
"""

from __future__ import annotations

import numpy as np

STAGE_FOLDS = 0
STAGE_INJECT_TRAIN = 1
STAGE_INJECT_TEST = 2
STAGE_G_INIT = 3
STAGE_RELIEF = 4
STAGE_TEST_IMPUTE = 5


def child_seed(root: int, *path: int) -> int:
    seq = np.random.SeedSequence(root, spawn_key=tuple(path))
    return int(seq.generate_state(1, dtype=np.uint64)[0])
