# Copyright 2026 The dst-retrieval Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
"""Typo-robust dense retrieval: typo augmentation, hashed dual encoders,
the dual self-teaching objective, exact search and evaluation."""

from ._dst_retrieval import (
    DstError,
    Index,
    Model,
    apply_typo,
    augment_queries,
    cosine_density,
    distribution_overlap,
    dst_loss,
    evaluate,
    generate_corpus,
    paired_t_test,
    run_experiment,
    typo_kinds,
)

__all__ = [
    "DstError",
    "Index",
    "Model",
    "apply_typo",
    "augment_queries",
    "cosine_density",
    "distribution_overlap",
    "dst_loss",
    "evaluate",
    "generate_corpus",
    "paired_t_test",
    "run_experiment",
    "typo_kinds",
]
__version__ = "0.1.0"
