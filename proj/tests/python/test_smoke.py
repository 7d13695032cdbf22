# Copyright 2026 The dst-retrieval Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
"""Smoke tests of the Python bindings against independent numpy oracles."""

import numpy as np
import pytest

import dst_retrieval as dst


def log_softmax(x):
    x = x - x.max()
    return x - np.log(np.exp(x).sum())


def test_typo_kinds_and_determinism():
    assert dst.typo_kinds() == ["RandInsert", "RandDelete", "RandSub", "SwapNeighbor", "SwapAdjacent"]
    for kind in dst.typo_kinds():
        a = dst.apply_typo("mythology", kind, 5)
        assert a == dst.apply_typo("mythology", kind, 5)
        assert a != "mythology"
    assert len(dst.apply_typo("greek", "RandInsert", 1)) == 6
    assert len(dst.apply_typo("greek", "RandDelete", 1)) == 4
    with pytest.raises(ValueError):
        dst.apply_typo("greek", "Nope", 1)
    with pytest.raises(dst.DstError) as err:
        dst.apply_typo("a", "RandDelete", 1)
    assert err.value.code == "IneligibleWord"


def test_augment_queries():
    rows = dst.augment_queries([("q1", "greek goddess of agriculture"), ("q2", "capital of peru")], 3, 11)
    assert len(rows) == 6
    assert [r[1] for r in rows] == ["q1"] * 3 + ["q2"] * 3
    assert rows == dst.augment_queries([("q1", "greek goddess of agriculture"), ("q2", "capital of peru")], 3, 11)


def test_dst_loss_matches_numpy_cross_entropy():
    rng = np.random.default_rng(0)
    q, p = rng.normal(size=(3, 4)), rng.normal(size=(5, 4))
    variants = [rng.normal(size=(3, 4))]
    positives = [0, 2, 4]
    r = dst.dst_loss(q, variants, p, positives, beta=0.0, gamma=0.0)
    scores = q @ p.T
    expected = -np.mean([log_softmax(scores[i])[positives[i]] for i in range(3)])
    assert r["loss"] == pytest.approx(expected, rel=1e-12)
    assert r["grad_queries"].shape == (3, 4)
    assert r["grad_passages"].shape == (5, 4)
    assert not np.any(r["grad_variants"][0])


def test_model_index_search(tmp_path):
    model = dst.Model.initialize(hash_buckets=512, embed_dim=8, seed=3)
    passages = [("a", "greek goddess of agriculture"), ("b", "capital city of peru"), ("c", "rice cooking")]
    index = dst.Index.build(passages, model)
    assert len(index) == 3 and index.ids == ["a", "b", "c"]
    emb = model.encode_passages([t for _, t in passages])
    np.testing.assert_array_equal(index.matrix, emb)

    q = model.encode_queries(["goddess of agriculture"])
    hits = index.search(q, k=2)[0]
    scores = emb @ q[0]
    assert [h[0] for h in hits] == [passages[i][0] for i in np.argsort(-scores)[:2]]

    model.save(tmp_path / "m.ckpt")
    index.save(tmp_path / "p.idx")
    np.testing.assert_array_equal(dst.Model.load(tmp_path / "m.ckpt").encode_queries(["x y"]),
                                  model.encode_queries(["x y"]))
    assert dst.Index.load(tmp_path / "p.idx").ids == index.ids
    with pytest.raises(dst.DstError):
        dst.Model.load(tmp_path / "missing.ckpt")


def test_evaluate_and_statistics():
    run = {"q": [("a", 0.1), ("b", 0.9), ("c", 0.5)]}
    means = dst.evaluate(run, {"q": {"c": 1}}, "mrr@10,map")
    assert means == {"mrr@10": 0.5, "map": 0.5}
    r = dst.paired_t_test([0.5, 0.7, 0.9, 0.4], [0.4, 0.5, 0.9, 0.1], comparisons=2)
    assert r["t"] == pytest.approx(2.3237900077244498, rel=1e-12)
    assert r["corrected_p"] == pytest.approx(min(1.0, 2 * r["p"]))
    grid, density, bw = map(np.asarray, dst.cosine_density([0.1, 0.2, 0.3, 0.5]))
    area = float(np.sum((density[1:] + density[:-1]) * np.diff(grid)) / 2)
    assert area == pytest.approx(1.0, abs=1e-3)
    assert dst.distribution_overlap([0.1, 0.2, 0.3], [0.1, 0.2, 0.3]) == pytest.approx(1.0, abs=1e-9)
