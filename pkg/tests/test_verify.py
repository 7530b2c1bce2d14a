
from geoment.verify import (incomparability, nonconvexity_witnesses, sample_states,
                            suite_appendix, suite_families, suite_graph, suite_hierarchy,
                            suite_partition)


def failures(checks):
    return [f"{c.name}: {c.detail}" for c in checks if not c.ok]


def test_sampling_deterministic():
    a, b = sample_states((2, 2), 4, 3), sample_states((2, 2), 4, 3)
    assert all((x.matrix == y.matrix).all() for x, y in zip(a, b))
    assert [s.rank() for s in a] == [1, 2, 3, 4]


def test_hierarchy_small():
    assert failures(suite_hierarchy(samples=4, seed=7)) == []
    assert failures(suite_hierarchy(samples=2, seed=1, dims=(2, 2, 2))) == []


def test_partition_suite():
    checks = suite_partition()
    assert len(checks) >= 20 and failures(checks) == []


def test_witness_labels():
    w = nonconvexity_witnesses()
    assert set(w) == {"D1 pair", "D3 triple", "D2 pair"}


def test_graph_suite():
    assert failures(suite_graph()) == []


def test_appendix_suite_without_gt_grid():
    assert failures(suite_appendix(gt_grid=False)) == []


def test_families_suite():
    assert failures(suite_families(samples=2)) == []


def test_incomparability_checks():
    checks = incomparability()
    assert len(checks) == 8 and failures(checks) == []
