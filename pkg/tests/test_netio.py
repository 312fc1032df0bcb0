import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from netchrono.netio import (
    ParseError,
    TemporalNetwork,
    distinguishable_pairs,
    network_stats,
    normalized_positions,
    parse_edge_list,
    sample_subnetwork,
    write_edge_list,
)

DATA = Path(__file__).parent / "data"


def test_parse_basic():
    net = parse_edge_list("1\t2\t0\n2\t3\t1")
    assert net.n_nodes == 3
    assert net.n_edges == 2


def test_parse_duplicate_keeps_earliest():
    net = parse_edge_list("1\t2\t5\n2\t1\t3")
    assert net.n_edges == 1
    assert net.edges[0][2] == 3.0


def test_parse_comments_and_blanks():
    net = parse_edge_list("# header\n\na\tb\t1\n")
    assert net.n_edges == 1
    assert net.node_ids == ("a", "b")


def test_parse_rejects_self_loop():
    with pytest.raises(ParseError, match="self-loop"):
        parse_edge_list("x\tx\t1")


def test_parse_rejects_malformed_with_line_number():
    with pytest.raises(ParseError, match="line 2"):
        parse_edge_list("a\tb\t1\nbroken line here extra")
    with pytest.raises(ParseError, match="line 1"):
        parse_edge_list("a\tb\tnot-a-number")
    with pytest.raises(ParseError, match="line 1"):
        parse_edge_list("a\tb\tinf")


def test_airplane_fixture_dimensions():
    net = parse_edge_list((DATA / "airplane_like.tsv").read_text())
    assert net.n_edges == 125
    assert net.n_nodes == 48
    assert net.snapshot_count() == 5


def test_network_invariants_enforced():
    with pytest.raises(ValueError, match="self-loop"):
        TemporalNetwork(("a",), ((0, 0, 1.0),))
    with pytest.raises(ValueError, match="duplicate"):
        TemporalNetwork(("a", "b"), ((0, 1, 1.0), (1, 0, 2.0)))
    with pytest.raises(ValueError, match="non-finite"):
        TemporalNetwork(("a", "b"), ((0, 1, math.inf),))


def test_roundtrip_is_canonical():
    net = parse_edge_list("b\ta\t3\nc\ta\t1\nb\tc\t2.5")
    text = write_edge_list(net)
    again = parse_edge_list(text)
    assert write_edge_list(again) == text
    assert sorted(t for _, _, t in again.edges) == sorted(t for _, _, t in net.edges)
    # canonical writer sorts by (t, u, v)
    times = [float(line.split("\t")[2]) for line in text.strip().splitlines()]
    assert times == sorted(times)


def test_roundtrip_fixture_bit_exact():
    net = parse_edge_list((DATA / "worm_like.tsv").read_text())
    text = write_edge_list(net)
    assert write_edge_list(parse_edge_list(text)) == text


def test_distinguishable_trivial():
    net = parse_edge_list("1\t2\t0\n2\t3\t1\n1\t3\t2")
    assert distinguishable_pairs(net) == (3, 1.0)
    same = parse_edge_list("1\t2\t0\n2\t3\t0\n1\t3\t0")
    assert distinguishable_pairs(same)[0] == 0


def test_distinguishable_needs_two_edges():
    with pytest.raises(ValueError):
        distinguishable_pairs(parse_edge_list("1\t2\t0"))


def _brute_force_ed(net):
    count = 0
    for i in range(net.n_edges):
        for j in range(i + 1, net.n_edges):
            if net.edges[i][2] != net.edges[j][2]:
                count += 1
    return count


def test_distinguishable_matches_brute_force():
    rng = np.random.default_rng(3)
    for _ in range(10):
        m = int(rng.integers(2, 60))
        lines = []
        k = 0
        seen = set()
        while len(lines) < m:
            u, v = rng.integers(0, 40, size=2)
            if u == v or (min(u, v), max(u, v)) in seen:
                continue
            seen.add((min(u, v), max(u, v)))
            lines.append(f"{u}\t{v}\t{int(rng.integers(0, 5))}")
        net = parse_edge_list("\n".join(lines))
        e_d, ratio = distinguishable_pairs(net)
        assert e_d == _brute_force_ed(net)
        assert ratio == pytest.approx(e_d / (m * (m - 1) / 2))


def test_sample_full_fraction_is_identity():
    net = parse_edge_list((DATA / "airplane_like.tsv").read_text())
    for seed in (0, 1, 99):
        sub = sample_subnetwork(net, 1.0, seed)
        assert sorted(
            (net.node_ids[u], net.node_ids[v], t) for u, v, t in sub.edges
        ) == sorted((net.node_ids[u], net.node_ids[v], t) for u, v, t in net.edges)


def test_sample_half_is_subset():
    net = parse_edge_list((DATA / "airplane_like.tsv").read_text())
    sub = sample_subnetwork(net, 0.5, seed=4)
    assert sub.n_edges == 63  # ceil(0.5 * 125)
    orig = {(net.node_ids[u], net.node_ids[v], t) for u, v, t in net.edges}
    orig |= {(b, a, t) for a, b, t in orig}
    for u, v, t in sub.edges:
        assert (sub.node_ids[u], sub.node_ids[v], t) in orig


def test_sample_deterministic_and_fraction_range():
    net = parse_edge_list((DATA / "airplane_like.tsv").read_text())
    a = sample_subnetwork(net, 0.6, seed=5)
    b = sample_subnetwork(net, 0.6, seed=5)
    assert a == b
    with pytest.raises(ValueError):
        sample_subnetwork(net, 0.4, seed=0)
    with pytest.raises(ValueError):
        sample_subnetwork(net, 1.1, seed=0)


def test_hundred_distinct_samples():
    net = parse_edge_list((DATA / "worm_like.tsv").read_text())
    fractions = np.linspace(0.5, 1.0, 100)
    samples = [
        write_edge_list(sample_subnetwork(net, float(f), seed=k))
        for k, f in enumerate(fractions)
    ]
    assert len(set(samples)) == 100


def test_normalized_positions_examples():
    net = parse_edge_list("a\tb\t10\nb\tc\t20\nc\td\t30")
    assert normalized_positions(net).alpha == pytest.approx([1 / 3, 2 / 3, 1.0])
    tied = parse_edge_list("a\tb\t5\nb\tc\t5")
    assert normalized_positions(tied).alpha == pytest.approx([0.75, 0.75])
    mixed = parse_edge_list("a\tb\t3\nb\tc\t1\nc\td\t1\nd\te\t7")
    assert normalized_positions(mixed).alpha == pytest.approx([0.75, 0.375, 0.375, 1.0])


def test_normalized_positions_mean():
    net = parse_edge_list((DATA / "airplane_like.tsv").read_text())
    alpha = normalized_positions(net).alpha
    m = net.n_edges
    assert alpha.mean() == pytest.approx((m + 1) / (2 * m))


@given(
    times=st.lists(st.integers(min_value=-50, max_value=50), min_size=1, max_size=30),
    scale=st.floats(min_value=0.1, max_value=10),
    shift=st.floats(min_value=-5, max_value=5),
)
def test_normalized_positions_monotone_invariant(times, scale, shift):
    def build(ts):
        lines = [f"a{k}\tb{k}\t{t}" for k, t in enumerate(ts)]
        return parse_edge_list("\n".join(lines))

    base = normalized_positions(build(times)).alpha
    # strictly increasing transform: affine with positive slope, then cubing
    transformed = normalized_positions(build([(scale * t + shift) ** 3 for t in times])).alpha
    assert np.allclose(base, transformed)


def test_stats_schema():
    net = parse_edge_list((DATA / "worm_like.tsv").read_text())
    s = network_stats(net)
    assert s["M"] == 438
    assert s["S"] == 4
    assert s["E_d"] == 57980
    assert s["P_Ed"] == pytest.approx(0.606, abs=1e-3)
