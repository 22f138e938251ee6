import pytest

from comcache.topology import SERVER_COST, TopologyError, build, build_grid, tile_blocks


def test_grid_2x2_shape():
    topo = build_grid(2, 2, 10, 1, 0.2)
    assert topo.node_count == 4
    assert len(topo.links) == 4
    for i in range(4):
        assert len(topo.neighbors(i)) == 2


def test_grid_1x1_isolated():
    topo = build_grid(1, 1, 10, 1, 0.2)
    assert topo.node_count == 1
    assert topo.links == ()
    assert topo.neighbors(0) == ()


def test_grid_4x4_edge_count():
    # Count grid edges by brute-force enumeration over node pairs.
    rows = cols = 4
    expected = 0
    for r in range(rows):
        for c in range(cols):
            expected += (c + 1 < cols) + (r + 1 < rows)
    topo = build_grid(rows, cols, 10, 1, 0.2)
    assert expected == 24
    assert len(topo.links) == expected


def test_grid_edge_count_formula():
    for rows, cols in [(1, 5), (3, 3), (4, 7), (10, 10)]:
        topo = build_grid(rows, cols, 5, 1, 0.1)
        assert len(topo.links) == rows * (cols - 1) + cols * (rows - 1)


def test_neighbors_corner_and_interior():
    topo = build_grid(4, 4, 10, 1, 0.2)
    assert topo.neighbors(0) == (1, 4)
    assert topo.neighbors(5) == (1, 4, 6, 9)


def test_neighbor_symmetry():
    topo = build_grid(5, 3, 4, 2, 0.3)
    for i in range(topo.node_count):
        for j in topo.neighbors(i):
            assert i in topo.neighbors(j)


def test_zero_bandwidth_links_keep_adjacency_but_not_service():
    topo = build_grid(2, 2, 10, 0, 0.2)
    assert topo.neighbors(0) == (1, 2)
    assert topo.usable_neighbors(0) == ()


def test_build_grid_deterministic():
    a = build_grid(3, 4, 7, 2, 0.25)
    b = build_grid(3, 4, 7, 2, 0.25)
    assert a.capacities == b.capacities
    assert a.links == b.links


def test_serve_order_cheapest_first():
    # Node 0 linked to 1 (cost 0.5) and 2 (cost 0.1): 2 served first.
    topo = build([5, 5, 5], [(0, 1, 1, 0.5), (0, 2, 1, 0.1)])
    assert topo.serve_order(0) == (2, 1)


def test_rejects_bad_arguments():
    with pytest.raises(TopologyError):
        build_grid(0, 3, 10, 1, 0.2)
    with pytest.raises(TopologyError):
        build_grid(2, 2, 10, 1, 1.0)  # link cost must stay below the server cost
    with pytest.raises(TopologyError):
        build_grid(2, 2, 0, 1, 0.2)
    with pytest.raises(TopologyError):
        build([5, 5], [(0, 0, 1, 0.1)])  # self link
    with pytest.raises(TopologyError):
        build([5, 5], [(0, 1, 1, 0.1), (1, 0, 1, 0.1)])  # duplicate link
    with pytest.raises(TopologyError):
        build_grid(2, 2, 10, 1, 0.2).neighbors(9)


def test_server_cost_is_normalization_maximum():
    assert SERVER_COST == 1.0
    topo = build_grid(2, 2, 10, 1, 0.99)
    assert all(ln.cost < SERVER_COST for ln in topo.links)


def test_heterogeneous_capacities_supported():
    topo = build([3, 8, 5], [(0, 1, 2, 0.2), (1, 2, 1, 0.4)])
    assert topo.capacities == (3, 8, 5)
    assert topo.link(0, 1).bandwidth == 2


def test_tile_blocks_even_and_odd():
    assert tile_blocks(2, 2) == [(0, 1, 2, 3)]
    blocks = tile_blocks(4, 4)
    assert len(blocks) == 4
    assert blocks[0] == (0, 1, 4, 5)
    # Odd dimension: smaller edge blocks, every node exactly once.
    blocks = tile_blocks(3, 3)
    covered = sorted(i for b in blocks for i in b)
    assert covered == list(range(9))


def test_grid_roundtrip_dict():
    topo = build_grid(2, 3, 6, 1, 0.2)
    d = topo.to_dict()
    assert d["grid"]["rows"] == 2
    assert d["grid"]["cols"] == 3
