import numpy as np
import pytest

from aricluster import InputError, build_forest, heavy_path_cover, sort_pvalues
from aricluster.bench import (
    BenchScenario,
    gen_caterpillar,
    gen_cube,
    gen_perfect_binary_tree,
    gen_pvalues,
    run_bench,
    write_bench_csv,
    BENCH_CSV_COLUMNS,
)

from oracles import digit_sum_base2_cumulative


class TestGenPValues:
    def test_deterministic_per_seed(self):
        a = gen_pvalues(500, seed=42)
        b = gen_pvalues(500, seed=42)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, gen_pvalues(500, seed=43))

    def test_open_unit_interval(self):
        p = gen_pvalues(10000, seed=1)
        assert np.all(p > 0) and np.all(p < 1)

    def test_cube_root_is_uniform(self):
        # Kolmogorov-Smirnov statistic of p**(1/3) against U(0,1)
        p = gen_pvalues(100_000, seed=7)
        u = np.sort(np.cbrt(p))
        n = u.size
        grid_hi = np.arange(1, n + 1) / n
        grid_lo = np.arange(0, n) / n
        ks = max(np.abs(grid_hi - u).max(), np.abs(u - grid_lo).max())
        assert ks < 0.02


class TestGenCube:
    def test_single_voxel(self):
        g, spec, vov = gen_cube(1)
        assert g.m == 1 and g.edge_count == 0

    def test_k2_conn18_matches_brute_force(self):
        g, spec, _ = gen_cube(2, connectivity=18)
        # 8 voxels: 12 face pairs + 12 edge pairs
        assert g.m == 8 and g.edge_count == 24

    def test_k10_matches_smallest_family_member(self):
        g, spec, _ = gen_cube(10)
        assert g.m == 1000

    def test_budget(self):
        with pytest.raises(InputError, match="budget"):
            gen_cube(100, max_vertices=10**5)


class TestGenPerfectBinaryTree:
    def test_depth_one_is_single_vertex(self):
        g, raw = gen_perfect_binary_tree(1)
        assert g.m == 1 and g.edge_count == 0

    def test_depth_two_root_holds_largest_p(self):
        g, raw = gen_perfect_binary_tree(2)
        assert g.m == 3
        assert np.argmax(raw) == 0  # heap root

    def test_forest_reproduces_tree_shape(self):
        for depth in (2, 4, 6, 10):
            g, raw = gen_perfect_binary_tree(depth, seed=3)
            sp = sort_pvalues(raw, 0.05)
            f = build_forest(g, sp)
            tree_edges = {
                (min(a, b), max(a, b))
                for a, b in zip(g.edges_u.tolist(), g.edges_v.tolist())
            }
            forest_edges = set()
            for child in range(f.m):
                parent = int(f.parent[child])
                if parent >= 0:
                    a = int(sp.perm[child])
                    b = int(sp.perm[parent])
                    forest_edges.add((min(a, b), max(a, b)))
            assert forest_edges == tree_edges

    def test_sigma_matches_closed_form(self):
        for depth in (2, 3, 5, 8, 10):
            m = 2**depth - 1
            g, raw = gen_perfect_binary_tree(depth, seed=11)
            sp = sort_pvalues(raw, 0.05)
            f = build_forest(g, sp)
            assert heavy_path_cover(f).sigma == digit_sum_base2_cumulative(m)


class TestGenCaterpillar:
    def test_shape(self):
        g, raw = gen_caterpillar(10)
        sp = sort_pvalues(raw, 0.05)
        f = build_forest(g, sp)
        s = 5
        # spine ranks s..m-1, each with a pendant leaf; spine end adopts two
        assert f.roots.tolist() == [9]
        assert f.parent[s - 1] == s
        for j in range(s - 1):
            assert f.parent[j] == 9 - j

    def test_rejects_odd_order(self):
        with pytest.raises(InputError):
            gen_caterpillar(7)


class TestRunBench:
    def test_row_accounting(self):
        scenario = BenchScenario(family="cube", size=4, repetitions=2, seed=5)
        gammas = [0.0, 0.5, 1.0]
        rows = run_bench(scenario, gammas=gammas)
        assert len(rows) == 3 + len(gammas)
        phases = [r["phase_or_gamma"] for r in rows[:3]]
        assert phases == ["forest", "bounds", "index"]
        for row in rows:
            assert row["m"] == 64
            assert row["seconds"] >= 0
            assert set(row) == set(BENCH_CSV_COLUMNS)

    def test_output_sizes_decrease_with_gamma(self):
        scenario = BenchScenario(family="cube", size=5, repetitions=1, seed=2)
        rows = run_bench(scenario, gammas=[0.0, 0.3, 0.6, 1.0])
        sizes = [r["output_size"] for r in rows if r["output_size"] != ""]
        assert sizes == sorted(sizes, reverse=True)

    def test_csv_emission(self, tmp_path):
        scenario = BenchScenario(family="caterpillar", size=20, repetitions=1)
        rows = run_bench(scenario, gammas=[0.0])
        out = tmp_path / "bench.csv"
        write_bench_csv(rows, out)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == ",".join(BENCH_CSV_COLUMNS)
        assert len(lines) == len(rows) + 1
