import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diskspec import (
    DomainError,
    NotCertifiedError,
    RangeError,
    SearchBudget,
    candidate_points,
    extend,
    min_gap,
    search_maximal,
    seed_pair,
    verify_configuration,
)
from diskspec.geometry import Configuration
from diskspec.search import canonical_key, canonical_points

import oracles


class TestBudget:
    @pytest.mark.parametrize("kw", [
        dict(max_nodes=0, r_max=5, tol=1e-9),
        dict(max_nodes=10, r_max=5, tol=0),
        dict(max_nodes=10, r_max=-1, tol=1e-9),
        dict(max_nodes=10, r_max=5, tol=1e-9, target_size=1),
    ])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            SearchBudget(**kw)

    def test_r_max_below_first_zero(self, table):
        with pytest.raises(DomainError):
            search_maximal(1, SearchBudget(10, 0.5, 1e-9), table)

    def test_r_max_beyond_table(self, table):
        with pytest.raises(RangeError):
            search_maximal(1, SearchBudget(10, table.r_max + 1, 1e-9), table)


class TestSeedPair:
    def test_first(self, table):
        cfg = seed_pair(1, table)
        r1 = table.r(1)
        assert [tuple(p) for p in cfg.points] == [(-r1 / 2, 0.0), (r1 / 2, 0.0)]
        assert cfg.certified

    @pytest.mark.parametrize("n", [1, 5, 40])
    def test_gap(self, table, n):
        assert min_gap(seed_pair(n, table).points) == pytest.approx(table.r(n), abs=1e-15)

    def test_out_of_range(self, table):
        with pytest.raises(RangeError):
            seed_pair(table.n_max + 1, table)


class TestCandidates:
    def test_brute_force_count(self, table):
        seed = seed_pair(1, table)
        radii = table.r_zeros[table.r_zeros <= 5]
        brute = oracles.brute_force_candidates(*seed.points, radii.tolist(), seed.tol)
        assert len(candidate_points(seed, table, 5.0)) == len(brute)

    def test_admissible_to_generators(self, table):
        seed = seed_pair(1, table)
        cands = candidate_points(seed, table, 2.0)
        assert cands
        for c in cands:
            cfg = verify_configuration(seed.points + (c,), table, 1e-9)
            assert cfg.certified

    def test_sorted_and_separated(self, table):
        cands = candidate_points(seed_pair(2, table), table, 6.0)
        keys = [(round(p.x, 9), round(p.y, 9)) for p in cands]
        assert keys == sorted(keys)
        arr = np.array(cands)
        d = np.hypot(*(arr[:, None, :] - arr[None, :, :]).transpose(2, 0, 1))
        assert d[np.triu_indices(len(arr), 1)].min() > 2e-9

    def test_three_members_use_three_pairs(self, table):
        seed = seed_pair(1, table)
        triple = extend(seed, table, 1e-9, 2.0)[0]
        cands = candidate_points(triple, table, 2.0)
        own = {tuple(p) for p in candidate_points(seed, table, 2.0)}
        assert len(cands) > len(own) - 1
        assert all(tuple(p) not in {tuple(q) for q in triple.points} for p in cands)

    def test_requires_certified(self, table):
        bad = Configuration(((0.0, 0.0), (0.3, 0.0)), 1e-9, False, ())
        with pytest.raises(NotCertifiedError):
            candidate_points(bad, table)


class TestExtend:
    def test_seed_extends_to_all_candidates(self, table):
        seed = seed_pair(1, table)
        assert len(extend(seed, table, 1e-9, 3.0)) == len(candidate_points(seed, table, 3.0))

    def test_triple_survivors_certified(self, table):
        triple = extend(seed_pair(1, table), table, 1e-3, 5.0)[3]
        cands = candidate_points(triple, table, 5.0)
        out = extend(triple, table, 1e-3, 5.0)
        assert len(out) <= len(cands)
        for cfg in out:
            assert verify_configuration(cfg.points, table, 1e-3).certified

    def test_loose_tolerance_finds_four(self, table):
        sizes = [search_maximal(n, SearchBudget(10 ** 6, 20, 1e-3), table).best_size for n in (1, 2, 3)]
        assert max(sizes) >= 4

    def test_tight_tolerance_outcome(self, table):
        # recorded finding at desk scale: no 4-point configuration at 1e-9
        sizes = [search_maximal(n, SearchBudget(10 ** 6, 20, 1e-9), table).best_size for n in (1, 2, 3)]
        assert sizes == [3, 3, 3]


@pytest.fixture(scope="module")
def report(table):
    return search_maximal(1, SearchBudget(10 ** 6, 10, 1e-6), table)


class TestSearch:
    def test_triples_exist(self, report):
        assert report.best_size >= 3
        assert not report.truncated

    def test_histogram_matches_candidates(self, table, report):
        seed = seed_pair(1, table, 1e-6)
        assert report.size_histogram[3] == len(candidate_points(seed, table, 10))
        assert report.size_histogram[2] == 1
        assert sum(report.size_histogram.values()) == report.nodes_expanded

    def test_soundness_independent(self, report):
        for cfg in report.best:
            assert oracles.reverify(cfg.points, report.tol)

    def test_equal_sizes_and_canonical(self, report):
        assert len({c.size for c in report.best}) == 1
        keys = [canonical_key(c.points) for c in report.best]
        assert keys == sorted(set(keys))
        for c in report.best:
            assert canonical_points(c.points) == c.points

    def test_workers_identical(self, table, report):
        assert search_maximal(1, SearchBudget(10 ** 6, 10, 1e-6), table, workers=3) == report

    def test_truncation(self, table):
        rep = search_maximal(3, SearchBudget(50, 20, 1e-3), table)
        assert rep.truncated
        assert rep.nodes_expanded <= 50
        again = search_maximal(3, SearchBudget(50, 20, 1e-3), table, workers=2)
        assert again == rep

    def test_target_size(self, table):
        rep = search_maximal(3, SearchBudget(10 ** 6, 20, 1e-3, target_size=4), table)
        full = search_maximal(3, SearchBudget(10 ** 6, 20, 1e-3), table)
        assert rep.best_size >= 4
        assert rep.nodes_expanded < full.nodes_expanded

    def test_monotone_in_tol(self, table):
        sets = {}
        for tol in (1e-9, 1e-6, 1e-3):
            rep = search_maximal(2, SearchBudget(10 ** 6, 12, tol), table)
            sets[tol] = rep
        for cfg in sets[1e-9].best:
            assert verify_configuration(cfg.points, table, 1e-6).certified
            assert verify_configuration(cfg.points, table, 1e-3).certified
        assert sets[1e-9].best_size <= sets[1e-6].best_size <= sets[1e-3].best_size


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.floats(-9, 9), st.floats(-9, 9)), min_size=1, max_size=6))
def test_canonicalization_idempotent(pts):
    once = canonical_points(pts)
    assert canonical_points(once) == once
    flipped = [(-x, y) for x, y in pts]
    assert canonical_key(flipped) == canonical_key(pts)
