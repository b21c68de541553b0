import itertools
import math

import numpy as np
import pytest

from tspdual.errors import TourDoesNotFixCityOne
from tspdual.formulation import build_formulation, encode_tour, objective
from tspdual.instance import Tour, random_euclidean_instance
from tspdual.reduction import (
    build_index_map,
    embed_tour,
    extract_tour,
    reduce_formulation,
    reduced_objective,
    reduced_to_dict,
)


def tours_fixing_city_one(n):
    for rest in itertools.permutations(range(2, n + 1)):
        yield Tour((1,) + rest)


class TestReduce:
    def test_n4_matches_closed_forms(self, distinct_d4):
        r = reduce_formulation(build_formulation(distinct_d4))
        d1 = distinct_d4.entries[0, 1:]
        d2 = distinct_d4.entries[1:, 1:]
        z = np.zeros((3, 3))
        assert np.array_equal(r.A_r, np.block([[z, d2, z], [d2, z, d2], [z, d2, z]]))
        assert np.array_equal(r.b_r, np.concatenate([-d1, np.zeros(3), -d1]))
        expected_E = np.array(
            [
                [1, 1, 1, 0, 0, 0, 0, 0, 0],
                [0, 0, 0, 1, 1, 1, 0, 0, 0],
                [0, 0, 0, 0, 0, 0, 1, 1, 1],
                [1, 0, 0, 1, 0, 0, 1, 0, 0],
                [0, 1, 0, 0, 1, 0, 0, 1, 0],
            ],
            dtype=float,
        )
        assert np.array_equal(r.E_r, expected_E)

    def test_c0_zero(self):
        for n in (3, 4, 5):
            d, _ = random_euclidean_instance(n, n + 20)
            r = reduce_formulation(build_formulation(d))
            assert r.c0 == 0.0

    def test_reduced_matrix_shape_and_symmetry(self):
        d, _ = random_euclidean_instance(5, 2)
        r = reduce_formulation(build_formulation(d))
        assert r.A_r.shape == (16, 16)
        assert r.E_r.shape == (7, 16)
        assert np.max(np.abs(r.A_r - r.A_r.T)) == 0.0
        assert not np.diag(r.A_r).any()

    def test_E_r_row_sums(self):
        for n in (3, 4, 5, 6):
            d, _ = random_euclidean_instance(n, n)
            r = reduce_formulation(build_formulation(d))
            sums = r.E_r.sum(axis=1)
            assert np.all(sums == n - 1)

    def test_E_r_full_row_rank(self):
        for n in (3, 4, 5, 6):
            d, _ = random_euclidean_instance(n, n)
            r = reduce_formulation(build_formulation(d))
            assert np.linalg.matrix_rank(r.E_r) == 2 * n - 3

    def test_permutation_preserves_quadratic_form(self):
        d, _ = random_euclidean_instance(4, 6)
        f = build_formulation(d)
        idx = build_index_map(4)
        A_hat = f.A[np.ix_(idx.perm, idx.perm)]
        rng = np.random.default_rng(7)
        for _ in range(100):
            x = rng.normal(size=16)
            assert x @ f.A @ x == pytest.approx(
                x[idx.perm] @ A_hat @ x[idx.perm], rel=1e-13
            )


class TestEmbedTour:
    def test_identity_tour(self):
        idx = build_index_map(4)
        y = embed_tour(idx, Tour((1, 2, 3, 4)))
        assert list(y) == [1, 0, 0, 0, 1, 0, 0, 0, 1]

    def test_spec_indices(self):
        idx = build_index_map(4)
        y = embed_tour(idx, Tour((1, 3, 4, 2)))
        # reduced components 2, 6, 7 (1-based)
        assert list(np.nonzero(y)[0]) == [1, 5, 6]

    def test_rejects_unfixed_tour(self):
        idx = build_index_map(4)
        with pytest.raises(TourDoesNotFixCityOne):
            embed_tour(idx, Tour((2, 1, 3, 4)))

    def test_constraints_satisfied(self):
        for n in (3, 4, 5):
            d, _ = random_euclidean_instance(n, n)
            r = reduce_formulation(build_formulation(d))
            for t in tours_fixing_city_one(n):
                y = embed_tour(r.map, t)
                assert np.array_equal(r.E_r @ y, np.ones(2 * n - 3))
                assert np.array_equal(y * y, y)

    def test_extract_inverts_embed(self):
        idx = build_index_map(5)
        for t in tours_fixing_city_one(5):
            assert extract_tour(idx, embed_tour(idx, t)) == t


class TestReducedObjective:
    def test_zero_vector(self, unit_square):
        r = reduce_formulation(build_formulation(unit_square))
        assert reduced_objective(r, np.zeros(9)) == 0.0

    def test_unit_square_identity_tour(self, unit_square):
        r = reduce_formulation(build_formulation(unit_square))
        y = embed_tour(r.map, Tour((1, 2, 3, 4)))
        assert reduced_objective(r, y) == 4.0

    def test_objective_preserved_exhaustively(self):
        for n in (3, 4, 5):
            for seed in range(3):
                d, _ = random_euclidean_instance(n, seed)
                f = build_formulation(d)
                r = reduce_formulation(f)
                for t in tours_fixing_city_one(n):
                    full = objective(f, encode_tour(t))
                    red = reduced_objective(r, embed_tour(r.map, t)) + r.c0
                    assert red == pytest.approx(full, abs=1e-12)


def test_reduced_to_dict_round_trips(unit_square):
    r = reduce_formulation(build_formulation(unit_square))
    payload = reduced_to_dict(r)
    assert payload["n"] == 4
    assert payload["c0"] == 0.0
    assert np.array_equal(np.array(payload["A_r"]), r.A_r)
    assert np.array_equal(np.array(payload["E_r"]), r.E_r)
