import pytest

from src.exact_cover import BitmaskCoverSolver, ExactCoverSolver


class TestExactCoverSolver:
    def test_classic_instance(self):
        rows = {
            'A': [1, 4, 7],
            'B': [1, 4],
            'C': [4, 5, 7],
            'D': [3, 5, 6],
            'E': [2, 3, 6, 7],
            'F': [2, 7],
        }
        solution = ExactCoverSolver(rows, primary=range(1, 8)).solve()
        assert sorted(solution) == ['B', 'D', 'F']

    def test_no_solution(self):
        rows = {'A': [1, 2], 'B': [2, 3]}
        assert ExactCoverSolver(rows, primary=[1, 2, 3]).solve() is None

    def test_first_solution_is_deterministic(self):
        rows = {'A': [1], 'B': [2], 'C': [1, 2]}
        first = ExactCoverSolver(rows, primary=[1, 2]).solve()
        second = ExactCoverSolver(dict(reversed(list(rows.items()))), primary=[1, 2]).solve()
        assert first == second == ['A', 'B']

    def test_secondary_columns_at_most_once(self):
        rows = {'A': [1, 9], 'B': [2, 9], 'C': [2]}
        solution = ExactCoverSolver(rows, primary=[1, 2], secondary=[9]).solve()
        assert sorted(solution) == ['A', 'C']

    def test_secondary_columns_may_stay_empty(self):
        rows = {'A': [1], 'B': [1, 9]}
        assert ExactCoverSolver(rows, primary=[1], secondary=[9]).solve() == ['A']

    def test_uncoverable_primary_column(self):
        rows = {'A': [1]}
        assert ExactCoverSolver(rows, primary=[1, 2]).solve() is None

    def test_node_counter(self):
        solver = ExactCoverSolver({'A': [1], 'B': [2]}, primary=[1, 2])
        assert solver.solve() is not None
        assert solver.nodes == 2

    @pytest.mark.parametrize('n', [2, 3, 4])
    def test_dominoes_on_a_strip(self, n):
        rows = {i: [i, i + 1] for i in range(2 * n - 1)}
        solution = ExactCoverSolver(rows, primary=range(2 * n)).solve()
        assert solution == list(range(0, 2 * n, 2))


class TestBitmaskCoverSolver:
    def test_classic_instance(self):
        rows = {
            'A': [0, 3, 6],
            'B': [0, 3],
            'C': [3, 4, 6],
            'D': [2, 4, 5],
            'E': [1, 2, 5, 6],
            'F': [1, 6],
        }
        assert sorted(BitmaskCoverSolver(rows, 7).solve()) == ['B', 'D', 'F']

    def test_agrees_with_algorithm_x(self):
        rows = {i: [i % 9, (i * 4 + 1) % 9] for i in range(12)}
        for extra in range(4):
            rows[100 + extra] = [extra, extra + 5]
        bitmask = BitmaskCoverSolver(rows, 9).solve()
        algorithm_x = ExactCoverSolver(rows, primary=range(9)).solve()
        assert (bitmask is None) == (algorithm_x is None)

    def test_start_rows_are_kept(self):
        rows = {'A': [0], 'B': [1], 'C': [0, 1]}
        assert BitmaskCoverSolver(rows, 2).solve(start=['C']) == ['C']
        assert BitmaskCoverSolver(rows, 2).solve(start=['A']) == ['A', 'B']

    def test_overlapping_start_rows(self):
        rows = {'A': [0, 1], 'B': [1, 2], 'C': [2]}
        assert BitmaskCoverSolver(rows, 3).solve(start=['A', 'B']) is None

    def test_uncoverable_column(self):
        assert BitmaskCoverSolver({'A': [0]}, 2).solve() is None

    def test_repeated_column_is_an_error(self):
        with pytest.raises(ValueError):
            BitmaskCoverSolver({'A': [0, 0]}, 1)

    @pytest.mark.parametrize('n', [2, 3, 4])
    def test_dominoes_on_a_strip(self, n):
        rows = {i: [i, i + 1] for i in range(2 * n - 1)}
        assert BitmaskCoverSolver(rows, 2 * n).solve() == list(range(0, 2 * n, 2))
