import numpy as np
import pytest

from capsec.bodies import Ball, BodyError, Ellipsoid, VPolytope, cube
from capsec.functional import RejectedInstanceError
from capsec.solver import (
    CriticalPair,
    SolverConfig,
    TheoremReport,
    certify,
    grid_census,
    solve,
)


def angle(a, b):
    return np.arccos(min(1.0, abs(float(np.dot(a, b)))))


class TestConfig:
    def test_defaults_resolve(self):
        cfg = SolverConfig()
        assert cfg.resolved_starts(3) == 192

    def test_invalid_mode(self):
        with pytest.raises(BodyError):
            SolverConfig(mode="sideways")

    def test_invalid_tolerances(self):
        with pytest.raises(BodyError):
            SolverConfig(residual_tol=0.0)
        with pytest.raises(BodyError):
            SolverConfig(dedup_angle=-1.0)

    def test_too_few_starts(self):
        with pytest.raises(BodyError):
            SolverConfig(starts=2).resolved_starts(3)


@pytest.fixture(scope="module")
def report():
    K = Ball(2.0, 3)
    L = Ellipsoid.from_semiaxes([1.0, 0.7, 0.4])
    return solve(K, L, SolverConfig(starts=96, seed=1))


class TestEllipsoidInBall:
    """Ellipsoid with distinct semiaxes inside a ball: the critical directions
    are exactly the three coordinate axes (min, saddle, max)."""

    def test_three_axis_pairs(self, report):
        assert len(report.pairs) == 3
        dirs = sorted(int(np.argmax(np.abs(p.direction))) for p in report.pairs)
        assert dirs == [0, 1, 2]
        for p in report.pairs:
            e = np.zeros(3)
            e[np.argmax(np.abs(p.direction))] = 1.0
            assert angle(p.direction, e) < 1e-6

    def test_certified(self, report):
        assert report.certified
        assert not report.budget_exhausted
        assert certify(report, 3)

    def test_kinds(self, report):
        # cap volume is smallest along the long axis and largest along the short one
        kinds = [p.kind for p in report.pairs]
        assert kinds[0] == "min"
        assert kinds[-1] == "max"
        assert "saddle" in kinds

    def test_residuals_and_criticality(self, report):
        for p in report.pairs:
            assert p.residual <= 1e-7
            assert np.linalg.norm(p.centroid - p.touch_point) <= 1e-6

    def test_f_values_sorted(self, report):
        fs = [p.f_value for p in report.pairs]
        assert fs == sorted(fs)

    def test_canonical_representatives(self, report):
        for p in report.pairs:
            nz = p.direction[np.abs(p.direction) > 1e-9]
            assert nz[0] > 0


class TestContinuum:
    def test_ball_in_ball_flagged(self):
        report = solve(Ball(1.0, 3), Ball(0.4, 3), SolverConfig(starts=48, seed=2))
        assert report.degenerate_continuum
        assert report.certified
        assert "constant" in report.continuum_justification
        assert certify(report, 3)


class TestSquareAndDisk:
    def test_four_pairs_match_grid_oracle(self):
        K = cube(1.0, 2)
        L = Ball(0.5, 2)
        report = solve(K, L, SolverConfig(starts=64, seed=3))
        census = grid_census(K, L, resolution=4000)
        assert len(report.pairs) == len(census) == 4
        for p in report.pairs:
            assert min(angle(p.direction, z) for z, _ in census) < 1e-6
        # axes are maxima of the cap volume, diagonals are minima
        for p in report.pairs:
            if abs(abs(p.direction[0]) - abs(p.direction[1])) < 1e-6:
                assert p.kind == "min"
            else:
                assert p.kind == "max"


class TestDeterminism:
    def test_identical_reports(self):
        from capsec.reporting import dump_report

        K = cube(1.0, 2)
        L = Ellipsoid.from_semiaxes([0.6, 0.4])
        cfg = SolverConfig(starts=48, seed=7)
        a = dump_report(K, L, solve(K, L, cfg), seed=7)
        b = dump_report(K, L, solve(K, L, cfg), seed=7)
        assert a == b

    def test_seed_changes_starts_not_answers(self):
        K = Ball(2.0, 2)
        L = Ellipsoid.from_semiaxes([1.0, 0.5])
        r1 = solve(K, L, SolverConfig(starts=48, seed=1))
        r2 = solve(K, L, SolverConfig(starts=48, seed=99))
        assert len(r1.pairs) == len(r2.pairs)
        for p, q in zip(r1.pairs, r2.pairs):
            assert angle(p.direction, q.direction) < 1e-6


class TestMonotonicity:
    def test_descent_trace_decreases(self):
        from capsec.functional import default_margin
        from capsec.solver import _gradient_stage

        K = cube(1.0, 2)
        L = Ellipsoid.from_semiaxes([0.7, 0.3])
        cfg = SolverConfig()
        stats = {"iterations": 0, "degenerate_rejections": 0}
        rng = np.random.default_rng(20)
        for _ in range(5):
            z0 = rng.normal(size=2)
            z0 /= np.linalg.norm(z0)
            trace = []
            _gradient_stage(K, L, z0, +1.0, cfg, default_margin(K), stats, trace=trace)
            assert all(b <= a + 1e-15 for a, b in zip(trace, trace[1:]))
            trace = []
            _gradient_stage(K, L, z0, -1.0, cfg, default_margin(K), stats, trace=trace)
            assert all(b >= a - 1e-15 for a, b in zip(trace, trace[1:]))


class TestCertify:
    def make_report(self, npairs, dim, exhausted=False, continuum=False):
        pairs = [
            CriticalPair(
                direction=np.eye(dim)[i % dim],
                f_value=float(i),
                residual=1e-9,
                centroid=np.zeros(dim),
                touch_point=np.zeros(dim),
            )
            for i in range(npairs)
        ]
        return TheoremReport(
            dimension=dim,
            pairs=pairs,
            certified=continuum or npairs >= dim,
            budget_exhausted=exhausted,
            degenerate_continuum=continuum,
        )

    def test_enough_pairs(self):
        assert certify(self.make_report(3, 3), 3)

    def test_too_few_pairs(self):
        assert not certify(self.make_report(2, 3, exhausted=True), 3)

    def test_continuum_counts(self):
        assert certify(self.make_report(0, 3, exhausted=True, continuum=True), 3)


class TestValidationUpfront:
    def test_rejects_bad_instance(self):
        with pytest.raises(RejectedInstanceError):
            solve(Ball(1.0, 2), cube(0.4, 2))
        with pytest.raises(RejectedInstanceError):
            solve(Ball(1.0, 2), Ball(2.0, 2))


class TestGridCensus:
    def test_dimension_guard(self):
        with pytest.raises(BodyError):
            grid_census(Ball(1.0, 4), Ball(0.5, 4))

    def test_ellipsoid_axes_2d(self):
        K = Ball(2.0, 2)
        L = Ellipsoid.from_semiaxes([1.0, 0.5])
        census = grid_census(K, L, resolution=2000)
        assert len(census) == 2
        for z, res in census:
            assert res <= 1e-7
            assert min(angle(z, np.array([1.0, 0.0])), angle(z, np.array([0.0, 1.0]))) < 1e-6

    def test_ellipsoid_axes_3d(self):
        K = Ball(2.0, 3)
        L = Ellipsoid.from_semiaxes([1.0, 0.7, 0.4])
        census = grid_census(K, L, resolution=700)
        assert len(census) == 3
        found = sorted(int(np.argmax(np.abs(z))) for z, _ in census)
        assert found == [0, 1, 2]

    def test_polytope_outer_2d(self):
        # regular hexagon outer body: 6 critical pairs (vertices + edge normals)
        theta = np.pi / 3 * np.arange(6)
        K = VPolytope(1.5 * np.column_stack([np.cos(theta), np.sin(theta)]))
        census = grid_census(K, Ball(0.5, 2), resolution=6000)
        assert len(census) == 6
