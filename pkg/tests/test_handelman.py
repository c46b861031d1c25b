import math

import numpy as np
import pytest

from polymin.handelman import (
    HandelmanColumnCapError,
    PolytopeDescription,
    UnboundedPolytopeError,
    handelman_bound,
    handelman_ladder,
)
from polymin.poly import parse


@pytest.fixture
def unit_box():
    return PolytopeDescription(2, [parse("x1", 2), parse("1-x1", 2),
                                   parse("x2", 2), parse("1-x2", 2)])


@pytest.fixture
def unit_interval():
    return PolytopeDescription(1, [parse("x1", 1), parse("1-x1", 1)])


class TestHandelmanBound:
    def test_xy_on_unit_box(self, unit_box):
        # the monomial xy is itself the facet product x * y: the bound is 0
        # and the representation is forced to put weight one on that product
        hb = handelman_bound(parse("x1*x2", 2), unit_box, 2)
        assert abs(hb.value) <= 1e-8
        assert hb.coefficients[(1, 0, 1, 0)] == pytest.approx(1.0, abs=1e-6)
        others = {a: c for a, c in hb.coefficients.items() if a != (1, 0, 1, 0)}
        assert all(abs(c) <= 1e-6 for c in others.values())
        assert hb.residual <= 1e-6

    def test_constant(self, unit_box):
        hb = handelman_bound(parse("7", 2), unit_box, 2)
        assert hb.value == pytest.approx(7.0, abs=1e-6)

    def test_identity_representation(self, unit_interval):
        hb = handelman_bound(parse("x1", 1), unit_interval, 1)
        assert abs(hb.value) <= 1e-8
        assert hb.coefficients[(1, 0)] == pytest.approx(1.0, abs=1e-6)

    def test_degree_below_f_rejected(self, unit_interval):
        with pytest.raises(ValueError):
            handelman_bound(parse("x1^2", 1), unit_interval, 1)

    def test_column_cap(self, unit_box):
        with pytest.raises(HandelmanColumnCapError):
            handelman_bound(parse("x1*x2", 2), unit_box, 2, column_cap=10)

    def test_validity_sampling(self, unit_box):
        from polymin.poly import Polynomial
        rng = np.random.default_rng(12)
        monos = [(2, 0), (1, 1), (0, 2), (1, 0), (0, 1), (0, 0)]
        for seed in range(4):
            coeffs = rng.integers(-5, 6, size=6)
            f = Polynomial(2, dict(zip(monos, (int(c) for c in coeffs))))
            if f.is_zero():
                continue
            hb = handelman_bound(f, unit_box, 3)
            pts = rng.uniform(0, 1, size=(10_000, 2))
            sampled = float(np.min(f.to_float().evaluate_many(pts)))
            assert sampled >= hb.value - 1e-6 * (1 + abs(sampled))

    def test_multiplier_nonnegativity(self, unit_box):
        hb = handelman_bound(parse("x1*x2+x1", 2), unit_box, 3)
        assert all(c >= -1e-10 for c in hb.coefficients.values())


class TestHandelmanLadder:
    def test_shifted_square_ladder(self, unit_interval):
        # (x - 1/2)^2 on [0, 1]: rungs rise from -1/4 toward 0 from below
        f = parse("x1^2-x1+1/4", 1)
        ladder = handelman_ladder(f, unit_interval, 6)
        values = [b.value for b in ladder]
        assert len(values) == 5  # degrees 2..6
        assert values[0] == pytest.approx(-0.25, abs=1e-6)
        for lo, hi in zip(values, values[1:]):
            assert lo <= hi + 1e-8
        assert all(v <= 1e-8 for v in values)
        assert values[-1] >= -0.05 - 1e-8

    def test_single_rung_equals_bound(self, unit_box):
        f = parse("x1*x2", 2)
        ladder = handelman_ladder(f, unit_box, 2)
        assert len(ladder) == 1
        assert ladder[0].value == handelman_bound(f, unit_box, 2).value

    def test_xy_ladder_constant(self, unit_box):
        ladder = handelman_ladder(parse("x1*x2", 2), unit_box, 4)
        assert all(abs(b.value) <= 1e-7 for b in ladder)


class TestPolytopeDescription:
    def test_unbounded_rejected(self):
        P = PolytopeDescription(1, [parse("x1", 1)])
        with pytest.raises(UnboundedPolytopeError):
            handelman_bound(parse("x1", 1), P, 1)

    def test_degree_check(self):
        with pytest.raises(ValueError):
            PolytopeDescription(1, [parse("x1^2", 1)])

    def test_json_roundtrip(self, unit_box):
        text = unit_box.to_json()
        P = PolytopeDescription.from_json(text, n=2)
        assert P.num_facets == 4
        assert P.facets[1] == parse("1-x1", 2)

    def test_empty_set_is_fine(self):
        # an inconsistent facet list is bounded (vacuously); the LP then
        # certifies whatever it certifies without the boundedness guard firing
        P = PolytopeDescription(1, [parse("x1-2", 1), parse("-x1", 1),
                                    parse("1-x1", 1)])
        P.check_bounded()


class TestColumnEnumeration:
    def test_count_formula(self, unit_box):
        hb = handelman_bound(parse("x1*x2", 2), unit_box, 2)
        assert len(hb.coefficients) <= math.comb(4 + 2, 2)
