from __future__ import annotations

import random

import numpy as np
import pytest

from oracle import apsp, lattice_points

from adlv.dbm import (
    EMPTY,
    INF,
    LE_ZERO,
    Bound,
    Constraint,
    Dbm,
    canonicalize,
    clock_constraints,
    constrain,
    dbm_init,
    extrapolate,
    first_including,
    free,
    included_in,
    includes,
    reset,
    up,
)
from adlv.expr import CmpOp


def _random_matrix(rng: random.Random, clocks: int) -> list[list[int]]:
    n = clocks + 1
    rows: list[list[int]] = []
    for i in range(n):
        row: list[int] = []
        for j in range(n):
            if i == j:
                row.append(LE_ZERO)
            elif rng.random() < 0.25:
                row.append(INF)
            else:
                row.append(Bound(rng.randint(-4, 8), rng.random() < 0.3).raw)
        rows.append(row)
    return rows


def _random_zone(rng: random.Random, clocks: int, steps: int = 4) -> Dbm:
    zone = up(dbm_init(clocks))
    for _ in range(steps):
        i = rng.randint(0, clocks)
        j = rng.randint(0, clocks)
        if i == j:
            continue
        value = rng.randint(0, 4) if j == 0 else rng.randint(-4, 4)
        zone = constrain(zone, Constraint(i, j, Bound.le(value)))
        if rng.random() < 0.3:
            zone = up(zone)
    return zone


def test_bound_order_puts_strict_first() -> None:
    assert Bound.lt(3) < Bound.le(3) < Bound.lt(4)
    assert Bound.le(2) + Bound.lt(1) == Bound.lt(3)
    assert (Bound.le(2) + Bound(None)).is_infinite
    assert str(Bound.lt(5)) == "<5"


def test_init_is_the_origin() -> None:
    zone = dbm_init(2)
    assert zone.upper(1) == Bound.le(0)
    assert zone.lower(2) == Bound.le(0)
    assert zone.describe(["x", "y"]) == ["0<=x<=0", "0<=y<=0"]


def test_up_removes_upper_bounds_only() -> None:
    zone = up(dbm_init(2))
    assert zone.upper(1).is_infinite
    assert zone.upper(2).is_infinite
    assert zone.bound(1, 2) == Bound.le(0)
    assert zone.describe(["x", "y"]) == ["0<=x", "0<=y"]


def test_closure_tightens_implied_bounds() -> None:
    direct = Dbm.from_bounds(
        [
            [Bound.le(0), Bound.le(0), Bound.le(0)],
            [Bound.le(3), Bound.le(0), Bound(None)],
            [Bound.le(10), Bound.le(2), Bound.le(0)],
        ]
    )
    closed = canonicalize(direct)
    assert closed.upper(2) == Bound.le(5)
    assert closed.upper(1) == Bound.le(3)
    assert closed.bound(2, 1) == Bound.le(2)


def test_reset_pins_clock_and_keeps_others() -> None:
    zone = constrain(up(dbm_init(2)), clock_constraints(1, CmpOp.LE, 3))
    after = reset(zone, 2)
    assert after.upper(2) == Bound.le(0)
    assert after.lower(2) == Bound.le(0)
    assert after.upper(1) == Bound.le(3)
    assert after.bound(1, 2) == Bound.le(3)
    assert after.bound(2, 1) == Bound.le(0)
    assert reset(zone, 1, 2).upper(1) == Bound.le(2)


def test_reset_rejects_negative_values() -> None:
    with pytest.raises(ValueError):
        reset(dbm_init(1), 1, -1)


def test_contradictory_constraints_give_empty() -> None:
    zone = up(dbm_init(1))
    zone = constrain(zone, clock_constraints(1, CmpOp.GE, 4))
    assert constrain(zone, clock_constraints(1, CmpOp.LT, 4)) is EMPTY
    assert constrain(zone, clock_constraints(1, CmpOp.LE, 4)).upper(1) == Bound.le(4)
    assert up(EMPTY) is EMPTY
    assert reset(EMPTY, 1) is EMPTY


def test_equality_constraint_expands_to_two_entries() -> None:
    assert len(clock_constraints(1, CmpOp.EQ, 2)) == 2
    with pytest.raises(ValueError):
        clock_constraints(1, CmpOp.NE, 2)


def test_inclusion_is_reflexive_and_respects_bounds() -> None:
    wide = up(dbm_init(1))
    narrow = constrain(wide, clock_constraints(1, CmpOp.LE, 2))
    assert includes(wide, narrow)
    assert not includes(narrow, wide)
    assert includes(narrow, narrow)
    assert includes(narrow, EMPTY)
    assert not includes(EMPTY, narrow)


def test_extrapolation_widens_beyond_max_constant() -> None:
    zone = constrain(up(dbm_init(1)), clock_constraints(1, CmpOp.EQ, 5))
    widened = extrapolate(zone, {1: 2})
    assert widened.upper(1).is_infinite
    assert widened.lower(1) == Bound.lt(-2)
    assert includes(widened, zone)
    small = constrain(up(dbm_init(1)), clock_constraints(1, CmpOp.LE, 1))
    assert extrapolate(small, {1: 2}) == small


def test_canonical_form_matches_all_pairs_shortest_paths() -> None:
    rng = random.Random(7)
    for _ in range(1000):
        matrix = _random_matrix(rng, rng.randint(1, 3))
        expected = apsp(matrix)
        closed = canonicalize(Dbm(np.array(matrix, dtype=np.int64)))
        if expected is None:
            assert closed is EMPTY
        else:
            assert closed.matrix.tolist() == expected


def test_emptiness_matches_integer_points() -> None:
    rng = random.Random(11)
    for _ in range(150):
        zone = _random_zone(rng, rng.randint(1, 3))
        assert zone.is_empty() == (not lattice_points(zone, 12))


def test_inclusion_matches_integer_points() -> None:
    rng = random.Random(13)
    for _ in range(200):
        a = _random_zone(rng, 2)
        b = _random_zone(rng, 2)
        expected = lattice_points(b, 16) <= lattice_points(a, 16)
        assert includes(a, b) == expected


def test_zones_are_immutable_values() -> None:
    zone = up(dbm_init(1))
    with pytest.raises(ValueError):
        zone.matrix[0, 0] = 5
    assert zone == up(dbm_init(1))
    assert hash(zone) == hash(up(dbm_init(1)))


def test_free_keeps_only_nonnegativity() -> None:
    zone = reset(constrain(up(dbm_init(2)), clock_constraints(1, CmpOp.LE, 3)), 2)
    freed = free(zone, 2)
    assert freed.upper(2).is_infinite
    assert freed.lower(2) == Bound.le(0)
    assert freed.upper(1) == Bound.le(3)
    assert freed.bound(1, 2) == Bound.le(3)
    assert canonicalize(freed) == freed
    assert includes(freed, zone)
    assert free(zone) is zone
    assert free(EMPTY, 1) is EMPTY


def test_stacked_inclusion_matches_pairwise() -> None:
    rng = random.Random(17)
    for _ in range(60):
        zones = [z for z in (_random_zone(rng, 2) for _ in range(6)) if not z.is_empty()]
        padded = [z.matrix for z in zones] + [np.zeros((3, 3), dtype=np.int64)] * 2
        stack = np.stack(padded)
        target = _random_zone(rng, 2)
        if target.is_empty() or not zones:
            continue
        expected = next((k for k, z in enumerate(zones) if includes(z, target)), -1)
        assert first_including(stack, len(zones), target) == expected
        mask = included_in(stack, len(zones), target)
        assert mask.tolist() == [includes(target, z) for z in zones]
