import math

import numpy as np
import pytest

from framecover.bip import (
    BipInstance,
    bip_feasible,
    dual_reflection_defect,
    three_point_instance,
)
from framecover.opnorm import Operator
from framecover.rng import stream
from framecover.spaces import INF, Vector, lp, vector_norm, wlp

Z2 = lp(2, 2)
E1 = Vector(np.array([1.0, 0.0]), Z2)
E2 = Vector(np.array([0.0, 1.0]), Z2)


def test_three_point_witness_interval():
    inst = three_point_instance(Z2, (E1,), E2, E1, eps=0.01)
    res = bip_feasible(inst)
    assert res.feasible
    # the slice of the intersection along e1 is |t| <= sqrt((sqrt2+eps)^2-1)-1
    half = math.sqrt((math.sqrt(2) + 0.01) ** 2 - 1) - 1
    assert half == pytest.approx(0.0140928, abs=1e-6)
    assert abs(res.witness.coords[0]) <= half + 1e-8
    assert res.witness.coords[1] == 0.0
    assert min(res.slacks) >= -1e-8
    assert res.value <= 1e-8


def test_shrunk_radius_diagnostic_certified_infeasible():
    inst = three_point_instance(Z2, (E1,), E2, E1, eps=0.01)
    res = bip_feasible(inst, diagnostic_offset=-0.5)
    assert not res.feasible and res.witness is None
    assert res.method == "certificate-grid"
    # true minimum of g is 0.5 at t = 0; the grid certifies a positive floor
    assert res.violation == pytest.approx(0.46875, abs=1e-6)
    assert 0 < res.violation <= res.value + 1e-9


def test_single_zero_point_feasible_at_origin():
    zero = Vector(np.zeros(2), Z2)
    inst = BipInstance(Z2, (E1,), E2, (zero,), eps=0.3)
    res = bip_feasible(inst)
    assert res.feasible and res.method == "origin"
    assert np.array_equal(res.witness.coords, np.zeros(2))
    assert res.slacks == pytest.approx((0.3,))


def test_cyclic_projections_off_origin():
    y = Vector(np.array([0.5, 1.0]), Z2)
    inst = BipInstance(Z2, (E1,), y, (E1,), eps=0.1)
    res = bip_feasible(inst)
    assert res.feasible and res.method == "cyclic-projections"
    # feasible slice along e1 is 1.5 +/- sqrt((sqrt(1.25)+0.1)^2 - 1)
    lo = 1.5 - math.sqrt((math.sqrt(1.25) + 0.1) ** 2 - 1)
    assert res.witness.coords[0] >= lo - 1e-6
    assert min(res.slacks) >= -1e-8


def test_weighted_hilbert_uses_projections():
    Zw = wlp(2, [2.0, 1.0])
    y = Vector(np.array([0.5, 1.0]), Zw)
    x = Vector(np.array([1.0, 0.0]), Zw)
    inst = BipInstance(Zw, (x,), y, (x,), eps=0.1)
    res = bip_feasible(inst)
    assert res.feasible and res.method == "cyclic-projections"
    assert min(res.slacks) >= -1e-8


def test_subgradient_path_on_l4():
    Z = lp(4, 3)
    x = Vector(np.array([1.0, 0.0, 0.0]), Z)
    y = Vector(np.array([0.3, 0.0, 1.0]), Z)
    basis = (x, Vector(np.array([0.0, 1.0, 0.0]), Z))
    inst = three_point_instance(Z, basis, y, x, eps=0.3)
    res = bip_feasible(inst)
    assert res.feasible and res.method in ("subgradient", "certificate-grid")
    assert min(res.slacks) >= -1e-8
    assert vector_norm(Z, res.witness.coords - np.asarray(res.witness.coords)) == 0.0


def test_feasibility_monotone_in_eps():
    gen = stream(21, "bip-monotone")
    for p in (1.0, 2.0, 3.0, INF):
        Z = lp(p, 3)
        y = Vector(np.array([0.2, -0.4, 1.0]), Z)
        x = Vector(np.r_[gen.normal(size=2), 0.0], Z)
        basis = (Vector(np.array([1.0, 0.0, 0.0]), Z),
                 Vector(np.array([0.0, 1.0, 0.0]), Z))
        res_small = bip_feasible(three_point_instance(Z, basis, y, x, eps=0.05))
        res_big = bip_feasible(three_point_instance(Z, basis, y, x, eps=0.5))
        if res_small.feasible:
            assert res_big.feasible
        # generous surplus always admits the origin
        big = 2 * vector_norm(Z, x.coords) + 0.1
        res = bip_feasible(three_point_instance(Z, basis, y, x, eps=big))
        assert res.feasible and res.method == "origin"


def test_instance_validation():
    with pytest.raises(ValueError, match="eps"):
        three_point_instance(Z2, (E1,), E2, E1, eps=0.0)
    with pytest.raises(ValueError, match="basis is empty"):
        BipInstance(Z2, (), E2, (E1,), 0.1)
    with pytest.raises(ValueError, match="live in Z"):
        BipInstance(Z2, (E1,), Vector(np.ones(3), lp(2, 3)), (E1,), 0.1)
    with pytest.raises(ValueError, match="dependent"):
        BipInstance(Z2, (E1, Vector(2 * E1.coords, Z2)), E2, (E1,), 0.1)
    with pytest.raises(ValueError, match="inside the subspace"):
        BipInstance(Z2, (E1,), Vector(np.array([0.5, 0.0]), Z2), (E1,), 0.1)
    with pytest.raises(ValueError, match="leaves the subspace"):
        BipInstance(Z2, (E1,), E2, (E2,), 0.1)


def test_reflection_defects():
    assert dual_reflection_defect(
        Operator(np.diag([1.0, 0.0]), Z2, Z2)) == pytest.approx(1.0, abs=1e-12)
    skew = Operator(np.array([[1.0, -1.0], [0.0, 0.0]]), Z2, Z2)
    assert dual_reflection_defect(skew) == pytest.approx(1 + math.sqrt(2), rel=1e-12)
    with pytest.raises(ValueError, match="single space"):
        dual_reflection_defect(Operator(np.zeros((3, 2)), Z2, lp(2, 3)))
    with pytest.raises(ValueError, match="not a projection"):
        dual_reflection_defect(Operator(np.array([[1.0, 0.0], [0.0, 0.5]]), Z2, Z2))
