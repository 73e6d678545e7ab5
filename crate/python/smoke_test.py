"""Smoke test for the ga_suite Python module.

Build and install first:  pip install --no-build-isolation ./crates/ga-suite-py
Then run:                 python python/smoke_test.py
"""

import itertools
import json
import random

import ga_suite


def check_operators():
    p1 = list(range(9))
    p2 = [x - 1 for x in [3, 4, 7, 1, 6, 8, 9, 2, 5]]
    c1, c2 = ga_suite.pmx(p1, p2, 2, 5)
    assert [x + 1 for x in c1] == [4, 2, 7, 1, 6, 5, 3, 8, 9]
    assert sorted(c2) == p1
    c1, _ = ga_suite.order_based(p1, p2, 2, 7)
    assert [x + 1 for x in c1] == [1, 8, 3, 4, 5, 6, 7, 9, 2]
    try:
        ga_suite.c1(p1, p2, 0)
    except ValueError:
        pass
    else:
        raise AssertionError("cut 0 should be rejected")


def check_aggregation():
    stats = ga_suite.aggregate([20.0] * 50 + [None, None], "nurse")
    assert stats.cost == 24.0 and stats.solved == 50
    stats = ga_suite.aggregate([10.0, None], "mall")
    assert stats.cost == 10.0 and stats.uncensored == 5.0


def check_nurse():
    inst = ga_suite.NurseInstance.micro(seed=3)
    best = min(
        cost
        for roster in itertools.product(*(range(d) for d in inst.domains()))
        for cost, under, _ in [inst.evaluate(list(roster))]
        if under == 0
    )
    out = ga_suite.solve(inst, "indirect", seed=1)
    assert out.feasible and out.best >= best and out.invariants_clean
    roster = json.loads(out.solution)["options"]
    assert inst.evaluate(roster)[0] == out.best

    ward = ga_suite.NurseInstance.generate(nurses=20, variant="random", seed=2)
    perm = list(range(len(ward)))
    random.Random(0).shuffle(perm)
    assert ward.decode(perm) == ward.decode(perm)
    again = ga_suite.NurseInstance.from_json(ward.to_json())
    assert again.domains() == ward.domains()


def check_mall():
    inst = ga_suite.MallInstance.generate(set=4, seed=1)
    assert (inst.locations, inst.areas, inst.types) == (100, 5, 20)
    perm = list(range(inst.locations))
    random.Random(0).shuffle(perm)
    layout, _ = inst.decode(perm, [5000.0] * 6)
    rent, violation, fitness = inst.evaluate(layout)
    assert abs(fitness - (rent / 1000 - 30 * violation)) < 1e-9
    assert rent <= inst.upper_bound()

    stats = ga_suite.run_experiment(
        [ga_suite.MallInstance.micro(seed=s) for s in range(2)], "direct", runs=3, base_seed=7
    )
    assert stats.instances == 2 and 0.0 <= stats.feasibility <= 1.0


if __name__ == "__main__":
    check_operators()
    check_aggregation()
    check_nurse()
    check_mall()
    print("ga_suite smoke test passed")
