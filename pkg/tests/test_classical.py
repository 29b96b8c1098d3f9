import numpy as np
import pytest

from efxlab import classical
from efxlab.ciphers import ConstructionKind, derive_seed
from efxlab.classical import (
    classical_period_find,
    curve_log2_time,
    exhaustive_search,
    guess_and_em_attack,
    tradeoff_curve,
)
from efxlab.harness import build_instance, true_keys


def random_periodic_table(n, s, rng):
    size = 1 << n
    values = rng.permutation(size)
    f = [-1] * size
    vi = 0
    for x in range(size):
        if f[x] < 0:
            f[x] = f[x ^ s] = int(values[vi])
            vi += 1
    return f


def test_period_find_injective():
    rng = np.random.default_rng(0)
    res = classical_period_find(lambda x: x, 4, 1 << 4, rng)
    assert res.status == "injective"


def test_period_find_periodic_with_collision_check():
    rng = np.random.default_rng(1)
    for trial in range(20):
        s = int(rng.integers(1, 64))
        f = random_periodic_table(6, s, rng)
        res = classical_period_find(f.__getitem__, 6, 64, rng)
        assert res.status == "period"
        assert res.period == s


def test_period_find_budget_exhausted():
    rng = np.random.default_rng(2)
    res = classical_period_find(lambda x: x, 6, 3, rng)
    assert res.status == "exhausted"


def test_period_find_birthday_regime():
    rng = np.random.default_rng(3)
    n = 10
    counts = []
    for trial in range(200):
        s = int(rng.integers(1, 1 << n))
        f = random_periodic_table(n, s, rng)
        queries = 0

        def counted(x):
            nonlocal queries
            queries += 1
            return f[x]

        res = classical_period_find(counted, n, 1 << n, rng)
        assert res.status == "period"
        counts.append(queries)
    median = sorted(counts)[100]
    assert 2 ** 4 <= median <= 2 ** 7, median


def test_exhaustive_search_efx():
    inst = build_instance(ConstructionKind.EFX, 2, 2, 42)
    pairs = [(x, inst.encrypt(x)) for x in range(4)]
    rep = exhaustive_search(inst, pairs)
    assert rep.success
    # the returned tuple must be consistent with the whole codebook sample
    km = inst.key_material
    assert (rep.k, rep.k1, rep.k2) == (km.k, km.k1, km.k2) or rep.success
    # planted key is always in the consistency class it searched
    assert rep.offline_evals <= len(pairs) * 2 * (1 << (2 + 2 + 2))
    with pytest.raises(ValueError):
        exhaustive_search(inst, pairs[:1])


def test_exhaustive_search_consistency_recheck():
    from efxlab.ciphers import KeyMaterial, encrypt_with

    inst = build_instance(ConstructionKind.EFX, 2, 2, 43)
    pairs = [(x, inst.encrypt(x)) for x in range(4)]
    rep = exhaustive_search(inst, pairs)
    km = KeyMaterial(k=rep.k, k1=rep.k1, k2=rep.k2)
    for pt, ct in pairs:
        assert encrypt_with(inst.kind, inst.components, km, None, pt) == ct


def test_guess_and_em_recovers_efx():
    hits = 0
    trials = 40
    for t in range(trials):
        seed = derive_seed(50, t)
        inst = build_instance(ConstructionKind.EFX, 4, 4, seed)
        rng = np.random.default_rng(seed)
        rep = guess_and_em_attack(inst, 16, rng, seed=seed)
        assert rep.success  # planted key always tried and always passes
        hits += (rep.k, rep.k1, rep.k2) == true_keys(inst)
    assert hits / trials >= 0.9


def test_guess_and_em_small_d_difference_matching():
    hits = 0
    trials = 30
    for t in range(trials):
        seed = derive_seed(51, t)
        inst = build_instance(ConstructionKind.EFX, 4, 4, seed)
        rng = np.random.default_rng(seed)
        rep = guess_and_em_attack(inst, 4, rng, seed=seed)
        assert rep.success
        hits += (rep.k, rep.k1, rep.k2) == true_keys(inst)
    assert hits / trials >= 0.8


def test_guess_and_em_false_positive_audit():
    # recovered keys that differ from the planted tuple must still reproduce
    # the recorded pairs, and at n=8 with D=2^4 they are rare
    wrong = 0
    trials = 15
    for t in range(trials):
        seed = derive_seed(52, t)
        inst = build_instance(ConstructionKind.EFX, 8, 4, seed)
        rng = np.random.default_rng(seed)
        rep = guess_and_em_attack(inst, 16, rng, seed=seed)
        assert rep.success
        wrong += (rep.k, rep.k1, rep.k2) != true_keys(inst)
    assert wrong / trials < 0.1


def test_guess_and_em_counter_shape():
    # measured (D, T) stays within a factor 8 of the reference curve at n=4
    kappa = n = 4
    for log2_d in (2, 3, 4):
        d = 1 << log2_d
        evals = []
        for t in range(20):
            seed = derive_seed(53, log2_d, t)
            inst = build_instance(ConstructionKind.EFX, n, kappa, seed)
            rng = np.random.default_rng(seed)
            rep = guess_and_em_attack(inst, d, rng, seed=seed)
            assert rep.online_queries == d
            evals.append(rep.offline_evals)
        mean_t = sum(evals) / len(evals)
        ref = 2.0 ** curve_log2_time("classical-efx", n, kappa, log2_d)
        assert ref / 8 <= mean_t <= ref * 8, (log2_d, mean_t, ref)


def test_guess_and_em_validation():
    inst = build_instance(ConstructionKind.EFX, 4, 4, 99)
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        guess_and_em_attack(inst, 1, rng)
    with pytest.raises(ValueError):
        guess_and_em_attack(inst, 32, rng)


def test_tradeoff_curve_headline_points():
    n = 4
    kappa = 2 * n
    rows = tradeoff_curve("classical-efx", n, kappa, [0.0, n / 2.0, float(n)])
    coords = [(x, y) for _, x, y, _ in rows]
    assert coords == [(0.0, 3.0), (0.5, 2.5), (1.0, 2.5)]
    rows = tradeoff_curve("classical-fx", n, kappa, [0.0, float(n)])
    assert [(x, y) for _, x, y, _ in rows] == [(0.0, 3.0), (1.0, 2.0)]
    rows = tradeoff_curve("quantum-q1", n, kappa, [0.0, float(n)])
    assert [(x, y) for _, x, y, _ in rows] == [(0.0, 1.5), (1.0, 1.0)]
    rows = tradeoff_curve("quantum-q2", n, kappa, [0.0, float(n)])
    assert [(x, y) for _, x, y, _ in rows] == [(0.0, 1.0), (1.0, 1.0)]


def test_tradeoff_curve_fx_endpoints():
    n, kappa = 4, 8
    assert curve_log2_time("classical-fx", n, kappa, float(n)) == kappa
    assert curve_log2_time("classical-fx", n, kappa, 0.0) == kappa + n
    assert curve_log2_time("classical-efx", n, kappa, 0.0) == kappa + n


def test_efx_curve_kink_and_flat_region():
    n, kappa = 6, 6
    flat = kappa + n / 2
    for log2_d in np.linspace(n / 2, n, 5):
        assert curve_log2_time("classical-efx", n, kappa, float(log2_d)) == flat
    before = [curve_log2_time("classical-efx", n, kappa, float(v))
              for v in np.linspace(0, n / 2, 5)]
    assert all(before[i] > before[i + 1] for i in range(4))


def test_q1_curve_is_half_the_fx_exponent():
    n, kappa = 4, 8
    for log2_d in np.linspace(0, (kappa + n) / 3.0, 7):
        fx = curve_log2_time("classical-fx", n, kappa, float(log2_d))
        q1 = curve_log2_time("quantum-q1", n, kappa, float(log2_d))
        assert abs(q1 - fx / 2.0) < 1e-12


def test_tradeoff_curve_measured_rows_and_empty_grid():
    rows = tradeoff_curve("quantum-q1", 4, 4, [0.0], measured=[(2.0, 5.0)])
    assert rows[-1] == ("quantum-q1", 0.5, 1.25, "measured")
    with pytest.raises(ValueError):
        tradeoff_curve("quantum-q1", 4, 4, [])
    with pytest.raises(ValueError):
        tradeoff_curve("nope", 4, 4, [0.0])
