"""End-to-end acceptance checks, one test per criterion.

Each test logs a single PASS/FAIL line (collected in the terminal summary).
Criteria that this implementation does not meet are marked as expected
failures; they still run in full at the stated tolerance.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from oracles import random_behavior
from psrolab.cfr import cfr_average_strategy, new_cfr_state, cfr_iterate
from psrolab.core.payoff import EmpiricalPayoffTensor
from psrolab.core.policy import BehaviorPolicy, uniform_policy
from psrolab.core.simulate import expected_returns_exact
from psrolab.dch import DchConfig, PolicyStore, dch_run
from psrolab.eval.jpc import JpcMatrix, cell_policies, jpc_stats, proportional_loss
from psrolab.eval.mixed import mixed_to_behavior
from psrolab.eval.nashconv import nashconv
from psrolab.games.kuhn import make_kuhn
from psrolab.games.leduc import make_leduc
from psrolab.games.matrix import MATCHING_PENNIES, MatrixGameSpec, make_matrix_game
from psrolab.harness import run_experiment
from psrolab.metasolvers import (
    DecoupledRegretMatching,
    Exp3,
    ExplorationParams,
    IteratedSolver,
    make_decoupled,
    project_gamma_simplex,
)
from psrolab.oracles.qlearning import QParams
from psrolab.psro import PsroConfig, psro_epoch, psro_init, psro_run

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def within(value, target, rel):
    return abs(value - target) <= rel * abs(target)


# -- 1 ----------------------------------------------------------------------------------


def cfr_nashconv(game, iterations):
    state = new_cfr_state(game)
    for _ in range(iterations):
        cfr_iterate(state)
    return nashconv(state.tree, cfr_average_strategy(state))[0], state


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="CFR NashConv at iteration 500 misses the reference values; see notes")
def test_criterion_1_cfr_reference(record_criterion):
    nc2, _ = cfr_nashconv(make_leduc(), 500)
    nc3, _ = cfr_nashconv(make_leduc(num_players=3), 500)
    nc3_big, _ = cfr_nashconv(make_leduc(num_players=3, num_ranks=4), 500)
    _, long_run = cfr_nashconv(make_leduc(), 10_000)
    value = expected_returns_exact(long_run.tree, cfr_average_strategy(long_run))[0]
    checks = [within(nc2, 0.063591, 0.10), within(nc3, 0.194337, 0.10), abs(value - -0.0856) <= 0.003]
    ok = record_criterion(
        1, all(checks),
        f"2p NashConv@500={nc2:.6f} (ref 0.063591 +-10%), 3p NashConv@500={nc3:.6f} (ref 0.194337 +-10%; "
        f"8-card deck gives {nc3_big:.6f}), 2p value@1e4={value:.5f} (ref -0.0856 +-0.003)",
    )
    assert ok


# -- 2 ----------------------------------------------------------------------------------


@pytest.mark.xfail(strict=True, reason="the second reference row is inconsistent with the loss formula; see notes")
def test_criterion_2_jpc_formula(record_criterion):
    r1 = proportional_loss(30.44, 20.03)
    r2 = proportional_loss(23.06, 9.06)
    # the same numbers must come out of a full matrix with those means
    d = 5
    m = np.full((d, d), 20.03)
    np.fill_diagonal(m, 30.44)
    via_matrix = jpc_stats(JpcMatrix(m, np.ones((d, d), bool), 100)).r_minus
    instances = [[f"instance{k}_player{p + 1}" for p in range(4)] for k in range(5)]
    cell = cell_policies(instances, (0, 3, 2, 2))
    cell_ok = cell == ["instance0_player1", "instance3_player2", "instance2_player3", "instance2_player4"]
    checks = [round(r1, 3) == 0.342, round(via_matrix, 3) == 0.342, round(r2, 3) == 0.625, cell_ok]
    ok = record_criterion(
        2, all(checks),
        f"R-(30.44, 20.03)={r1:.4f} (ref 0.342), R-(23.06, 9.06)={r2:.4f} (ref 0.625), "
        f"cell (0,3,2,2) -> {cell}",
    )
    assert ok


# -- 3 ----------------------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_3_jpc_phenomenon(record_criterion, tmp_path):
    laser = run_experiment(CONFIGS / "jpc_laser_tag.json", tmp_path / "laser")
    studies = json.loads((laser / "jpc_summary.json").read_text())["studies"]
    margins = [s["inrl"]["r_minus"] - s["dch"]["r_minus"] for s in studies]
    wins = sum(m > 0 for m in margins)
    path = run_experiment(CONFIGS / "jpc_pathfind.json", tmp_path / "pathfind")
    (pf,) = json.loads((path / "jpc_summary.json").read_text())["studies"]
    pf_ok = pf["inrl"]["r_minus"] <= 0.05 and pf["dch"]["r_minus"] <= 0.05
    ok = record_criterion(
        3, len(studies) == 5 and wins >= 4 and pf_ok,
        f"laser tag InRL-DCH R- margins {[round(m, 3) for m in margins]} ({wins}/5 positive); "
        f"pathfind R- InRL={pf['inrl']['r_minus']:.4f} DCH={pf['dch']['r_minus']:.4f}",
    )
    assert ok


# -- 4 ----------------------------------------------------------------------------------


def action_of(policy, player):
    return int(np.argmax(policy.table[str(player)]))


def test_criterion_4_psro_reductions(record_criterion):
    rps = psro_init(PsroConfig(game={"name": "matrix", "preset": "rps"}, solver="nash"))
    do_ok = False
    for epoch in range(1, 5):
        psro_epoch(rps)
        marginals = [
            sum(w * pol.probs(str(p), 3) for w, pol in zip(rps.solution_sigmas[-1][p], rps.policies[p]))
            for p in range(2)
        ]
        if all(np.allclose(m, 1 / 3, atol=0.02) for m in marginals):
            do_ok = True
            break

    mp = psro_run(PsroConfig(game={"name": "matrix", "preset": "matching_pennies"}, solver="ibr", epochs=8))
    rows = [action_of(p, 0) for p in mp.policies[0][1:]]
    cols = [action_of(p, 1) for p in mp.policies[1][1:]]
    # matcher copies the previous column oracle, mismatcher flips the previous row oracle
    cycle_ok = rows[0] == cols[0] == 0 and all(
        rows[e] == cols[e - 1] and cols[e] == 1 - rows[e - 1] for e in range(1, len(rows))
    )

    fp = psro_run(PsroConfig(game={"name": "kuhn"}, solver="uniform", epochs=5, track_nashconv=False))
    fp_ok = all(
        s.tolist() == [1.0 / e] * e + [0.0] for e, sig in enumerate(fp.training_sigmas, start=1) for s in sig
    )
    ok = record_criterion(
        4, do_ok and cycle_ok and fp_ok,
        f"DO on RPS within 0.02 of uniform at epoch {epoch}: {do_ok}; IBR rows {rows} cols {cols}: {cycle_ok}; "
        f"FP training vectors exact for 5 epochs: {fp_ok}",
    )
    assert ok


# -- 5 ----------------------------------------------------------------------------------


@pytest.mark.xfail(strict=True, reason="exact double oracle on Leduc is not monotone enough by epoch 10; see notes")
def test_criterion_5_psro_poker(record_criterion):
    kuhn = psro_run(PsroConfig(game={"name": "kuhn"}, solver="nash", epochs=8))
    kuhn_curve = [r["nashconv"] for r in kuhn.records[1:]]
    kuhn_ok = min(kuhn_curve) < 0.05
    leduc = psro_run(PsroConfig(game={"name": "leduc"}, solver="nash", epochs=10))
    curve = [r["nashconv"] for r in leduc.records[1:]]
    ratio = curve[-1] / curve[0]
    ok = record_criterion(
        5, kuhn_ok and ratio < 0.5,
        f"Kuhn NashConv by epoch 8: {min(kuhn_curve):.2e} (< 0.05); Leduc epoch 10 / epoch 1 = "
        f"{curve[-1]:.3f} / {curve[0]:.3f} = {ratio:.3f} (< 0.5)",
    )
    assert ok


# -- 6 ----------------------------------------------------------------------------------


def fuzz_solver_outputs(rng, total=10_000):
    """Worst distance below the exploration floor over ``total`` updates per solver family."""
    worst = {}
    for kind in ("rm", "hedge", "prd"):
        updates, low = 0, np.inf
        while updates < total:
            m, n = rng.integers(1, 5, size=2)
            gamma = float(rng.uniform(0, 1))
            U = EmpiricalPayoffTensor((m, n))
            for idx in np.ndindex(m, n):
                U.set(idx, rng.normal(size=2) * 5)
            solver = IteratedSolver(kind, ExplorationParams(gamma=gamma, delta=float(rng.uniform(0.01, 1)), prd_iterations=1))
            for _ in range(50):
                for s in solver.solve(U):
                    low = min(low, s.min() - gamma / len(s))
                    assert abs(s.sum() - 1) < 1e-9
                updates += 1
        worst[kind] = low
    for kind in ("drm", "exp3", "dprd"):
        updates, low = 0, np.inf
        while updates < total:
            k = int(rng.integers(1, 7))
            gamma = float(rng.uniform(0.01, 1))
            solver = make_decoupled(kind, k, gamma)
            for _ in range(100):
                arm = int(rng.choice(k, p=solver.sigma))
                s = solver.update(arm, float(rng.normal(scale=5)))
                low = min(low, s.min() - gamma / k)
                assert abs(s.sum() - 1) < 1e-9
                updates += 1
        worst[kind] = low
    return worst


def projection_beats_random_points(rng, inputs=100, candidates=1000):
    for _ in range(inputs):
        k = int(rng.integers(1, 9))
        gamma = float(rng.uniform(0, 1))
        y = rng.normal(size=k) * 3
        x = project_gamma_simplex(y, gamma)
        floor = gamma / k
        points = floor + (1 - gamma) * rng.dirichlet(np.ones(k), size=candidates)
        if np.any(np.linalg.norm(points - y, axis=1) < np.linalg.norm(x - y) - 1e-12):
            return False
    return True


def test_criterion_6_meta_solvers(record_criterion):
    rng = np.random.default_rng(2024)
    worst = fuzz_solver_outputs(rng)
    floor_ok = all(v >= -1e-12 for v in worst.values())
    proj_ok = projection_beats_random_points(rng)

    sigma = np.array([0.1, 0.3, 0.6])
    means = np.array([1.0, -2.0, 0.5])
    est = Exp3(3, 0.1)
    samples = np.empty((100_000, 3))
    for t in range(len(samples)):
        arm = rng.choice(3, p=sigma)
        samples[t] = est.estimates(arm, means[arm] + rng.normal(), sigma[arm])
    se = samples.std(axis=0, ddof=1) / np.sqrt(len(samples))
    z = np.abs(samples.mean(axis=0) - means) / se
    unbiased_ok = bool(np.all(z < 3))

    a, b = DecoupledRegretMatching(2, 0.1), DecoupledRegretMatching(2, 0.1)
    avg = np.zeros((2, 2))
    steps = 20_000
    for _ in range(steps):
        sa, sb = a.sigma.copy(), b.sigma.copy()
        avg += [sa, sb]
        i, j = rng.choice(2, p=sa), rng.choice(2, p=sb)
        payoff = 1.0 if i == j else -1.0
        a.update(i, payoff, sa)
        b.update(j, -payoff, sb)
    avg /= steps
    drm_ok = bool(np.all(np.abs(avg - 0.5) < 0.05))
    ok = record_criterion(
        6, floor_ok and proj_ok and unbiased_ok and drm_ok,
        f"min slack above floor {min(worst.values()):.2e}; projection beats random points: {proj_ok}; "
        f"estimator |z| max {z.max():.2f}; DRM self-play averages {np.round(avg[:, 0], 3).tolist()}",
    )
    assert ok


# -- 7 ----------------------------------------------------------------------------------


def conversion_error(game, count, rng):
    worst = 0.0
    for _ in range(count):
        player = int(rng.integers(2))
        size = int(rng.integers(1, 6))
        members = [BehaviorPolicy(random_behavior(game, player, rng, deterministic=bool(rng.integers(2))))
                   for _ in range(size)]
        sigma = rng.dirichlet(np.ones(size))
        converted = mixed_to_behavior(members, sigma, game, player)
        opp = BehaviorPolicy(random_behavior(game, 1 - player, rng))

        def seat(pol):
            return [pol, opp] if player == 0 else [opp, pol]

        direct = sum(w * expected_returns_exact(game, seat(m)) for w, m in zip(sigma, members))
        worst = max(worst, float(np.abs(expected_returns_exact(game, seat(converted)) - direct).max()))
    return worst


def test_criterion_7_mixture_conversion(record_criterion):
    rng = np.random.default_rng(7)
    kuhn = conversion_error(make_kuhn(), 50, rng)
    leduc = conversion_error(make_leduc(), 20, rng)
    ok = record_criterion(7, kuhn <= 1e-9 and leduc <= 1e-9, f"max error Kuhn {kuhn:.1e}, Leduc {leduc:.1e} (<= 1e-9)")
    assert ok


# -- 8 ----------------------------------------------------------------------------------

SKEWED = MatrixGameSpec(((0, 1, 2), (1, 1, -1), (-2, 0, 0)), ((0, -1, -2), (-1, -1, 1), (2, 0, 0)), "skewed")


def test_criterion_8_dch_psro_correspondence(record_criterion):
    game = make_matrix_game(SKEWED)
    cfg = DchConfig(levels=1, period=1, steps=1000, meta_eval="exact", q=QParams(step_size=0.1, eval_episodes=0), seed=0)
    dch = dch_run(game, cfg)
    psro = psro_run(PsroConfig(game={"name": "matrix"}, solver="uniform", epochs=1), game)
    gaps = []
    for p in range(2):
        vs_uniform = [None, None]
        vs_uniform[1 - p] = uniform_policy()
        vs_uniform[p] = dch.policies[(p, 1)]
        dch_value = expected_returns_exact(game, vs_uniform)[p]
        vs_uniform[p] = psro.policies[p][1]
        target = expected_returns_exact(game, vs_uniform)[p]
        gaps.append(abs(dch_value - target))

    # residency bound over a larger hierarchy, in memory and on disk
    bounds = []
    big = dch_run(make_matrix_game(MATCHING_PENNIES), DchConfig(levels=3, period=2, steps=200))
    bounds.append((big.store.peak_policies, big.store.peak_sigmas))
    store = PolicyStore(3, 4)
    for _ in range(3):
        for p in range(3):
            for k in range(1, 5):
                store.save(p, k, uniform_policy(), np.full(k + 1, 1 / (k + 1)))
    bounds.append((store.peak_policies, store.peak_sigmas))
    residency_ok = bounds[0][0] <= 6 and bounds[0][1] <= 6 and bounds[1][0] <= 12 and bounds[1][1] <= 12
    ok = record_criterion(
        8, max(gaps) < 0.05 and residency_ok,
        f"level-1 value gap vs PSRO oracle {np.round(gaps, 4).tolist()} (< 0.05); "
        f"peak (policies, sigmas) {bounds} vs nK = 6 and 12",
    )
    assert ok


# -- 9 ----------------------------------------------------------------------------------

QUICK_CONFIGS = ["psro_kuhn_do.json", "dch_matching_pennies.json", "cfr_leduc.json", "tournament_kuhn.json"]


def test_criterion_9_determinism(record_criterion, tmp_path):
    jpc = {
        "kind": "jpc", "seed": 5, "game": {"name": "matrix", "preset": "coordination"},
        "params": {"instances": 3, "episodes_per_cell": 20, "studies": 2, "algorithms": {
            "inrl": {"kind": "inrl", "episodes": 100},
            "dch": {"kind": "dch", "levels": 2, "steps": 100, "period": 5},
        }},
    }
    (tmp_path / "jpc.json").write_text(json.dumps(jpc))
    paths = [CONFIGS / name for name in QUICK_CONFIGS] + [tmp_path / "jpc.json"]
    same = {}
    for path in paths:
        a = run_experiment(path, tmp_path / "a" / path.stem)
        b = run_experiment(path, tmp_path / "b" / path.stem)
        same[path.stem] = (a / "metrics.csv").read_bytes() == (b / "metrics.csv").read_bytes()
    ok = record_criterion(9, all(same.values()), f"byte-identical metrics.csv on rerun: {same}")
    assert ok
