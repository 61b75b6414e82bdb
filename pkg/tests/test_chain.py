"""Sampler kernel versus its analytic transition law.

The law (`transition_distribution`) is exercised against hand-derived
probabilities and structural invariants; the stochastic stepper is then
cross-checked against the law with a long single-step frequency count.
"""

from fractions import Fraction

import numpy as np
import pytest

from treegibbs import (
    ChainConfig,
    ChainState,
    EnergyParams,
    TwoMotzkinPath,
    batch_means_stderr,
    enumerate_paths,
    move_constants,
    neighbors,
    path_energy,
    run,
    step,
    transition_probability,
    validate,
)
from treegibbs.chain import transition_distribution
from treegibbs.errors import ConfigInvalidError, LengthMismatchError

ZERO = EnergyParams(0.0, 0.0)
GRID = [EnergyParams(a, b) for a in (-1.0, 0.0, 1.0) for b in (-1.0, 0.0, 1.0)]


class TestMoveConstants:
    def test_zero_params(self):
        c = move_constants(ZERO)
        assert c == (0.25, 0.25, 0.25, 0.25)

    def test_heat_bath_ratios(self):
        c = move_constants(EnergyParams(alpha=0.7, beta=-0.3))
        # Pair moves weight HH against UD by exp(-alpha).
        assert c.ud_to_hh / c.hh_to_ud == pytest.approx(np.exp(-0.7))
        # Site moves weight I against H by exp(-(beta - alpha)).
        assert c.h_to_i / c.i_to_h == pytest.approx(np.exp(0.7 - (-0.3)))

    def test_extreme_params_stay_finite(self):
        for a in (-1e4, 1e4):
            c = move_constants(EnergyParams(a, 0.0))
            assert all(0.0 <= v <= 0.5 for v in c)


class TestTransitionProbability:
    def test_ud_to_hh_at_zero(self):
        # One pair position, heat-bath 1/2, acceptance 1/2, class mass 1/4.
        p = transition_probability(validate("UD"), validate("HH"), ZERO)
        assert p == pytest.approx(1 / 16, rel=1e-15)
        assert transition_probability(validate("HH"), validate("UD"), ZERO) == pytest.approx(1 / 16)

    def test_adjacent_swap(self):
        # m=3: two pair positions, swap D with H, acceptance 1/2.
        p = transition_probability(validate("UDH"), validate("UHD"), ZERO)
        assert p == pytest.approx(Fraction(1, 4) * Fraction(1, 2) * Fraction(1, 2))

    def test_level_pair_is_not_swappable(self):
        # HI holds two level steps; no move class exchanges them directly.
        assert transition_probability(validate("HI"), validate("IH"), ZERO) == 0.0

    def test_transposition_rate(self):
        # UUDD -> UDUD exchanges positions 1 and 2 (or 2 and 1): 2/(4 m^2) * 1/2.
        p = transition_probability(validate("UUDD"), validate("UDUD"), ZERO)
        assert p == pytest.approx(2 / (4 * 16) / 2)

    def test_invalid_transposition_rejected(self):
        # Swapping the U and D of the single peak would dip below the axis,
        # so the rejected proposal mass stays on the diagonal and the only
        # neighbor is the pair rewrite.
        x = validate("UD")
        assert [y.word for y, _ in neighbors(x, ZERO)] == ["HH"]
        assert transition_probability(x, x, ZERO) == pytest.approx(1.0 - 1 / 16)

    def test_three_position_changes_unreachable(self):
        assert transition_probability(validate("UDH"), validate("HHI"), ZERO) == 0.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            transition_probability(validate("UD"), validate("H"), ZERO)

    def test_m1_only_site_moves(self):
        dist = transition_distribution(validate("H"), EnergyParams(0.3, -0.6))
        c = move_constants(EnergyParams(0.3, -0.6))
        assert set(dist) == {b"H", b"I"}
        assert dist[b"I"] == pytest.approx(0.25 * c.h_to_i)


class TestKernelInvariants:
    @pytest.mark.parametrize("m", range(1, 6))
    def test_rows_sum_to_one_and_lazy(self, m):
        for params in GRID:
            for x in enumerate_paths(m):
                dist = transition_distribution(x, params)
                assert sum(dist.values()) == pytest.approx(1.0, abs=1e-13)
                assert dist[x.symbols] >= 0.5 - 1e-13

    @pytest.mark.parametrize("m", range(1, 6))
    def test_moves_preserve_validity(self, m):
        for x in enumerate_paths(m):
            for y, p in neighbors(x, ZERO):
                assert p > 0
                validate(y.word)

    @pytest.mark.parametrize("m", range(2, 6))
    def test_move_class_energy_deltas(self, m):
        params = EnergyParams(alpha=0.8, beta=-0.4)
        for x in enumerate_paths(m):
            ex = path_energy(x, params)
            for y, _ in neighbors(x, params):
                delta = path_energy(y, params) - ex
                diff = [i for i in range(m) if x.symbols[i] != y.symbols[i]]
                if len(diff) == 1:
                    # site recolor H <-> I
                    expected = params.alpha - params.beta
                    assert abs(delta) == pytest.approx(abs(expected))
                else:
                    i, j = diff
                    pair = bytes(sorted((x.symbols[i], x.symbols[j])))
                    if pair in (b"DU",):
                        if set(y.symbols[k] for k in diff) == {ord("H")}:
                            assert delta == pytest.approx(params.alpha)  # UD -> HH
                        else:
                            assert delta == pytest.approx(0.0)  # transposition
                    elif pair == b"HH":
                        assert delta == pytest.approx(-params.alpha)  # HH -> UD
                    else:
                        assert delta == pytest.approx(0.0)  # adjacent swap

    @pytest.mark.parametrize("m", range(2, 6))
    def test_pair_rewrites_and_swaps_always_valid(self, m):
        for x in enumerate_paths(m):
            w = x.symbols
            for p in range(m - 1):
                pair = w[p : p + 2]
                if pair == b"UD":
                    validate(w[:p] + b"HH" + w[p + 2 :])
                if pair == b"HH":
                    validate(w[:p] + b"UD" + w[p + 2 :])
                a, b = pair
                if (a in b"UD") != (b in b"UD"):
                    validate(w[:p] + bytes((b, a)) + w[p + 2 :])

    def test_neighbors_examples(self):
        got = dict(neighbors(validate("HH"), ZERO))
        assert got[validate("UD")] == pytest.approx(1 / 16)
        got = dict(neighbors(validate("II"), ZERO))
        assert set(p.word for p in got) == {"HI", "IH"}


class TestChainConfig:
    def test_rejects_m0(self):
        with pytest.raises(ConfigInvalidError):
            ChainConfig(m=0, params=ZERO, seed=1)

    def test_rejects_wrong_initial_length(self):
        with pytest.raises(ConfigInvalidError):
            ChainConfig(m=3, params=ZERO, seed=1, initial_state=validate("UD"))

    def test_default_initial_is_all_h(self):
        cfg = ChainConfig(m=5, params=ZERO, seed=1)
        assert cfg.resolved_initial().word == "HHHHH"


class TestSampler:
    def test_step_mutates_and_counts(self):
        state = ChainState(ChainConfig(m=4, params=ZERO, seed=3))
        out = step(state)
        assert out is state
        assert state.step_count == 1
        validate(state.path.word)

    def test_every_visited_state_valid(self):
        state = ChainState(ChainConfig(m=6, params=EnergyParams(-1.0, 1.0), seed=11))
        for _ in range(20_000):
            state.step()
            # cheap invariant: balanced counts
            assert state.word.count(ord("U")) == state.word.count(ord("D"))
        validate(state.path.word)

    def test_single_step_frequencies_match_law(self):
        m = 3
        state = ChainState(ChainConfig(m=m, params=ZERO, seed=7))
        counts: dict[bytes, dict[bytes, int]] = {}
        prev = bytes(state.word)
        n_steps = 400_000
        for _ in range(n_steps):
            state.step()
            cur = bytes(state.word)
            row = counts.setdefault(prev, {})
            row[cur] = row.get(cur, 0) + 1
            prev = cur
        assert len(counts) == 14  # all states of length 3 visited as sources
        worst = 0.0
        for src, row in counts.items():
            law = transition_distribution(TwoMotzkinPath(src), ZERO)
            total = sum(row.values())
            for tgt, cnt in row.items():
                worst = max(worst, abs(cnt / total - law.get(tgt, 0.0)))
        assert worst < 0.006, f"worst single-step frequency deviation {worst:.4f}"

    def test_weighted_single_step_frequencies(self):
        m = 2
        params = EnergyParams(alpha=1.0, beta=-0.5)
        state = ChainState(ChainConfig(m=m, params=params, seed=13))
        counts: dict[bytes, dict[bytes, int]] = {}
        prev = bytes(state.word)
        for _ in range(300_000):
            state.step()
            cur = bytes(state.word)
            row = counts.setdefault(prev, {})
            row[cur] = row.get(cur, 0) + 1
            prev = cur
        worst = 0.0
        for src, row in counts.items():
            law = transition_distribution(TwoMotzkinPath(src), params)
            total = sum(row.values())
            for tgt, cnt in row.items():
                worst = max(worst, abs(cnt / total - law.get(tgt, 0.0)))
        assert worst < 0.006, f"worst deviation {worst:.4f}"


class TestRun:
    def test_deterministic_given_seed(self):
        cfg = ChainConfig(m=5, params=EnergyParams(0.5, -0.5), seed=99)
        a = run(cfg, total_steps=2000, burn_in=100, thin=7)
        b = run(cfg, total_steps=2000, burn_in=100, thin=7)
        assert [s.path.word for s in a.samples] == [s.path.word for s in b.samples]
        assert [s.step for s in a.samples] == [s.step for s in b.samples]

    def test_chain_id_gives_independent_stream(self):
        base = ChainConfig(m=5, params=ZERO, seed=99)
        other = ChainConfig(m=5, params=ZERO, seed=99, chain_id=1)
        a = run(base, total_steps=500)
        b = run(other, total_steps=500)
        assert [s.path.word for s in a.samples] != [s.path.word for s in b.samples]

    def test_emission_schedule(self):
        cfg = ChainConfig(m=2, params=ZERO, seed=5)
        res = run(cfg, total_steps=10, burn_in=4, thin=3)
        assert [s.step for s in res.samples] == [4, 7, 10]
        res = run(cfg, total_steps=10)
        assert [s.step for s in res.samples] == list(range(11))

    def test_zero_steps_emits_initial(self):
        cfg = ChainConfig(m=4, params=ZERO, seed=5)
        res = run(cfg, total_steps=0)
        assert len(res.samples) == 1
        assert res.samples[0].path.word == "HHHH"

    def test_collector_and_degrees(self):
        seen = []
        cfg = ChainConfig(m=3, params=ZERO, seed=5)
        res = run(cfg, total_steps=20, collector=seen.append, include_degrees=True)
        assert res.samples == []
        assert res.emitted == len(seen) == 21
        for s in seen:
            c = s.path.counts()
            assert s.degrees.d0 == c.u + c.h + 1
            assert s.degrees.n == 4

    def test_occupancy_counts_every_post_burn_in_state(self):
        cfg = ChainConfig(m=3, params=ZERO, seed=5)
        res = run(cfg, total_steps=1000, burn_in=100, thin=50, track_occupancy=True)
        assert sum(res.occupancy.values()) == 900

    def test_invalid_schedules(self):
        cfg = ChainConfig(m=3, params=ZERO, seed=5)
        with pytest.raises(ConfigInvalidError):
            run(cfg, total_steps=10, burn_in=20)
        with pytest.raises(ConfigInvalidError):
            run(cfg, total_steps=10, thin=0)
        with pytest.raises(ConfigInvalidError):
            run(cfg, total_steps=-1)


class TestBatchMeans:
    def test_iid_case_close_to_classic_se(self):
        rng = np.random.default_rng(0)
        xs = rng.normal(size=20_000)
        se = batch_means_stderr(xs, n_batches=50)
        classic = xs.std(ddof=1) / np.sqrt(len(xs))
        assert se == pytest.approx(classic, rel=0.35)

    def test_short_series(self):
        assert batch_means_stderr([1.0, 2.0, 3.0, 4.0]) > 0.0
