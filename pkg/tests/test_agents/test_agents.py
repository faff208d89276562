"""
Tests for the DQN, PGN and DDPGN agents and the multi-agent environment.
"""
import numpy as np
import pytest

from src.agents import (
    ActionSpace,
    DdpgnAgent,
    DqnAgent,
    HyperParams,
    MultiAgentEnvironment,
    PgnAgent,
    RewardMode,
)
from src.errors import ConfigurationError
from src.neural import Experience, MlpParams, actor_objective


@pytest.fixture
def hyper():
    """Small replay and reward memories for quick tests."""
    return HyperParams(replay_capacity=200, batch_size=8)


def make_agent(cls, hyper, mode="ia", seed=0, width=5, critic_width=3):
    return cls(
        cell=0,
        tech="5g-nr",
        action_space=ActionSpace.for_tech(mode, "5g-nr"),
        state_width=width,
        critic_width=critic_width,
        hyper=hyper,
        rng=np.random.default_rng(seed),
    )


def states(count=4, width=5, seed=1):
    return np.random.default_rng(seed).normal(size=(count, width))


class TestDqnAgent:
    """Test suite for the epsilon-greedy Q learner."""

    def test_greedy_tie_picks_lowest_index(self, hyper):
        """Test an all-zero Q-network chooses action 0 without exploration."""
        hyper.epsilon = 0.0
        agent = make_agent(DqnAgent, hyper)
        agent.q = agent.q.zeros_like()

        decision = agent.act(states(), None, explore=True)

        assert decision.tokens.tolist() == [0, 0, 0, 0]
        assert np.all(decision.action_dbm == -102.0)

    def test_pure_exploration(self, hyper):
        """Test epsilon = 1 spreads actions over the whole level set."""
        hyper.epsilon = 1.0
        agent = make_agent(DqnAgent, hyper)

        decision = agent.act(states(count=200), None, explore=True)

        assert set(decision.tokens.tolist()) == set(range(10))

    def test_exploration_drawn_per_timeslot(self, hyper):
        """Test one epsilon draw decides the whole timeslot: all devices greedy or all random."""
        hyper.epsilon = 0.5
        agent = make_agent(DqnAgent, hyper)
        agent.q = agent.q.zeros_like()

        decisions = [agent.act(states(count=200), None, explore=True).tokens for _ in range(20)]

        greedy = [d for d in decisions if np.all(d == 0)]
        explored = [d for d in decisions if not np.all(d == 0)]
        assert greedy and explored
        # a random timeslot picks level 0 for about a tenth of the devices, never for half
        assert all(np.count_nonzero(d == 0) < 60 for d in explored)

    def test_no_update_below_batch(self, hyper):
        """Test the Q-network is untouched while the replay holds fewer than N_D records."""
        agent = make_agent(DqnAgent, hyper)
        before = agent.q.copy()
        decision = agent.act(states(count=4), None, explore=True)
        agent.observe(states(count=4), None, decision, np.ones(4), states(count=4))

        agent.end_episode()

        assert agent.updates == 0
        for a, b in zip(before.arrays(), agent.q.arrays()):
            np.testing.assert_array_equal(a, b)

    def test_update_ignores_successor_states(self, hyper):
        """Test shuffling the stored next states leaves the update unchanged."""
        agents = [make_agent(DqnAgent, hyper, seed=3) for _ in range(2)]
        rng = np.random.default_rng(4)
        records = [Experience(rng.normal(size=5), int(rng.integers(10)), float(rng.uniform()), rng.normal(size=5))
                   for _ in range(20)]
        shuffled = [r._replace(next_state=records[(k + 7) % 20].next_state) for k, r in enumerate(records)]
        for agent, batch in zip(agents, (records, shuffled)):
            for record in batch:
                agent.memory.insert(record)
            agent.end_episode()

        for a, b in zip(agents[0].q.arrays(), agents[1].q.arrays()):
            np.testing.assert_array_equal(a, b)
        assert agents[0].updates == 1


class TestPgnAgent:
    """Test suite for the REINFORCE learner."""

    def test_uniform_logits(self, hyper):
        """Test a zero output layer gives probability 0.1 per action."""
        agent = make_agent(PgnAgent, hyper)
        agent.policy.weights[-1][:] = 0.0

        np.testing.assert_allclose(agent.probabilities(states()), 0.1)

    def test_zero_reward_no_change(self, hyper):
        """Test zero rewards leave the policy unchanged."""
        agent = make_agent(PgnAgent, hyper)
        before = agent.policy.copy()
        s = states()
        decision = agent.act(s, None, explore=True)

        agent.observe(s, None, decision, np.zeros(4), s)

        for a, b in zip(before.arrays(), agent.policy.arrays()):
            np.testing.assert_array_equal(a, b)

    def test_rewarded_action_gains_probability(self, hyper):
        """Test repeatedly rewarding one action strictly raises its probability."""
        agent = make_agent(PgnAgent, hyper)
        s = states(count=1)
        decision = agent.act(s, None, explore=False)
        decision.tokens = np.array([3])

        history = [agent.probabilities(s)[0, 3]]
        for _ in range(3):
            agent.observe(s, None, decision, np.array([1.0]), s)
            history.append(agent.probabilities(s)[0, 3])

        assert history[0] < history[1] < history[2] < history[3]

    def test_snapshot_when_reward_memory_fills(self, hyper):
        """Test a snapshot is taken and the memory cleared once N_D rewards are stored."""
        agent = make_agent(PgnAgent, hyper)
        s = states(count=8)
        decision = agent.act(s, None, explore=True)

        agent.observe(s, None, decision, np.full(8, 0.5), s)

        assert agent.best_reward == pytest.approx(4.0)
        assert agent.best_params is not None
        assert len(agent.reward_memory) == 0


class TestDdpgnAgent:
    """Test suite for the actor-critic learner."""

    def test_actions_within_bounds(self, hyper):
        """Test continuous actions stay inside the IA range for extreme inputs."""
        agent = make_agent(DdpgnAgent, hyper)

        decision = agent.act(states(count=50) * 1e3, None, explore=True)

        assert np.all(decision.action_dbm >= -102.0)
        assert np.all(decision.action_dbm <= -97.0)

    def test_zero_critic_gives_zero_actor_gradient(self, hyper):
        """Test an all-zero critic leaves the actor unchanged."""
        hyper.lr_critic = 0.0
        agent = make_agent(DdpgnAgent, hyper)
        agent.critic = agent.critic.zeros_like()
        before = agent.actor.copy()
        s, c = states(), states(width=3)

        _, grads = actor_objective(agent.actor, agent.critic, s[0], c[0])
        agent.observe(s, c, agent.act(s, c, explore=True), np.ones(4), s)

        assert all(np.all(g == 0.0) for g in grads.arrays())
        for a, b in zip(before.arrays(), agent.actor.arrays()):
            np.testing.assert_array_equal(a, b)

    def test_actor_climbs_increasing_critic(self, hyper):
        """Test a critic increasing in the action pushes the actor output up."""
        hyper.lr_critic = 0.0
        hyper.lr_actor = 1e-3
        agent = make_agent(DdpgnAgent, hyper)
        critic = agent.critic.zeros_like()
        critic.weights[0][-1, 0] = 1.0
        critic.weights[1][0, 0] = 1.0
        critic.weights[2][0, 0] = 1.0
        agent.critic = critic
        s, c = states(count=1), states(count=1, width=3)

        start = agent.unit_actions(s)[0]
        for _ in range(5):
            agent.observe(s, c, agent.act(s, c, explore=False), np.zeros(1), s)

        assert agent.unit_actions(s)[0] > start


class TestMultiAgentEnvironment:
    """Test suite for the multi-agent timeslot loop."""

    def test_unknown_scheduler(self):
        """Test a non-DRL scheduler name is refused."""
        with pytest.raises(ConfigurationError):
            MultiAgentEnvironment("baseline_ici", num_cells=3)

    def test_one_agent_per_cell(self, make_realization, hyper):
        """Test single-technology runs create one agent per cell."""
        env = MultiAgentEnvironment("dqn_ia", num_cells=3, hyper=hyper)

        env.run_episode(make_realization(T=2), train=True)

        assert sorted(key[0] for key in env.agents) == [0, 1, 2]

    @pytest.mark.parametrize("scheduler", ["dqn_ia", "dqn_pa", "pgn_ia", "pgn_pa", "ddpgn_ia", "ddpgn_pa"])
    def test_training_is_reproducible(self, make_realization, hyper, scheduler):
        """Test identical seeds give identical training and evaluation rates."""
        train = [make_realization(seed=s, T=3, fading=True) for s in (1, 2, 3)]
        test = [make_realization(seed=9, T=3, fading=True)]
        outcomes = []
        for _ in range(2):
            env = MultiAgentEnvironment(scheduler, num_cells=3, hyper=hyper, seed=5)
            env.train(train, RewardMode.CENTRALIZED)
            results, _ = env.evaluate(test)
            outcomes.append(results[0].rates)

        np.testing.assert_array_equal(outcomes[0], outcomes[1])
        assert np.all(outcomes[0] >= 0.0)

    def test_frozen_evaluation_repeats(self, make_realization, hyper):
        """Test evaluating a frozen policy twice gives identical rates."""
        env = MultiAgentEnvironment("pgn_ia", num_cells=3, hyper=hyper)
        env.train([make_realization(seed=s, T=3) for s in (1, 2)])
        test = [make_realization(seed=7, T=3)]

        first, _ = env.evaluate(test)
        second, _ = env.evaluate(test)

        np.testing.assert_array_equal(first[0].rates, second[0].rates)

    def test_evaluation_never_uses_centralized_rewards(self, make_realization, hyper):
        """Test centralized training exchanges rewards while evaluation does not."""
        env = MultiAgentEnvironment("ddpgn_ia", num_cells=3, hyper=hyper)

        _, train_reward = env.train([make_realization(T=2)], RewardMode.CENTRALIZED)
        _, test_reward = env.evaluate([make_realization(seed=4, T=2)])

        assert train_reward.centralized_calls == 2
        assert test_reward.centralized_calls == 0

    def test_states_ignore_other_cells_powers(self, make_realization, hyper):
        """Test a cell's edge inputs and actions do not change when only other cells change their powers."""
        realization = make_realization(seed=2, T=2)
        env = MultiAgentEnvironment("dqn_pa", num_cells=3, hyper=hyper)
        agent = env.agent_for(0, "5g-nr")
        own = np.flatnonzero(realization.cell_ids == 0)
        others = np.flatnonzero(realization.cell_ids != 0)
        rng = np.random.default_rng(3)
        powers_a = rng.uniform(1e-4, 0.2, realization.num_devices)
        powers_b = powers_a.copy()
        powers_b[others] = rng.uniform(1e-4, 0.2, others.size)
        rates = np.full(realization.num_devices, 1.5)

        states_a = env._states(realization, 1, powers_a, rates)
        states_b = env._states(realization, 1, powers_b, rates)

        np.testing.assert_array_equal(states_a[own], states_b[own])
        np.testing.assert_allclose(states_a[own, -2], 10.0 * np.log10(powers_a[own] * 1e3))
        agent.freeze()
        first = agent.act(states_a[own], None, explore=False)
        second = agent.act(states_b[own], None, explore=False)
        np.testing.assert_array_equal(first.tokens, second.tokens)

    def test_trace_rows(self, make_realization, hyper):
        """Test traces carry one row per device and timeslot."""
        env = MultiAgentEnvironment("dqn_pa", num_cells=3, hyper=hyper)

        result = env.run_episode(make_realization(T=2), train=False, keep_trace=True)

        assert len(result.trace) == 18
        assert set(result.trace[0]) == {
            "realization_id", "t", "device", "state_hash", "action_dbm", "power_dbm", "rate", "reward"
        }
        assert all(-40.0 - 1e-9 <= row["power_dbm"] <= 23.0 + 1e-9 for row in result.trace)

    def test_checkpoint_round_trip(self, make_realization, hyper, tmp_path):
        """Test saved agents reproduce the greedy evaluation after loading."""
        realization = make_realization(T=2)
        env = MultiAgentEnvironment("ddpgn_pa", num_cells=3, hyper=hyper)
        env.train([realization])
        expected, _ = env.evaluate([realization])
        env.save(tmp_path)

        restored = MultiAgentEnvironment("ddpgn_pa", num_cells=3, hyper=hyper)
        restored.load(tmp_path, realization)
        actual = restored.run_episode(realization, train=False)

        np.testing.assert_array_equal(actual.rates, expected[0].rates)
        assert isinstance(restored.agents[(0, realization.techs[0])].actor, MlpParams)
