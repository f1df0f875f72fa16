import numpy as np
import pytest

from consensim.agents import (
    Agent,
    InProcessTransport,
    MessageProtocolError,
    agent_stepper,
    build_agents,
    local_update,
    run_rounds,
    step_round,
)
from consensim.engine import build_system, default_epsilon, matrix_stepper
from consensim.graph import parse_edge_list

from helpers import random_system, random_weights

THREE_CYCLE = parse_edge_list("0 1\n1 2\n2 0\n")


def make_agents(graph_text, w, x0):
    system = build_system(parse_edge_list(graph_text), w)
    return system, build_agents(system, x0)


class TestLocalUpdate:
    def test_single_neighbor(self):
        a = Agent(id=0, weight=1.0, state=0.0, neighbors=(1,), inbox={1: 2.0})
        assert local_update(a, 0.5) == 1.0

    def test_no_neighbors_keeps_state(self):
        a = Agent(id=3, weight=2.0, state=-4.5, neighbors=())
        assert local_update(a, 0.7) == -4.5

    def test_equal_states_are_a_fixed_point(self):
        a = Agent(id=0, weight=3.0, state=2.5, neighbors=(1, 2), inbox={1: 2.5, 2: 2.5})
        assert local_update(a, 0.9) == 2.5

    def test_weight_scales_the_step(self):
        light = Agent(id=0, weight=1.0, state=0.0, neighbors=(1,), inbox={1: 4.0})
        heavy = Agent(id=0, weight=4.0, state=0.0, neighbors=(1,), inbox={1: 4.0})
        assert local_update(light, 0.5) == 2.0
        assert local_update(heavy, 0.5) == 0.5

    def test_missing_message_is_a_protocol_violation(self):
        a = Agent(id=2, weight=1.0, state=0.0, neighbors=(0, 1), inbox={0: 1.0})
        with pytest.raises(MessageProtocolError, match="agent 2 has no message from neighbor 1"):
            local_update(a, 0.5)

    def test_does_not_commit_state(self):
        a = Agent(id=0, weight=1.0, state=0.0, neighbors=(1,), inbox={1: 2.0})
        local_update(a, 0.5)
        assert a.state == 0.0


class TestTransport:
    def test_collect_returns_messages_by_sender(self):
        t = InProcessTransport()
        t.send(1, 0, 3.5)
        t.send(2, 0, -1.0)
        assert t.collect(0) == {1: 3.5, 2: -1.0}

    def test_collect_drains_the_mailbox(self):
        t = InProcessTransport()
        t.send(1, 0, 3.5)
        assert t.collect(0) == {1: 3.5}
        assert t.collect(0) == {}


class TestRounds:
    def test_one_round_of_unit_cycle(self):
        # each node moves halfway toward the node it listens to
        system, agents = make_agents("0 1\n1 2\n2 0\n", np.ones(3), [1.0, 0.0, 0.0])
        sent = step_round(agents, 0.5)
        assert sent == 3
        assert [a.state for a in agents] == [0.5, 0.0, 0.5]

    def test_messages_per_round_equals_edge_count(self):
        system, agents = make_agents("0 1\n0 2\n1 0\n2 0\n", np.ones(3), [1.0, 2.0, 3.0])
        reports = run_rounds(agents, 0.4, 3)
        assert [r.messages_sent for r in reports] == [0, 4, 4, 4]

    def test_zero_rounds_reports_initial_state_only(self):
        system, agents = make_agents("0 1\n1 0\n", [1.0, 3.0], [4.0, 0.0])
        reports = run_rounds(agents, 0.5, 0)
        assert len(reports) == 1
        assert reports[0].round == 0
        assert reports[0].states == (4.0, 0.0)
        assert reports[0].messages_sent == 0

    def test_rejects_negative_rounds(self):
        system, agents = make_agents("0 1\n1 0\n", np.ones(2), [1.0, 0.0])
        with pytest.raises(ValueError, match="nonnegative"):
            run_rounds(agents, 0.5, -1)

    def test_updates_commit_only_after_all_messages_computed(self):
        # 1 listens to 0 and 0 listens to 2; committing agent 0 in place
        # before agent 1 reads would give agent 1 the value 4 instead of 2
        system, agents = make_agents("0 2\n1 0\n", np.ones(3), [0.0, 4.0, 8.0])
        step_round(agents, 0.5)
        assert [a.state for a in agents] == [4.0, 2.0, 8.0]

    def test_report_rounds_are_sequential(self):
        system, agents = make_agents("0 1\n1 0\n", np.ones(2), [2.0, 0.0])
        reports = run_rounds(agents, 0.25, 5)
        assert [r.round for r in reports] == [0, 1, 2, 3, 4, 5]


class TestLockstepWithMatrixEngine:
    def test_trajectories_bit_identical_across_random_systems(self):
        rng = np.random.default_rng(77)
        for _ in range(30):
            system = random_system(rng, n_hi=15)
            eps = default_epsilon(system)
            x0 = rng.uniform(-10.0, 10.0, system.n)
            agents = build_agents(system, x0)
            reports = run_rounds(agents, eps, 60)
            step = matrix_stepper(system, eps)
            x = x0.copy()
            for r, report in enumerate(reports):
                assert np.array(report.states, dtype=np.float64).tobytes() == x.tobytes(), (
                    f"diverged at round {r}"
                )
                x = step(x)

    def test_agent_stepper_matches_run_rounds(self):
        rng = np.random.default_rng(78)
        system = random_system(rng, n_hi=10)
        eps = default_epsilon(system)
        x0 = rng.uniform(-5.0, 5.0, system.n)
        stepper = agent_stepper(system, x0, eps)
        agents = build_agents(system, x0)
        x = np.array(x0)
        for _ in range(20):
            x = stepper(x)
            step_round(agents, eps)
            assert x.tobytes() == np.array([a.state for a in agents]).tobytes()

    def test_heavy_weight_ratio_still_bit_identical(self):
        g = parse_edge_list("0 1\n1 2\n2 0\n0 2\n")
        system = build_system(g, [0.1, 10.0, 5.0])
        eps = default_epsilon(system)
        x0 = np.array([3.7, -2.2, 9.9])
        agents = build_agents(system, x0)
        step = matrix_stepper(system, eps)
        x = x0.copy()
        for _ in range(100):
            step_round(agents, eps)
            x = step(x)
            assert np.array([a.state for a in agents]).tobytes() == x.tobytes()


class TestBuildAgents:
    def test_neighbors_ascending(self):
        g = parse_edge_list("0 2\n0 1\n1 0\n2 0\n")
        system = build_system(g, random_weights(np.random.default_rng(3), 3))
        agents = build_agents(system, [1.0, 2.0, 3.0])
        assert agents[0].neighbors == (1, 2)
        assert agents[1].neighbors == (0,)

    def test_states_and_weights_copied_per_agent(self):
        system = build_system(THREE_CYCLE, [1.0, 2.0, 3.0])
        agents = build_agents(system, [5.0, 6.0, 7.0])
        assert [a.state for a in agents] == [5.0, 6.0, 7.0]
        assert [a.weight for a in agents] == [1.0, 2.0, 3.0]
