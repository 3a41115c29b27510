"""Environment dynamics: hand-worked frozen cases per environment plus the
structural rules they all share."""

from fractions import Fraction

import pytest

from invsim.agents import ConstantAgent
from invsim.envs import make_env
from invsim.envs.base import Action, validate_action
from invsim.episode import SimConfig, run_episode
from invsim.errors import ConfigError


def run(env_id, horizon, agents, seed=0, memory_window=5, **env_params):
    config = SimConfig(
        env_id=env_id,
        horizon=horizon,
        seed=seed,
        env_params=env_params,
        memory_window=memory_window,
    )
    return run_episode(config, agents)


class PlannedAgent:
    """Plays a fixed sequence of order maps, one per acting period."""

    def __init__(self, plans):
        self.plans = list(plans)
        self._next = 0

    def start(self, intro):
        return None

    def decide(self, obs, memory):
        orders = self.plans[self._next]
        self._next += 1
        return Action(orders)

    def finish(self, totals):
        pass

    def close(self):
        pass


def constant_demand(value):
    return {"kind": "constant", "value": value}


def trace_demand(values):
    return {"kind": "trace", "values": list(values)}


class TestNewsvendor:
    def test_loss_capped_by_demand(self):
        # q=100 against d=150 at r=12, c=3: profit 12*100 - 3*100 = 900.
        log = run("NVP", 1, {"vendor": ConstantAgent(q=100)}, demand=constant_demand(150))
        assert log.totals["vendor"] == Fraction(-900)

    def test_overage_wastes_units(self):
        # q=100 against d=60: profit 12*60 - 300 = 420.
        log = run("NVP", 1, {"vendor": ConstantAgent(q=100)}, demand=constant_demand(60))
        assert log.totals["vendor"] == Fraction(-420)

    def test_zero_order_zero_profit(self):
        log = run("NVP", 1, {"vendor": ConstantAgent(q=0)}, demand=constant_demand(80))
        assert log.totals["vendor"] == 0

    def test_no_carryover_between_periods(self):
        # Unsold stock salvages at zero; every period starts empty.
        log = run("NVP", 3, {"vendor": ConstantAgent(q=50)}, demand=constant_demand(0))
        for step in log.steps:
            assert step.observations["vendor"].on_hand == 0
            assert step.end_state["vendor"] == {"on_hand": 0, "backlog": 0, "net": 0}
            assert step.costs["vendor"] == Fraction(150)

    def test_observation_shows_market_terms(self):
        log = run("NVP", 1, {"vendor": ConstantAgent(q=0)}, demand=constant_demand(40))
        obs = log.steps[0].observations["vendor"]
        assert obs.cost_params == {"r": 12, "c": 3}
        assert obs.extra["demand"] == {"kind": "constant", "value": 40}
        assert obs.extra["horizon"] == 1

    def test_margin_must_be_positive(self):
        for price, cost in ((3, 3), (2, 3), (12, 0)):
            with pytest.raises(ConfigError):
                run(
                    "NVP",
                    1,
                    {"vendor": ConstantAgent(q=0)},
                    demand=constant_demand(0),
                    price=price,
                    cost=cost,
                )

    def test_unknown_param_rejected(self):
        with pytest.raises(ConfigError):
            run("NVP", 1, {"vendor": ConstantAgent(q=0)}, bogus=1)


class TestMultiPeriod:
    def test_holding_cost_update(self):
        # I=10, d=4, arrivals=6 under h=1, b=2: level 12, cost 12.
        log = run(
            "MPR",
            2,
            {"manager": ConstantAgent(q=6)},
            demand=trace_demand([0, 4]),
            lead=trace_demand([1]),
            review_periods=[1],
            initial_inventory=10,
            h=1,
            b=2,
        )
        assert log.steps[0].costs["manager"] == Fraction(10)
        assert log.steps[1].arrivals["manager"] == 6
        assert log.steps[1].end_state["manager"]["net"] == 12
        assert log.steps[1].costs["manager"] == Fraction(12)

    def test_backorder_cost_update(self):
        # I=0, d=3, no arrivals under h=1, b=2: level -3, cost 6.
        log = run(
            "MPR",
            1,
            {"manager": ConstantAgent(q=0)},
            demand=trace_demand([3]),
            lead=trace_demand([1]),
            review_periods=[1],
            initial_inventory=0,
            h=1,
            b=2,
        )
        step = log.steps[0]
        assert step.end_state["manager"] == {"on_hand": 0, "backlog": 3, "net": -3}
        assert step.costs["manager"] == Fraction(6)
        assert step.unfilled["manager"] == 3

    def test_boundary_zero_cost(self):
        log = run(
            "MPR",
            1,
            {"manager": ConstantAgent(q=0)},
            demand=trace_demand([5]),
            lead=trace_demand([1]),
            review_periods=[1],
            initial_inventory=5,
            h=1,
            b=2,
        )
        assert log.steps[0].costs["manager"] == 0
        assert log.steps[0].end_state["manager"]["net"] == 0

    def test_order_arrival_recorded(self):
        # Placed at period 3 with lead 2: pipeline entry (5, 10).
        log = run(
            "MPR",
            5,
            {"manager": ConstantAgent(q=10)},
            demand=trace_demand([0] * 5),
            lead=trace_demand([2]),
            review_periods=[3],
            initial_inventory=0,
        )
        placed = log.steps[2].extra["placed"]
        assert placed == {"slot": 0, "period": 3, "arrival": 5, "qty": 10}
        assert log.steps[4].arrivals["manager"] == 10

    def test_lift_preserves_non_crossing(self):
        # First order lands at 7. Second (period 4) keeps drawing lead 2,
        # which would land at 6 and cross; after the resample budget it is
        # lifted to arrive exactly at 7.
        log = run(
            "MPR",
            8,
            {"manager": ConstantAgent(q=5)},
            demand=trace_demand([0] * 8),
            lead=trace_demand([6] + [2] * 100),
            review_periods=[1, 4],
            initial_inventory=0,
            b=0,
        )
        first = log.steps[0].extra["placed"]
        second = log.steps[3].extra["placed"]
        assert first["arrival"] == 7
        assert second["arrival"] == 7
        assert log.steps[6].arrivals["manager"] == 10

    def test_zero_quantity_order_keeps_slot(self):
        # A zero order still consumes its slot and its lead-time draw.
        log = run(
            "MPR",
            6,
            {"manager": PlannedAgent([{"order": 0}, {"order": 9}])},
            demand=trace_demand([0] * 6),
            lead=trace_demand([3, 4]),
            review_periods=[1, 2],
            initial_inventory=0,
        )
        assert log.steps[0].extra["placed"] == {"slot": 0, "period": 1, "arrival": 4, "qty": 0}
        assert log.steps[1].extra["placed"] == {"slot": 1, "period": 2, "arrival": 6, "qty": 9}
        assert log.steps[5].arrivals["manager"] == 9

    def test_off_schedule_order_rejected(self):
        env = make_env(
            "MPR",
            {"demand": trace_demand([0, 0]), "lead": trace_demand([1]), "review_periods": [1]},
            horizon=2,
            seed=0,
        )
        env.begin_period(1)
        env.apply(1, {"manager": Action({"order": 0})})
        env.begin_period(2)
        with pytest.raises(ConfigError, match="not a review period"):
            env.apply(2, {"manager": Action({"order": 1})})

    def test_missing_review_order_rejected(self):
        env = make_env(
            "MPR",
            {"demand": trace_demand([0]), "lead": trace_demand([1]), "review_periods": [1]},
            horizon=1,
            seed=0,
        )
        env.begin_period(1)
        with pytest.raises(ConfigError, match="missing its order"):
            env.apply(1, {})

    def test_observation_flags_review_schedule(self):
        log = run(
            "MPR",
            4,
            {"manager": ConstantAgent(q=0)},
            demand=trace_demand([0] * 4),
            lead=trace_demand([1, 1]),
            review_periods=[1, 3],
        )
        flags = [s.observations["manager"].extra["review"] for s in log.steps]
        nexts = [s.observations["manager"].extra["next_review"] for s in log.steps]
        assert flags == [True, False, True, False]
        assert nexts == [1, 3, 3, None]

    def test_review_schedule_validation(self):
        bad = [
            {"review_periods": [2, 2]},
            {"review_periods": [0]},
            {"review_periods": [9]},
            {"review_every": 0},
        ]
        for params in bad:
            with pytest.raises(ConfigError):
                make_env(
                    "MPR",
                    {"demand": trace_demand([0] * 4), "lead": trace_demand([1] * 4), **params},
                    horizon=4,
                    seed=0,
                )

    def test_traces_must_cover_schedule(self):
        with pytest.raises(ConfigError):
            make_env("MPR", {"demand": trace_demand([1, 2])}, horizon=4, seed=0)
        with pytest.raises(ConfigError):
            make_env(
                "MPR",
                {
                    "demand": trace_demand([0] * 4),
                    "lead": trace_demand([1]),
                    "review_periods": [1, 3],
                },
                horizon=4,
                seed=0,
            )


def bg_agents(q):
    return {role: ConstantAgent(q=q) for role in ("retailer", "wholesaler", "distributor", "plant")}


class TestBeerGame:
    def test_steady_state_costs(self):
        # Everyone at 12 on hand, demand 4, orders 4, primed pipeline:
        # stock level never moves, so each role pays h*12 = 6 every period.
        log = run("BG", 5, bg_agents(4), demand=trace_demand([4] * 5))
        for step in log.steps:
            for role in ("retailer", "wholesaler", "distributor", "plant"):
                assert step.costs[role] == Fraction(6)
                assert step.end_state[role]["on_hand"] == 12
        assert log.totals["system"] == Fraction(6 * 4 * 5)

    def test_fill_constrained_shipment(self):
        # Retailer with nothing on hand receives 4 against demand 8: ships
        # the 4, backlogs 4, pays b*4.
        log = run(
            "BG",
            1,
            bg_agents(0),
            demand=trace_demand([8]),
            initial_inventory={"retailer": 0, "wholesaler": 12, "distributor": 12, "plant": 12},
        )
        step = log.steps[0]
        assert step.arrivals["retailer"] == 4
        assert step.shipments["retailer"] == 4
        assert step.unfilled["retailer"] == 4
        assert step.costs["retailer"] == Fraction(4)
        assert step.end_state["retailer"] == {"on_hand": 0, "backlog": 4, "net": -4}

    def test_zero_demand_holding_only(self):
        log = run(
            "BG",
            3,
            bg_agents(0),
            demand=trace_demand([0, 0, 0]),
            initial_pipeline=[],
        )
        for step in log.steps:
            for role in ("retailer", "wholesaler", "distributor", "plant"):
                assert step.costs[role] == Fraction(6)

    def test_plant_source_is_unconstrained(self):
        # The plant's own orders always ship in full from the manufacturer.
        log = run(
            "BG",
            3,
            {**bg_agents(0), "plant": ConstantAgent(q=9)},
            demand=trace_demand([0, 0, 0]),
            initial_pipeline=[],
        )
        assert log.steps[2].arrivals["plant"] == 9

    def test_orders_propagate_instantly(self):
        # The wholesaler's incoming order in period t is the retailer's
        # period-t order; it becomes last_demand in t+1.
        log = run(
            "BG",
            2,
            {**bg_agents(0), "retailer": ConstantAgent(q=5)},
            demand=trace_demand([0, 0]),
            initial_pipeline=[],
        )
        assert log.steps[0].extra["incoming"]["wholesaler"] == 5
        assert log.steps[1].observations["wholesaler"].last_demand == 5

    def test_partner_payload_gated_by_info_sharing(self):
        log = run("BG", 1, bg_agents(4), demand=trace_demand([4]))
        assert log.steps[0].observations["wholesaler"].partners is None

        log = run("BG", 1, bg_agents(4), demand=trace_demand([4]), info_sharing=True)
        partners = log.steps[0].observations["wholesaler"].partners
        assert set(partners) == {"retailer", "distributor", "plant"}
        # 12 initial + the primed pipeline arrival of 4 matured at period start.
        assert partners["retailer"] == {"on_hand": 16, "backlog": 0, "last_order": 0}

    def test_default_demand_steps_up(self):
        log = run("BG", 6, bg_agents(4))
        assert [s.demand["retailer"] for s in log.steps] == [4, 4, 4, 4, 8, 8]

    def test_param_validation(self):
        for params in (
            {"initial_pipeline": [-1]},
            {"initial_inventory": -2},
            {"lead_time": 0},
            {"h": {"retailer": "-1"}},
        ):
            with pytest.raises(ConfigError):
                make_env("BG", params, horizon=2, seed=0)


def twn_agents(**overrides):
    agents = {
        "hub": ConstantAgent(q=0),
        "mini1": ConstantAgent(orders={"hub": 0, "direct": 0}),
        "mini2": ConstantAgent(orders={"hub": 0, "direct": 0}),
        "mini3": ConstantAgent(orders={"hub": 0, "direct": 0}),
    }
    agents.update(overrides)
    return agents


class TestWarehouse:
    def test_direct_channel_arrival(self):
        # Direct factory orders bypass the hub and land after lead 2.
        log = run(
            "TWN",
            3,
            twn_agents(mini1=PlannedAgent([{"hub": 0, "direct": 10}] + [{"hub": 0, "direct": 0}] * 2)),
            demand=constant_demand(0),
        )
        assert log.steps[1].arrivals["mini1"] == 0
        assert log.steps[2].arrivals["mini1"] == 10

    def test_hub_ships_what_it_has(self):
        # Hub holds 5 against an order of 8: ships 5, stays owing 3.
        log = run(
            "TWN",
            2,
            twn_agents(mini1=PlannedAgent([{"hub": 8, "direct": 0}, {"hub": 0, "direct": 0}])),
            demand=constant_demand(0),
            initial_inventory={"hub": 5},
        )
        first = log.steps[0]
        assert first.extra["hub_allocations"] == {"mini1": 5, "mini2": 0, "mini3": 0}
        assert first.shipments["hub"] == 5
        assert first.end_state["hub"] == {"on_hand": 0, "backlog": 3, "net": -3}
        # The allocation reaches the mini one period later.
        assert log.steps[1].arrivals["mini1"] == 5

    def test_owed_orders_served_first(self):
        # mini1's unfilled remainder outranks mini2's later order once the
        # hub is restocked.
        plans1 = [{"hub": 8, "direct": 0}] + [{"hub": 0, "direct": 0}] * 4
        plans2 = [{"hub": 0, "direct": 0}, {"hub": 4, "direct": 0}] + [{"hub": 0, "direct": 0}] * 3
        hub_plans = [{"manufacturer": 10}] + [{"manufacturer": 0}] * 4
        log = run(
            "TWN",
            5,
            twn_agents(
                hub=PlannedAgent(hub_plans),
                mini1=PlannedAgent(plans1),
                mini2=PlannedAgent(plans2),
            ),
            demand=constant_demand(0),
            initial_inventory={"hub": 5},
        )
        assert log.steps[1].extra["hub_allocations"] == {"mini1": 0, "mini2": 0, "mini3": 0}
        # Manufacturer order from period 1 lands at period 5 and clears the
        # queue in arrival order.
        assert log.steps[4].arrivals["hub"] == 10
        assert log.steps[4].extra["hub_allocations"] == {"mini1": 3, "mini2": 4, "mini3": 0}
        assert log.steps[4].end_state["hub"] == {"on_hand": 3, "backlog": 0, "net": 3}

    def test_demand_hits_only_minis(self):
        log = run("TWN", 1, twn_agents(), demand=constant_demand(2))
        step = log.steps[0]
        assert set(step.demand) == {"mini1", "mini2", "mini3"}
        for mini in ("mini1", "mini2", "mini3"):
            assert step.demand[mini] == 2

    def test_observation_route_facts(self):
        log = run("TWN", 1, twn_agents(), demand=constant_demand(0))
        hub_obs = log.steps[0].observations["hub"]
        mini_obs = log.steps[0].observations["mini1"]
        assert hub_obs.extra["lead_time"] == {"manufacturer": 4}
        assert mini_obs.extra["lead_time"] == {"hub": 1, "direct": 2}
        assert mini_obs.extra["in_transit"] == {"hub": 0, "direct": 0}

    def test_route_ordering_enforced(self):
        with pytest.raises(ConfigError):
            make_env("TWN", {"lead_times": {"direct": 1}}, horizon=1, seed=0)
        with pytest.raises(ConfigError):
            make_env("TWN", {"lead_times": {"direct": 9}}, horizon=1, seed=0)
        with pytest.raises(ConfigError):
            make_env("TWN", {"lead_times": {"shortcut": 2}}, horizon=1, seed=0)


class TestDualSource:
    def test_purchase_premium_recorded(self):
        # 5 regular + 5 expedited at unit costs 1 and 2: 15 spent.
        log = run(
            "SCN",
            1,
            {"buyer": ConstantAgent(orders={"regular": 5, "expedited": 5})},
            demand=constant_demand(0),
            h=0,
        )
        step = log.steps[0]
        assert step.extra["purchase_cost"] == 15
        assert step.costs["buyer"] == Fraction(15)

    def test_channel_lead_times(self):
        plans = [{"regular": 7, "expedited": 3}] + [{"regular": 0, "expedited": 0}] * 4
        log = run(
            "SCN",
            5,
            {"buyer": PlannedAgent(plans)},
            demand=constant_demand(0),
            initial_inventory=0,
        )
        arrivals = [s.arrivals["buyer"] for s in log.steps]
        # Expedited lands at t+1, regular at t+4.
        assert arrivals == [0, 3, 0, 0, 7]

    def test_holding_and_backlog_costs(self):
        log = run(
            "SCN",
            2,
            {"buyer": ConstantAgent(orders={"regular": 0, "expedited": 0})},
            demand=constant_demand(8),
            initial_inventory=10,
        )
        # Period 1: level 2 -> h*2. Period 2: level -6 -> b*54, h=1, b=9.
        assert log.steps[0].costs["buyer"] == Fraction(2)
        assert log.steps[1].costs["buyer"] == Fraction(54)
        assert log.steps[1].end_state["buyer"]["backlog"] == 6

    def test_observation_channel_facts(self):
        log = run(
            "SCN",
            1,
            {"buyer": ConstantAgent(orders={"regular": 0, "expedited": 0})},
            demand=constant_demand(0),
        )
        obs = log.steps[0].observations["buyer"]
        assert obs.extra["lead_time"] == {"regular": 4, "expedited": 1}
        assert obs.extra["unit_cost"] == {"regular": 1, "expedited": 2}

    def test_channel_ordering_enforced(self):
        with pytest.raises(ConfigError):
            make_env("SCN", {"lead_times": {"expedited": 4}}, horizon=1, seed=0)
        with pytest.raises(ConfigError):
            make_env("SCN", {"unit_costs": {"expedited": 1}}, horizon=1, seed=0)
        with pytest.raises(ConfigError):
            make_env("SCN", {"unit_costs": {"premium": 3}}, horizon=1, seed=0)


class TestActionValidation:
    def test_exact_channel_set_required(self):
        with pytest.raises(ConfigError, match="missing channels"):
            validate_action(Action({"regular": 1}), ("regular", "expedited"), "buyer")
        with pytest.raises(ConfigError, match="unknown channels"):
            validate_action(
                Action({"regular": 1, "expedited": 0, "teleport": 2}),
                ("regular", "expedited"),
                "buyer",
            )

    @pytest.mark.parametrize("qty", [-1, True, 1.5, "3", None])
    def test_quantities_must_be_nonnegative_ints(self, qty):
        with pytest.raises(ConfigError):
            validate_action(Action({"order": qty}), ("order",), "vendor")

    def test_non_action_rejected(self):
        with pytest.raises(ConfigError, match="must be an Action"):
            validate_action({"order": 1}, ("order",), "vendor")

    def test_valid_action_passes_through(self):
        action = Action({"order": 3})
        assert validate_action(action, ("order",), "vendor") is action

    def test_unknown_env_id(self):
        with pytest.raises(ConfigError):
            make_env("XXX", {}, horizon=1, seed=0)
