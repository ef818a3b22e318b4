from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from vaxchain.costmodel import (
    DEFAULT_QUOTE,
    WEI_PER_ETH,
    Cost,
    CostReport,
    EthQuote,
    GasKind,
    GasSchedule,
    InfraCost,
    InvalidQuote,
    break_even_cycles,
    default_calibration,
    eth_to_wei,
    format_cost_table,
    format_eth,
    full_cycle_cost,
    onboarding_cost,
    op_cost,
    scenario_cost,
)
from vaxchain.errors import ConfigurationError

# published per-call costs at US$167/ETH
TABLE = {
    GasKind.CREATE_ACCOUNT: ("0.000418", "0.069806"),
    GasKind.ADD_MEMBER: ("0.002718", "0.453906"),
    GasKind.CHECKIN: ("0.000739", "0.123413"),
    GasKind.CONFIRMATION: ("0.000003", "0.000501"),
    GasKind.CHECKOUT: ("0.000034", "0.005678"),
}


@pytest.fixture
def schedule():
    return default_calibration()


def test_gas_price_is_20_gwei(schedule):
    assert schedule.gas_price_wei == 20 * 10**9
    assert schedule.gas_price_eth == Decimal("0.00000002")


@pytest.mark.parametrize("kind", list(GasKind))
def test_units_back_derive_from_ether(schedule, kind):
    # arithmetic oracle: units = eth / gas_price, computed with exact fractions
    eth, _ = TABLE[kind]
    expected_units = Fraction(eth) / Fraction(2, 10**8)
    assert expected_units.denominator == 1
    assert schedule.units(kind) == expected_units.numerator


@pytest.mark.parametrize("kind", list(GasKind))
def test_op_cost_matches_table(schedule, kind):
    eth, usd = TABLE[kind]
    cost = op_cost(schedule, DEFAULT_QUOTE, kind)
    assert cost.eth == Decimal(eth)
    assert cost.usd == Decimal(usd)


def test_op_cost_accepts_string_kind(schedule):
    assert op_cost(schedule, DEFAULT_QUOTE, "checkin") == op_cost(schedule, DEFAULT_QUOTE, GasKind.CHECKIN)


def test_unknown_kind(schedule):
    with pytest.raises(ConfigurationError):
        op_cost(schedule, DEFAULT_QUOTE, "deploy")


@pytest.mark.parametrize("rate", ["0", "-5", "nan"])
def test_invalid_quote(rate):
    with pytest.raises(InvalidQuote):
        EthQuote(Decimal(rate))


def test_full_cycle(schedule):
    full = full_cycle_cost(schedule, DEFAULT_QUOTE)
    assert full.eth == Decimal("0.000776")
    assert full.usd == Decimal("0.129592")
    parts = [op_cost(schedule, DEFAULT_QUOTE, k) for k in (GasKind.CHECKIN, GasKind.CONFIRMATION, GasKind.CHECKOUT)]
    assert full.wei == sum(p.wei for p in parts)


def test_onboarding(schedule):
    onboard = onboarding_cost(schedule, DEFAULT_QUOTE)
    assert onboard.eth == Decimal("0.003136")
    assert onboard.usd == Decimal("0.523712")
    assert all(onboard.wei >= op_cost(schedule, DEFAULT_QUOTE, k).wei for k in GasKind)


def test_zero_units_rejected_at_construction():
    with pytest.raises(ConfigurationError):
        GasSchedule(20 * 10**9, 20_900, 135_900, 0, 0, 0)
    with pytest.raises(ConfigurationError):
        GasSchedule(0, 1, 1, 1, 1, 1)


def test_usd_rounds_half_up():
    schedule = GasSchedule(10**12, 1, 1, 1, 1, 1)  # 1e-6 ETH per call
    assert op_cost(schedule, EthQuote(Decimal("0.5")), "checkin").micro_usd == 1  # 0.5 micro-dollar
    assert op_cost(schedule, EthQuote(Decimal("0.49")), "checkin").micro_usd == 0


def test_infra_monthly():
    infra = InfraCost()
    assert infra.monthly_usd == Decimal("123.75")
    assert InfraCost(2, Decimal("10")).monthly_micro_usd == 20_000_000
    with pytest.raises(ConfigurationError):
        InfraCost(0)


def test_break_even(schedule):
    assert break_even_cycles(InfraCost(), schedule, DEFAULT_QUOTE) == 123_750_000 // 129_592 == 954
    assert break_even_cycles(InfraCost(10), schedule, DEFAULT_QUOTE) == 247_500_000 // 129_592 == 1909


def test_break_even_equal_costs_is_one():
    schedule = GasSchedule(10**12, 1, 1, 1, 1, 1)  # full cycle 3e-6 ETH
    quote = EthQuote(Decimal("1000000"))  # -> US$3 per cycle
    assert break_even_cycles(InfraCost(1, Decimal("3")), schedule, quote) == 1


@given(
    st.integers(1, 10**6), st.integers(1, 10**6),
    st.integers(1, 50), st.integers(1, 50),
)
def test_break_even_monotone(units_a, units_b, nodes_a, nodes_b):
    cheap, dear = sorted((units_a, units_b))
    few, many = sorted((nodes_a, nodes_b))
    price = 10**10

    def be(units, nodes):
        return break_even_cycles(InfraCost(nodes), GasSchedule(price, 1, 1, units, units, units), DEFAULT_QUOTE)

    try:
        assert be(dear, few) <= be(cheap, few)
        assert be(cheap, few) <= be(cheap, many)
    except ConfigurationError:
        pass  # cycle rounds to zero dollars


@given(st.lists(st.sampled_from(list(GasKind)), max_size=30))
def test_scenario_cost_additive(ops):
    schedule = default_calibration()
    counts = {k: ops.count(k) for k in GasKind}
    report = scenario_cost(counts, "main")
    assert report.total.wei == sum(op_cost(schedule, DEFAULT_QUOTE, k).wei for k in ops)


def test_scenario_cost_main_onboarding_plus_cycle():
    counts = {GasKind.CREATE_ACCOUNT: 1, GasKind.ADD_MEMBER: 1, GasKind.CHECKIN: 1,
              GasKind.CONFIRMATION: 1, GasKind.CHECKOUT: 1}
    report = scenario_cost(counts, "main")
    assert report.total.eth == Decimal("0.003912")  # 0.003136 + 0.000776
    assert report.infra_monthly_usd == 0


def test_scenario_cost_private_has_only_infra():
    report = scenario_cost({GasKind.CHECKIN: 40}, "private")
    assert report.total == Cost()
    assert all(c == Cost() for c in report.per_op.values())
    assert report.infra_monthly_usd == Decimal("123.75")


def test_scenario_cost_zero_counts():
    assert scenario_cost({}, "main").total == Cost()


def test_scenario_cost_rejects_negative_counts():
    with pytest.raises(ConfigurationError):
        scenario_cost({GasKind.CHECKIN: -1}, "main")


def test_cost_report_round_trip():
    report = scenario_cost({GasKind.CHECKIN: 2}, "main")
    assert CostReport.from_dict(report.to_dict()) == report


def test_format_eth():
    assert format_eth(eth_to_wei("0.000418")) == "0.000418"
    assert format_eth(WEI_PER_ETH) == "1.000000"
    assert format_eth(1) == "0.000000000000000001"


def test_table_layout():
    text = format_cost_table()
    assert "Full vaccination cycle    0.000776 ETH (~US$0.129592)" in text
    assert text.splitlines()[-1].endswith("US$123.75")
