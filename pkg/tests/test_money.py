"""Money value semantics: exactness, scale rules, currency guards."""

from decimal import Decimal

import pytest
from hypothesis import given
import hypothesis.strategies as st

from pacsim.errors import CurrencyMismatch
from pacsim.money import InvalidAmount, MoneyAmount, format_decimal, minor_units, scale_of

from support import amounts


class TestConstruction:
    def test_normalizes_to_minor_units(self):
        assert str(MoneyAmount("USD", Decimal("100")).value) == "100.00"

    def test_text_keeps_trailing_zeros(self):
        assert MoneyAmount("USD", Decimal("30.5")).text() == "30.50"

    def test_zero_minor_unit_currency(self):
        assert MoneyAmount("JPY", Decimal("250")).text() == "250"

    def test_rejects_excess_scale(self):
        with pytest.raises(InvalidAmount):
            MoneyAmount("USD", Decimal("1.001"))
        with pytest.raises(InvalidAmount):
            MoneyAmount("JPY", Decimal("1.5"))

    def test_rejects_negative(self):
        with pytest.raises(InvalidAmount):
            MoneyAmount("USD", Decimal("-0.01"))

    def test_rejects_float(self):
        with pytest.raises(InvalidAmount):
            MoneyAmount("USD", 1.23)  # type: ignore[arg-type]

    def test_rejects_bad_currency(self):
        for bad in ("usd", "US", "USDD", "U1D"):
            with pytest.raises(InvalidAmount):
                MoneyAmount(bad, Decimal("1.00"))

    def test_three_decimal_currency(self):
        assert MoneyAmount("KWD", Decimal("1.234")).text() == "1.234"


class TestArithmetic:
    def test_addition_exact(self):
        total = MoneyAmount("USD", Decimal("10.00")) + MoneyAmount("USD", Decimal("20.50"))
        assert total == MoneyAmount("USD", Decimal("30.50"))

    def test_cross_currency_addition_rejected(self):
        with pytest.raises(CurrencyMismatch):
            MoneyAmount("USD", Decimal("1.00")) + MoneyAmount("EUR", Decimal("1.00"))

    def test_subtraction_below_zero_rejected(self):
        with pytest.raises(InvalidAmount):
            MoneyAmount("USD", Decimal("1.00")) - MoneyAmount("USD", Decimal("2.00"))

    @given(amounts("USD"), amounts("USD"))
    def test_addition_commutes(self, a, b):
        assert a + b == b + a

    @given(amounts("EUR"))
    def test_text_parses_back(self, a):
        assert Decimal(a.text()) == a.value


class TestHelpers:
    def test_minor_units_table(self):
        assert minor_units("USD") == 2
        assert minor_units("JPY") == 0
        assert minor_units("BHD") == 3

    def test_scale_of(self):
        assert scale_of(Decimal("1")) == 0
        assert scale_of(Decimal("1.50")) == 2
        assert scale_of(Decimal("1E+2")) == 0

    @given(st.integers(min_value=0, max_value=10**12))
    def test_format_decimal_round_trips_cents(self, n):
        value = Decimal(n).scaleb(-2)
        assert Decimal(format_decimal(value, 2)) == value
