from fractions import Fraction

import pytest

from coalstab.errors import InputError
from coalstab.tables import ResultTable, format_cell, parse_cell


def sample_table():
    table = ResultTable(("name", "count", "price", "ratio"),
                        provenance={"command": "demo", "seed": "7",
                                    "version": "0.1.0"})
    table.append("repeat", 2, Fraction(9, 2), 0.5)
    table.append("scatter", 0, Fraction(3, 1), 0.0)
    return table


class TestRoundTrips:
    def test_csv(self):
        table = sample_table()
        again = ResultTable.from_csv(table.to_csv())
        assert again == table

    def test_json(self):
        table = sample_table()
        again = ResultTable.from_json(table.to_json())
        assert again == table

    def test_rationals_stay_rational(self):
        table = ResultTable(("x",))
        table.append(Fraction(5))
        again = ResultTable.from_csv(table.to_csv())
        assert again.rows[0][0] == Fraction(5)
        assert isinstance(again.rows[0][0], Fraction)

    def test_json_never_floats_rationals(self):
        table = sample_table()
        assert '"9/2"' in table.to_json()

    def test_provenance_strips_to_plain_csv(self):
        text = sample_table().to_csv()
        stripped = "\n".join(line for line in text.splitlines()
                             if not line.startswith("#"))
        table = ResultTable.from_csv(stripped)
        assert table.provenance == {}
        assert len(table.rows) == 2

    def test_cell_formats(self):
        assert format_cell(Fraction(1, 3)) == "1/3"
        assert parse_cell("1/3") == Fraction(1, 3)
        assert parse_cell("-4") == -4
        assert parse_cell("0.5") == 0.5
        assert parse_cell("repeat") == "repeat"
        with pytest.raises(InputError):
            format_cell(object())

    def test_row_width_checked(self):
        table = ResultTable(("a", "b"))
        with pytest.raises(InputError):
            table.append(1)


class TestDecimalColumns:
    def test_companion_columns_added(self):
        table = sample_table().with_decimal_columns()
        assert table.columns == ("name", "count", "price", "price_dec", "ratio")
        assert table.rows[0][3] == 4.5

    def test_no_rationals_no_change(self):
        table = ResultTable(("a",), [(1,), (2,)])
        assert table.with_decimal_columns().columns == ("a",)
