import json

import numpy as np
import pytest

from oatune.arrays import catalog_lookup
from oatune.casestudy import CNN_TABLE, RNN_TABLE, rnn_config
from oatune.design import (
    FactorLevelTable,
    FactorSpec,
    TrialPlan,
    load_config,
    load_table,
    make_plan,
    savings_fraction,
)
from oatune.errors import (
    DuplicateFactorName,
    InvalidCount,
    SchemaError,
    UnequalLevelCounts,
)


def doc(factors, **extra):
    return {"schema_version": 1, "factors": [{"name": n, "levels": lv} for n, lv in factors], **extra}


def test_load_rnn_table():
    table = load_table(doc([("lr", [0.005, 0.01, 0.015]), ("λ", [0.004, 0.008, 0.012]),
                            ("n_l", [4, 5, 6]), ("n_n", [32, 64, 96])]))
    assert table == RNN_TABLE
    assert table.levels == 3 and len(table) == 4


def test_load_two_level_single_factor():
    table = load_table(doc([("flag", [0, 1])]))
    assert table.levels == 2 and len(table) == 1


def test_unequal_level_counts():
    with pytest.raises(UnequalLevelCounts):
        load_table(doc([("a", [1, 2, 3]), ("b", [1, 2])]))


def test_duplicate_names_and_levels():
    with pytest.raises(DuplicateFactorName):
        load_table(doc([("a", [1, 2]), ("a", [3, 4])]))
    with pytest.raises(SchemaError):
        load_table(doc([("a", [1, 1])]))


@pytest.mark.parametrize("bad", [
    {"factors": [{"name": "a", "levels": [1, 2]}]},
    {"schema_version": 2, "factors": [{"name": "a", "levels": [1, 2]}]},
    {"schema_version": 1, "factors": []},
    {"schema_version": 1, "factors": [{"name": "a", "levels": [True, False]}]},
    {"schema_version": 1, "factors": [{"name": "a", "levels": [1, 2]}], "extra": 1},
    {"schema_version": 1, "factors": [{"name": "a", "levels": [1, 2]}], "objective": {"direction": "up"}},
    {"schema_version": 1, "factors": [{"name": "a", "levels": [1, 2]}], "repetitions": 0},
])
def test_schema_errors(bad):
    with pytest.raises(SchemaError):
        load_config(bad)


def test_config_from_text_and_path(tmp_path):
    cfg = rnn_config(["oat-synth", "--spec", "table4"], repetitions=5)
    text = json.dumps(cfg, ensure_ascii=False)
    path = tmp_path / "tune.json"
    path.write_text(text, encoding="utf-8")
    a, b = load_config(text), load_config(path)
    assert a == b
    assert a.repetitions == 5 and a.command == ("oat-synth", "--spec", "table4")
    assert load_config(a.to_dict()) == a


def test_shell_style_command():
    cfg = load_config(doc([("a", [1, 2])], command="python3 train.py --fast"))
    assert cfg.command == ("python3", "train.py", "--fast")


def test_not_json():
    with pytest.raises(SchemaError):
        load_config("{not json")


def test_tuple_levels_round_trip():
    cfg = load_config(CNN_TABLE.to_dict())
    assert cfg.table.factor("f'").levels == ((1, 2), (1, 4), (1, 6))


def test_rnn_plan_rows(rnn_plan):
    assert rnn_plan.rows == 9
    assert rnn_plan.assignments[3] == {"lr": 0.01, "λ": 0.004, "n_l": 5, "n_n": 96}


def test_cnn_plan_row6(cnn_plan):
    assert cnn_plan.assignments[5] == {"lr'": 0.003, "f'": (1, 6), "n_l'": 1, "n_n'": 128}


def test_single_factor_plan_cycles_levels():
    table = FactorLevelTable((FactorSpec("x", ("a", "b", "c")),))
    plan = make_plan(table)
    values = [a["x"] for a in plan.assignments]
    assert len(values) == 9
    assert all(values.count(v) == 3 for v in "abc")


def test_plan_balance(rnn_plan):
    for f in RNN_TABLE.factors:
        seen = [a[f.name] for a in rnn_plan.assignments]
        assert all(seen.count(v) == rnn_plan.rows // 3 for v in f.levels)


def test_plan_id_determinism():
    a = make_plan(load_table(rnn_config()))
    b = make_plan(load_table(json.dumps(rnn_config(), ensure_ascii=False)))
    assert a.plan_id == b.plan_id
    assert make_plan(RNN_TABLE, {"repetitions": 2}).plan_id != a.plan_id
    other = load_table(doc([("lr", [0.005, 0.01, 0.02]), ("λ", [0.004, 0.008, 0.012]),
                            ("n_l", [4, 5, 6]), ("n_n", [32, 64, 96])]))
    assert make_plan(other).plan_id != a.plan_id


def test_plan_round_trip(rnn_plan):
    back = TrialPlan.from_dict(json.loads(json.dumps(rnn_plan.to_dict(), ensure_ascii=False)))
    assert back.plan_id == rnn_plan.plan_id
    assert back.assignments == rnn_plan.assignments


def test_corrupt_plan_file(rnn_plan):
    d = rnn_plan.to_dict()
    d["array"]["entries"][0] = [1, 1, 1, 2]
    with pytest.raises(SchemaError):
        TrialPlan.from_dict(d)


def test_plan_with_catalog_array():
    table = FactorLevelTable(tuple(FactorSpec(f"b{i}", (0, 1)) for i in range(5)))
    plan = make_plan(table, array=catalog_lookup("L8(2^7)").columns(5))
    assert plan.rows == 8
    assert np.array_equal(plan.array.entries, catalog_lookup("L8(2^7)").entries[:, :5])


def test_savings():
    assert savings_fraction(9, 3, 3) == pytest.approx(2 / 3)
    assert savings_fraction(9, 3, 4) == pytest.approx(8 / 9)
    assert savings_fraction(27, 3, 3) == 0.0
    with pytest.raises(InvalidCount):
        savings_fraction(0, 3, 3)
    with pytest.raises(InvalidCount):
        savings_fraction(28, 3, 3)
