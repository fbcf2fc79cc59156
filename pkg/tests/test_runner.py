"""Every experiment's success path through the shared runner."""

import pytest

from andlab.config import config_from_mapping
from andlab.errors import ConfigurationError
from andlab.runner import EXPERIMENTS, run_experiment

SEED = 20260823


def cfg_of(mapping: dict | None = None):
    data = {"mc": {"master_seed": SEED}}
    for key, value in (mapping or {}).items():
        if isinstance(value, dict):
            data.setdefault(key, {}).update(value)
        else:
            data[key] = value
    return config_from_mapping(data)


def test_registry_is_complete():
    assert sorted(EXPERIMENTS) == [
        "combes-thomas",
        "decay-fit",
        "dynamics",
        "ldp",
        "mc-edge",
        "mc-singular",
        "mixing",
        "ns-test",
        "sample-field",
        "scaling-run",
        "spectrum",
    ]


def test_unknown_name_is_a_configuration_error():
    with pytest.raises(ConfigurationError, match="unknown experiment"):
        run_experiment("nope", cfg_of())


def test_sample_field():
    result = run_experiment("sample-field", cfg_of())
    assert result.columns == ["x1", "value"]
    assert len(result.rows) == result.summary["sites"]
    s = result.summary
    assert s["experiment"] == "sample-field"
    assert s["master_seed"] == SEED
    assert s["value_min"] <= s["value_mean"] <= s["value_max"]
    assert s["s0"] == pytest.approx(0.5 * s["gamma_x_min"])
    assert "workers" not in s["config"]


def test_mixing():
    cfg = cfg_of(
        {
            "experiments": {
                "mixing": {"distances": [1, 2, 3], "epsilons": [0.2, 0.1, 0.05], "trials": 1000}
            }
        }
    )
    result = run_experiment("mixing", cfg)
    assert [row[0] for row in result.rows] == [1, 2, 3]
    s = result.summary
    assert s["exact_independence_beyond"] == 2
    assert s["trials"] == 1000
    assert s["log_holder"]["kappa"] > 0
    # dependence at distance 1, none measurable beyond the window overlap
    assert result.rows[0][1] > 3.0 * result.rows[0][2]
    assert abs(result.rows[2][1]) < 0.05


def test_ns_test_default_energy():
    result = run_experiment("ns-test", cfg_of())
    (row,) = result.rows
    assert result.summary["verdict"] in ("NS", "S")
    assert row[0] == pytest.approx(0.5 * result.summary["e_star"])
    assert row[3] == pytest.approx(result.summary["threshold"])


def test_combes_thomas():
    result = run_experiment("combes-thomas", cfg_of())
    s = result.summary
    assert s["total_violations"] == 0
    assert s["pairs"] >= 100
    assert len(s["combos"]) == 2  # two etas, one gamma by default
    assert len(result.rows) == 2 * s["pairs"]
    for combo in s["combos"]:
        assert combo["energy"] == pytest.approx(s["e0"] - combo["eta"])
        assert 0 < combo["max_ratio"] <= 1.0


def test_ldp():
    cfg = cfg_of({"experiments": {"ldp": {"lengths": [2, 4], "trials": 1000}}})
    result = run_experiment("ldp", cfg)
    assert len(result.rows) == 2
    s = result.summary
    assert s["markov_exact_ok"] is True
    assert s["non_increasing"] is True
    assert s["fitted_rate"] is None or s["fitted_rate"] > 0


def test_mc_edge():
    cfg = cfg_of({"mc": {"trials": 120}})
    result = run_experiment("mc-edge", cfg)
    events = {row[0]: row for row in result.rows}
    assert set(events) == {"edge-below", "edge-below-b"}
    length = result.summary["length"]
    assert events["edge-below"][1] == pytest.approx(length**-0.5)
    assert events["edge-below-b"][1] == pytest.approx(length**-2.0)
    assert events["edge-below-b"][2] <= events["edge-below"][2]
    assert result.summary["e0_min"] <= result.summary["e0_mean"] <= result.summary["e0_max"]


def test_mc_singular():
    cfg = cfg_of({"mc": {"trials": 100}})
    result = run_experiment("mc-singular", cfg)
    s = result.summary
    assert s["hits"] >= s["edge_hits"]
    assert s["hits"] <= s["edge_hits"] + s["certificate_violations"]
    assert len(result.rows) == s["energy_count"]
    assert result.columns == ["energy", "s_count"]


def test_decay_fit():
    cfg = cfg_of({"field": {"scale": 10.0}, "experiments": {"decay": {"k": 3}}})
    result = run_experiment("decay-fit", cfg)
    assert len(result.rows) == 3
    assert result.summary["k"] == 3
    assert result.summary["localized_count"] >= 1
    eigenvalues = [row[1] for row in result.rows]
    assert eigenvalues == sorted(eigenvalues)


def test_dynamics():
    cfg = cfg_of({"experiments": {"dynamics": {"t_count": 8}}})
    result = run_experiment("dynamics", cfg)
    assert result.columns == ["time", "moment", "free_moment"]
    assert len(result.rows) == 8
    s = result.summary
    assert s["interval_rank"] >= 1
    assert s["interval_low"] < s["e0"] < s["interval_high"]
    assert s["free_control"] is not None and s["free_control"]["interval_rank"] >= 1
    assert all(row[2] is not None for row in result.rows)
    assert s["grid_max"] == pytest.approx(max(row[1] for row in result.rows))


def test_dynamics_empty_interval():
    cfg = cfg_of(
        {"experiments": {"dynamics": {"interval_low": 1.0, "interval_high": 0.5}}}
    )
    with pytest.raises(ConfigurationError, match="interval"):
        run_experiment("dynamics", cfg)


def test_scaling_run():
    cfg = cfg_of({"mc": {"trials": 100}, "scales": {"count": 2}})
    result = run_experiment("scaling-run", cfg)
    s = result.summary
    assert s["lengths"] == [8, 23]
    assert [row[0] for row in result.rows] == [8, 23]
    assert len(s["per_scale"]) == 2
    for row in result.rows:
        assert row[2] >= row[7]  # hits include the edge hits
        assert row[6] is not None  # comparison bound present at every scale


def test_export_matrix_extras():
    cfg = cfg_of({"output": {"export_matrix": True}})
    result = run_experiment("spectrum", cfg)
    assert set(result.extras) == {"spectrum.matrix.mtx"}
    assert result.extras["spectrum.matrix.mtx"].startswith("%%MatrixMarket")
