"""Command-line interface: wiring, formats, and exit codes.

Every test drives `cli.main` in-process with capsys; handlers are compared
against direct library calls rather than re-derived arithmetic.
"""

import json

import pytest

from causalkit import (
    DiscreteDataset,
    Pattern,
    ProbTable,
    apply_missingness,
    backdoor_adjust,
    cli,
    greedy_score_search,
    make_policy,
    pc,
    recover_joint,
    simulate,
)
from causalkit import fixtures as fx
from causalkit.graph import get_max_nodes, set_max_nodes


@pytest.fixture(scope="session")
def fixdir(tmp_path_factory):
    """All built-in example files, written once via the CLI itself."""
    dest = tmp_path_factory.mktemp("fixtures")
    assert cli.main(["fixtures", "--dest", str(dest)]) == 0
    return dest


@pytest.fixture(scope="session")
def datadir(tmp_path_factory):
    """Sampled CSVs used by estimator/discovery/missingness subcommands."""
    dest = tmp_path_factory.mktemp("data")
    (dest / "xy.csv").write_text(fx.xy_scm().sample(400, seed=3).to_csv())
    xy = fx.xy_scm().sample(400, seed=3)
    mar = apply_missingness(xy, fx.mgraph_mar(), fx.mask_cpts(fx.mgraph_mar()), 7)
    (dest / "xy_mar.csv").write_text(mar.to_csv())
    self_mask = apply_missingness(
        xy,
        fx.mgraph_self_masking(),
        fx.mask_cpts(fx.mgraph_self_masking()),
        7,
    )
    (dest / "xy_self.csv").write_text(self_mask.to_csv())
    (dest / "cc.csv").write_text(
        fx.collider_chain_scm().sample(10000, seed=2).to_csv()
    )
    return dest


def run(capsys, argv):
    rc = cli.main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def run_json(capsys, argv):
    rc, out, err = run(capsys, argv + ["--out", "json"])
    assert rc == 0, err
    return json.loads(out)


# -- fixture export -----------------------------------------------------------


def test_fixtures_written(fixdir):
    names = {p.name for p in fixdir.iterdir()}
    expected = {
        "kidney.csv",
        "kidney_graph.json",
        "kidney_scm.json",
        "confounded_scm.json",
        "sprinkler_scm.json",
        "smoking_graph.json",
        "covid_graph.json",
        "covid_scm.json",
        "covid_study.csv",
        "age_strata.json",
        "xy_scm.json",
        "collider_chain_graph.json",
        "collider_chain_scm.json",
        "bandit_two_arm.json",
        "bandit_five_arm.json",
        "bandit_paradoxical.json",
        "bandit_single_intent.json",
    }
    for stem in ("mcar", "mar", "self_masking", "two_sided"):
        expected.add(f"mgraph_{stem}.json")
        expected.add(f"mgraph_{stem}_mask.json")
    assert names == expected


# -- graph subcommands ----------------------------------------------------------


def test_dsep_text_and_json(fixdir, capsys):
    graph = str(fixdir / "collider_chain_graph.json")
    rc, out, _ = run(capsys, ["dsep", "--graph", graph, "--x", "X", "--y", "Y"])
    assert rc == 0
    assert out == "d-separated: true\n"

    rc, out, _ = run(
        capsys,
        ["dsep", "--graph", graph, "--x", "X", "--y", "Y", "--given", "Z"],
    )
    assert rc == 0
    assert out == "d-separated: false\n"

    payload = run_json(
        capsys, ["dsep", "--graph", graph, "--x", "X", "--y", "Y"]
    )
    assert payload == {
        "x": ["X"],
        "y": ["Y"],
        "given": [],
        "d_separated": True,
    }


def test_backdoor_check(fixdir, capsys):
    graph = str(fixdir / "kidney_graph.json")
    base = [
        "backdoor-check",
        "--graph",
        graph,
        "--x",
        "treatment",
        "--y",
        "recovery",
    ]
    rc, out, _ = run(capsys, base + ["--adjust", "severity"])
    assert rc == 0
    assert out == "satisfies backdoor criterion: true\n"
    rc, out, _ = run(capsys, base)
    assert out == "satisfies backdoor criterion: false\n"
    payload = run_json(capsys, base + ["--adjust", "severity"])
    assert payload["satisfies_backdoor_criterion"] is True
    assert payload["adjust"] == ["severity"]


def test_identify_matches_library(fixdir, capsys):
    graph = fx.kidney_graph()
    expected_r1 = graph.rule1_applicable(
        "severity", "recovery", ["treatment"], []
    )
    expected_r3 = graph.rule3_applicable("recovery", "severity")
    payload = run_json(
        capsys,
        [
            "identify",
            "--graph",
            str(fixdir / "kidney_graph.json"),
            "--x",
            "recovery",
            "--y",
            "severity",
            "--w",
            "treatment",
        ],
    )
    assert payload["rule1_applicable"] is expected_r1
    assert payload["rule3_applicable"] is expected_r3
    assert expected_r3 is True

    rc, out, _ = run(
        capsys,
        [
            "identify",
            "--graph",
            str(fixdir / "kidney_graph.json"),
            "--x",
            "recovery",
            "--y",
            "severity",
            "--w",
            "treatment",
        ],
    )
    assert rc == 0
    lines = out.splitlines()
    assert lines[0].startswith("rule 1 ")
    assert lines[1].endswith(
        "applicable" if expected_r3 else "not applicable"
    )


# -- model subcommands ----------------------------------------------------------


def test_scm_sample_stdout_matches_library(fixdir, capsys):
    rc, out, _ = run(
        capsys,
        [
            "scm",
            "sample",
            "--model",
            str(fixdir / "confounded_scm.json"),
            "--n",
            "6",
            "--seed",
            "4",
        ],
    )
    assert rc == 0
    assert out == fx.confounded_scm().sample(6, 4).to_csv()


def test_scm_sample_save(fixdir, tmp_path, capsys):
    target = tmp_path / "sample.csv"
    rc, out, _ = run(
        capsys,
        [
            "scm",
            "sample",
            "--model",
            str(fixdir / "confounded_scm.json"),
            "--n",
            "6",
            "--seed",
            "4",
            "--save",
            str(target),
        ],
    )
    assert rc == 0
    assert out == f"wrote 6 rows to {target}\n"
    assert target.read_text() == fx.confounded_scm().sample(6, 4).to_csv()


def test_scm_query_interventional(fixdir, capsys):
    model = str(fixdir / "covid_scm.json")
    rc, out, _ = run(
        capsys,
        [
            "scm",
            "query",
            "--model",
            model,
            "--target",
            "antibody=1",
            "--do",
            "test=1",
        ],
    )
    assert rc == 0
    assert out == "0.230\n"
    payload = run_json(
        capsys,
        [
            "scm",
            "query",
            "--model",
            model,
            "--target",
            "antibody=1",
            "--do",
            "test=1",
        ],
    )
    assert payload["probability"] == pytest.approx(0.23, abs=1e-12)
    assert payload["do"] == {"test": "1"}


def test_scm_query_conditional_matches_library(fixdir, capsys):
    expected = fx.covid_scm().query_conditional(
        {"antibody": "1"}, {"test": "1"}
    )
    payload = run_json(
        capsys,
        [
            "scm",
            "query",
            "--model",
            str(fixdir / "covid_scm.json"),
            "--target",
            "antibody=1",
            "--given",
            "test=1",
        ],
    )
    assert payload["probability"] == pytest.approx(expected, abs=1e-15)


# -- estimation subcommands -------------------------------------------------------


def test_estimate_do_text_rounding(fixdir, capsys):
    data = str(fixdir / "kidney.csv")
    base = [
        "estimate",
        "do",
        "--data",
        data,
        "--y",
        "recovery=1",
        "--adjust",
        "severity",
    ]
    rc, out, _ = run(capsys, base + ["--x", "treatment=A"])
    assert rc == 0
    assert out == "0.833\n"
    rc, out, _ = run(capsys, base + ["--x", "treatment=B"])
    assert out == "0.779\n"


def test_estimate_do_json_full_precision(fixdir, capsys):
    expected = 81 / 87 * (357 / 700) + 192 / 263 * (343 / 700)
    payload = run_json(
        capsys,
        [
            "estimate",
            "do",
            "--data",
            str(fixdir / "kidney.csv"),
            "--x",
            "treatment=A",
            "--y",
            "recovery=1",
            "--adjust",
            "severity",
        ],
    )
    assert payload["estimate"] == pytest.approx(expected, abs=1e-15)
    assert payload["route"] == "sum"


def test_estimate_do_ratio_and_smooth(fixdir, capsys):
    data = str(fixdir / "kidney.csv")
    base = [
        "estimate",
        "do",
        "--data",
        data,
        "--x",
        "treatment=A",
        "--y",
        "recovery=1",
        "--adjust",
        "severity",
    ]
    ratio = run_json(capsys, base + ["--ratio"])
    assert ratio["route"] == "ratio"
    assert ratio["estimate"] == pytest.approx(
        81 / 87 * (357 / 700) + 192 / 263 * (343 / 700), abs=1e-12
    )
    smooth = run_json(capsys, base + ["--smooth"])
    expected = backdoor_adjust(
        fx.kidney_dataset(),
        "treatment",
        "A",
        "recovery",
        "1",
        ["severity"],
        laplace=True,
    )
    assert smooth["estimate"] == pytest.approx(expected, abs=1e-15)


def test_estimate_ace(fixdir, capsys):
    payload = run_json(
        capsys,
        [
            "estimate",
            "ace",
            "--data",
            str(fixdir / "kidney.csv"),
            "--x",
            "treatment",
            "--treat",
            "A",
            "--control",
            "B",
            "--y",
            "recovery=1",
            "--adjust",
            "severity",
        ],
    )
    a = 81 / 87 * (357 / 700) + 192 / 263 * (343 / 700)
    b = 234 / 270 * (357 / 700) + 55 / 80 * (343 / 700)
    assert payload["ace"] == pytest.approx(a - b, abs=1e-15)


def test_estimate_simpson_text(fixdir, capsys):
    rc, out, _ = run(
        capsys,
        [
            "estimate",
            "simpson",
            "--data",
            str(fixdir / "kidney.csv"),
            "--x",
            "treatment",
            "--y",
            "recovery=1",
            "--strata",
            "severity",
        ],
    )
    assert rc == 0
    assert out.splitlines() == [
        "aggregate: A=0.780 B=0.826",
        "stratum large: A=0.730 B=0.688",
        "stratum small: A=0.931 B=0.867",
        "reversal: true",
        "mixed: false",
    ]


def test_estimate_simpson_json(fixdir, capsys):
    payload = run_json(
        capsys,
        [
            "estimate",
            "simpson",
            "--data",
            str(fixdir / "kidney.csv"),
            "--x",
            "treatment",
            "--y",
            "recovery=1",
            "--strata",
            "severity",
        ],
    )
    assert payload["reversal"] is True
    assert payload["mixed"] is False
    assert payload["aggregate_sign"] == -1
    assert set(payload["stratum_rates"]) == {"large", "small"}


# -- selection and transport ------------------------------------------------------


def test_selection_check_text(fixdir, capsys):
    rc, out, _ = run(
        capsys,
        [
            "selection-check",
            "--graph",
            str(fixdir / "covid_graph.json"),
            "--x",
            "test",
            "--y",
            "antibody",
        ],
    )
    assert rc == 0
    lines = out.splitlines()
    assert lines[0] == "selection nodes: S"
    assert lines[1] == (
        "  test <- risk -> S <- virus -> antibody | "
        "unconditioned: blocked | under selection: open"
    )
    assert lines[-1] == "selection bias: true"


def test_selection_check_unbiased(fixdir, capsys):
    payload = run_json(
        capsys,
        [
            "selection-check",
            "--graph",
            str(fixdir / "kidney_graph.json"),
            "--x",
            "treatment",
            "--y",
            "recovery",
        ],
    )
    assert payload["biased"] is False
    assert payload["selection_nodes"] == []


def test_debias_recovers_interventional_truth(fixdir, capsys):
    payload = run_json(
        capsys,
        [
            "debias",
            "--data",
            str(fixdir / "covid_study.csv"),
            "--x",
            "test=1",
            "--y",
            "antibody=1",
            "--strata",
            "risk",
            "virus",
        ],
    )
    assert payload["estimate"] == pytest.approx(0.23, abs=0.02)


def test_transport(fixdir, capsys):
    rc, out, _ = run(
        capsys, ["transport", "--effects", str(fixdir / "age_strata.json")]
    )
    assert rc == 0
    assert out == "0.300\n"
    payload = run_json(
        capsys, ["transport", "--effects", str(fixdir / "age_strata.json")]
    )
    assert payload["stratum"] == "age"
    assert payload["estimate"] == pytest.approx(0.30, abs=1e-12)


# -- missingness subcommands --------------------------------------------------------


def test_missing_classify(fixdir, capsys):
    for stem, label in (
        ("mcar", "MCAR"),
        ("mar", "MAR"),
        ("self_masking", "MNAR"),
        ("two_sided", "MNAR"),
    ):
        rc, out, _ = run(
            capsys,
            [
                "missing",
                "classify",
                "--graph",
                str(fixdir / f"mgraph_{stem}.json"),
            ],
        )
        assert rc == 0
        assert out == f"mechanism: {label}\n"


def test_missing_mask_matches_library(fixdir, datadir, tmp_path, capsys):
    expected = apply_missingness(
        fx.xy_scm().sample(400, seed=3),
        fx.mgraph_mar(),
        fx.mask_cpts(fx.mgraph_mar()),
        7,
    ).to_csv()
    argv = [
        "missing",
        "mask",
        "--data",
        str(datadir / "xy.csv"),
        "--graph",
        str(fixdir / "mgraph_mar.json"),
        "--rcpt",
        str(fixdir / "mgraph_mar_mask.json"),
        "--seed",
        "7",
    ]
    rc, out, _ = run(capsys, argv)
    assert rc == 0
    assert out == expected

    target = tmp_path / "masked.csv"
    rc, out, _ = run(capsys, argv + ["--save", str(target)])
    assert rc == 0
    assert out == f"wrote 400 rows to {target}\n"
    assert target.read_text() == expected


def test_missing_recover(fixdir, datadir, capsys):
    ds = DiscreteDataset.from_csv((datadir / "xy_mar.csv").read_text())
    expected = recover_joint(fx.mgraph_mar(), ds, ["X", "Y"])
    payload = run_json(
        capsys,
        [
            "missing",
            "recover",
            "--data",
            str(datadir / "xy_mar.csv"),
            "--graph",
            str(fixdir / "mgraph_mar.json"),
            "--vars",
            "X",
            "Y",
        ],
    )
    assert payload["recoverable"] is True
    back = ProbTable.from_dict(payload["table"])
    assert back.l1_distance(expected) == pytest.approx(0.0, abs=1e-15)

    rc, out, _ = run(
        capsys,
        [
            "missing",
            "recover",
            "--data",
            str(datadir / "xy_mar.csv"),
            "--graph",
            str(fixdir / "mgraph_mar.json"),
            "--vars",
            "X",
            "Y",
        ],
    )
    assert rc == 0
    lines = out.splitlines()
    assert len(lines) == 4
    assert lines[0].startswith("X=0,Y=0: ")


def test_missing_recover_not_recoverable(fixdir, datadir, capsys):
    argv = [
        "missing",
        "recover",
        "--data",
        str(datadir / "xy_self.csv"),
        "--graph",
        str(fixdir / "mgraph_self_masking.json"),
        "--vars",
        "X",
        "Y",
    ]
    rc, out, _ = run(capsys, argv)
    assert rc == 0
    assert out == "NOT_RECOVERABLE\n"
    payload = run_json(capsys, argv)
    assert payload == {"recoverable": False, "table": None}


def test_missing_testable(fixdir, capsys):
    graph = str(fixdir / "mgraph_two_sided.json")
    rc, out, _ = run(
        capsys,
        ["missing", "testable", "--graph", graph, "--x", "X", "--y", "Y"],
    )
    assert rc == 0
    lines = out.splitlines()
    assert lines[0] == "testable: false"

    rc, out, _ = run(
        capsys,
        [
            "missing",
            "testable",
            "--graph",
            graph,
            "--x",
            "X",
            "--y",
            "Y",
            "Ry",
            "--given",
            "Rx",
        ],
    )
    assert rc == 0
    assert out.splitlines()[0] == "testable: true"


# -- bandit subcommand ------------------------------------------------------------


def test_bandit_sim_matches_library(fixdir, tmp_path, capsys):
    expected = simulate(fx.two_arm_env(), make_policy("thompson"), 400, 5)
    log = tmp_path / "rounds.csv"
    payload = run_json(
        capsys,
        [
            "bandit",
            "sim",
            "--env",
            str(fixdir / "bandit_two_arm.json"),
            "--policy",
            "thompson",
            "--horizon",
            "400",
            "--seed",
            "5",
            "--save",
            str(log),
        ],
    )
    assert payload["policy"] == "thompson"
    assert payload["final_regret"] == pytest.approx(
        expected.final_regret(), abs=1e-12
    )
    assert payload["tail_arm_frequency"]["0"] == pytest.approx(
        expected.arm_frequency(0, tail=0.1), abs=1e-12
    )
    text = log.read_text()
    assert text == expected.to_csv()
    assert text.splitlines()[0] == "round,arm,intent,reward,cum_regret"
    assert len(text.splitlines()) == 401


def test_bandit_sim_text(fixdir, capsys):
    rc, out, _ = run(
        capsys,
        [
            "bandit",
            "sim",
            "--env",
            str(fixdir / "bandit_paradoxical.json"),
            "--policy",
            "causal_thompson",
            "--horizon",
            "300",
            "--seed",
            "1",
        ],
    )
    assert rc == 0
    lines = out.splitlines()
    assert lines[0] == "policy: causal_thompson"
    assert lines[1].startswith("final cumulative regret: ")
    assert lines[2].startswith("tail arm frequency (last 10%): ")


def test_bandit_sim_requires_intent(fixdir, capsys):
    rc, out, err = run(
        capsys,
        [
            "bandit",
            "sim",
            "--env",
            str(fixdir / "bandit_two_arm.json"),
            "--policy",
            "causal_thompson",
            "--horizon",
            "50",
            "--seed",
            "1",
        ],
    )
    assert rc == 1
    assert "MissingIntent" in err


# -- discovery subcommands ----------------------------------------------------------


def test_discover_pc(datadir, capsys):
    rc, out, _ = run(
        capsys, ["discover", "pc", "--data", str(datadir / "cc.csv")]
    )
    assert rc == 0
    assert out.splitlines() == [
        "directed: X->Z, Y->Z, Z->W",
        "undirected: (none)",
        "conflicts: (none)",
    ]
    payload = run_json(
        capsys, ["discover", "pc", "--data", str(datadir / "cc.csv")]
    )
    ds = DiscreteDataset.from_csv((datadir / "cc.csv").read_text())
    assert Pattern.from_dict(payload["pattern"]) == pc(ds)


def test_discover_ges(datadir, capsys):
    rc, out, _ = run(
        capsys, ["discover", "ges", "--data", str(datadir / "cc.csv")]
    )
    assert rc == 0
    lines = out.splitlines()
    assert lines[0] == "edges: X->Z, Y->Z, Z->W"
    assert lines[2] == "moves: 3"

    payload = run_json(
        capsys, ["discover", "ges", "--data", str(datadir / "cc.csv")]
    )
    ds = DiscreteDataset.from_csv((datadir / "cc.csv").read_text())
    graph, trace = greedy_score_search(ds)
    assert payload["graph"]["edges"] == [list(e) for e in sorted(graph.edges)]
    assert [step["op"] for step in payload["trace"]] == [
        "init",
        "add",
        "add",
        "add",
    ]
    assert payload["score"] == pytest.approx(trace[-1].score, abs=1e-9)


# -- exit codes and input validation ----------------------------------------------


def test_missing_file_is_exit_2(capsys):
    rc, _, err = run(
        capsys,
        ["dsep", "--graph", "/no/such/file.json", "--x", "a", "--y", "b"],
    )
    assert rc == 2
    assert err.startswith("error: cannot read")


def test_unparseable_json_is_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    rc, _, err = run(
        capsys, ["dsep", "--graph", str(bad), "--x", "a", "--y", "b"]
    )
    assert rc == 2
    assert "not valid JSON" in err


def test_wrong_shape_json_is_exit_2(tmp_path, capsys):
    bad = tmp_path / "shape.json"
    bad.write_text(json.dumps({"foo": 1}))
    rc, _, err = run(
        capsys, ["dsep", "--graph", str(bad), "--x", "a", "--y", "b"]
    )
    assert rc == 2
    assert "not a valid graph" in err


def test_ragged_csv_is_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1\n")
    rc, _, err = run(
        capsys,
        [
            "estimate",
            "do",
            "--data",
            str(bad),
            "--x",
            "a=1",
            "--y",
            "b=1",
        ],
    )
    assert rc == 2
    assert "not a valid dataset" in err


def test_invalid_effects_file_is_exit_2(tmp_path, capsys):
    bad = tmp_path / "effects.json"
    bad.write_text(json.dumps({"stratum": "age", "effects": {"a": 0.1}}))
    rc, _, err = run(capsys, ["transport", "--effects", str(bad)])
    assert rc == 2
    assert "not a valid effects file" in err


def test_unnormalized_weights_are_exit_1(tmp_path, capsys):
    bad = tmp_path / "effects.json"
    bad.write_text(
        json.dumps(
            {"stratum": "age", "effects": {"a": 0.1}, "weights": {"a": 0.5}}
        )
    )
    rc, _, err = run(capsys, ["transport", "--effects", str(bad)])
    assert rc == 1
    assert "WeightsNotNormalized" in err


def test_invalid_env_file_is_exit_2(tmp_path, capsys):
    bad = tmp_path / "env.json"
    bad.write_text(json.dumps({"arms": 3, "payout": [0.7, 0.3]}))
    rc, _, err = run(
        capsys,
        [
            "bandit",
            "sim",
            "--env",
            str(bad),
            "--policy",
            "thompson",
            "--horizon",
            "10",
            "--seed",
            "0",
        ],
    )
    assert rc == 2
    assert "not a valid bandit environment" in err


def test_invalid_mgraph_file_is_exit_2(tmp_path, capsys):
    bad = tmp_path / "mg.json"
    bad.write_text(json.dumps({"x": 1}))
    rc, _, err = run(capsys, ["missing", "classify", "--graph", str(bad)])
    assert rc == 2
    assert "not a valid missingness graph" in err


def test_invalid_rcpt_file_is_exit_2(fixdir, datadir, tmp_path, capsys):
    bad = tmp_path / "rcpt.json"
    bad.write_text(
        json.dumps(
            {"Ry": {"parents": [], "states": ["0", "1"], "rows": [[[], [0.5]]]}}
        )
    )
    rc, _, err = run(
        capsys,
        [
            "missing",
            "mask",
            "--data",
            str(datadir / "xy.csv"),
            "--graph",
            str(fixdir / "mgraph_mar.json"),
            "--rcpt",
            str(bad),
            "--seed",
            "0",
        ],
    )
    assert rc == 2
    assert "not a valid indicator-table file" in err


def test_domain_error_is_exit_1(fixdir, capsys):
    rc, _, err = run(
        capsys,
        [
            "dsep",
            "--graph",
            str(fixdir / "kidney_graph.json"),
            "--x",
            "Nope",
            "--y",
            "recovery",
        ],
    )
    assert rc == 1
    assert err.startswith("error: UnknownNode")


def test_zero_evidence_is_exit_1(fixdir, capsys):
    rc, _, err = run(
        capsys,
        [
            "scm",
            "query",
            "--model",
            str(fixdir / "covid_scm.json"),
            "--target",
            "risk=low",
            "--given",
            "test=0",
            "antibody=1",
        ],
    )
    assert rc == 1
    assert "ZeroEvidenceProbability" in err


def test_unknown_state_is_exit_1(fixdir, capsys):
    rc, _, err = run(
        capsys,
        [
            "estimate",
            "do",
            "--data",
            str(fixdir / "kidney.csv"),
            "--x",
            "treatment=C",
            "--y",
            "recovery=1",
            "--adjust",
            "severity",
        ],
    )
    assert rc == 1
    assert "UnknownState" in err


def test_unmatched_missingness_pattern_is_exit_1(fixdir, datadir, capsys):
    rc, _, err = run(
        capsys,
        [
            "missing",
            "recover",
            "--data",
            str(datadir / "xy_mar.csv"),
            "--graph",
            str(fixdir / "mgraph_mar.json"),
            "--vars",
            "X",
        ],
    )
    assert rc == 1
    assert "UnmatchedPattern" in err


def test_usage_errors_are_exit_2(fixdir, capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(
            [
                "scm",
                "sample",
                "--model",
                str(fixdir / "confounded_scm.json"),
                "--n",
                "5",
            ]
        )
    assert exc.value.code == 2
    capsys.readouterr()

    with pytest.raises(SystemExit) as exc:
        cli.main(
            [
                "scm",
                "query",
                "--model",
                str(fixdir / "covid_scm.json"),
                "--target",
                "antibody",
            ]
        )
    assert exc.value.code == 2
    capsys.readouterr()

    with pytest.raises(SystemExit) as exc:
        cli.main(["no-such-command"])
    assert exc.value.code == 2
    capsys.readouterr()


# -- environment-variable node cap ---------------------------------------------------


def test_env_node_cap_applies(fixdir, monkeypatch, capsys):
    # the cap guards path enumeration, so a too-small value turns
    # selection-check into a domain error
    old = get_max_nodes()
    monkeypatch.setenv("CAUSALKIT_MAX_NODES", "3")
    try:
        rc, _, err = run(
            capsys,
            [
                "selection-check",
                "--graph",
                str(fixdir / "covid_graph.json"),
                "--x",
                "test",
                "--y",
                "antibody",
            ],
        )
        assert rc == 1
        assert "GraphTooLarge" in err
    finally:
        set_max_nodes(old)


def test_env_node_cap_generous_value_passes(fixdir, monkeypatch, capsys):
    old = get_max_nodes()
    monkeypatch.setenv("CAUSALKIT_MAX_NODES", "10")
    try:
        rc, out, _ = run(
            capsys,
            [
                "dsep",
                "--graph",
                str(fixdir / "collider_chain_graph.json"),
                "--x",
                "X",
                "--y",
                "Y",
            ],
        )
        assert rc == 0
        assert out == "d-separated: true\n"
        assert get_max_nodes() == 10
    finally:
        set_max_nodes(old)


def test_env_node_cap_invalid_value(fixdir, monkeypatch, capsys):
    monkeypatch.setenv("CAUSALKIT_MAX_NODES", "banana")
    rc, _, err = run(
        capsys,
        [
            "dsep",
            "--graph",
            str(fixdir / "kidney_graph.json"),
            "--x",
            "treatment",
            "--y",
            "recovery",
        ],
    )
    assert rc == 2
    assert "bad CAUSALKIT_MAX_NODES" in err
