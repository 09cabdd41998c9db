import pytest

from glc.scenarios import CATALOG, UnknownScenario, run_all, run_scenario


def test_unknown_scenario():
    with pytest.raises(UnknownScenario):
        run_scenario("nonexistent")


def test_catalog_is_complete():
    assert set(CATALOG) == {
        "beta_on_identity_application",
        "beta_single_arrow",
        "beta_loop",
        "labelling_dependence",
        "gfo_implies_cocomm",
        "eta_counterexample",
        "ext_beta_eps1_is_beta",
        "ext_beta_equiv_pair",
        "beta_star_implies_R1a",
        "beta_star_implies_R2a",
        "mystery_move_chain",
        "reidemeister2_lambda",
    }


def test_beta_on_identity_application_passes():
    assert run_scenario("beta_on_identity_application").status == "pass"


def test_arrow_and_loop_round_trips_pass():
    assert run_scenario("beta_single_arrow").status == "pass"
    assert run_scenario("beta_loop").status == "pass"


def test_labelling_dependence_passes():
    v = run_scenario("labelling_dependence")
    assert v.status == "pass"
    assert v.records["labellings_differ"]


def test_gfo_implies_cocomm_passes():
    v = run_scenario("gfo_implies_cocomm")
    assert v.status == "pass"
    assert v.records["copies"] == 2


def test_eta_counterexample_records_loop_counts():
    v = run_scenario("eta_counterexample")
    assert v.status == "pass"
    assert v.records["ext1_rejected"]
    assert v.records["hypothetical_loops"] == 1
    assert v.records["beta_loops"] == 2


def test_ext_beta_eps1_passes_up_to_relabeling():
    assert run_scenario("ext_beta_eps1_is_beta").status == "pass-up-to-relabeling"


def test_ext_beta_equiv_pair_passes():
    v = run_scenario("ext_beta_equiv_pair")
    assert v.status == "pass"
    assert v.records["routes_agree"]


def test_beta_star_consequences_pass():
    v = run_scenario("beta_star_implies_R1a")
    assert v.status == "pass"
    assert v.records["residual_loops"] == 1
    assert run_scenario("beta_star_implies_R2a").status == "pass"


def test_mystery_move_chain_passes():
    v = run_scenario("mystery_move_chain")
    assert v.status == "pass"
    assert v.records["loops_along_the_way"] == 0


def test_reidemeister2_passes():
    assert run_scenario("reidemeister2_lambda").status == "pass"


def test_run_all_is_green():
    for verdict in run_all():
        assert verdict.ok, f"{verdict.name}: {verdict.message}"
