"""Smoke test for the compiled extension: `python python/smoke_test.py`."""

import json

import whitehead_py as wh


def main():
    assert wh.evaluate("[eta_4, eta_4^2]") == ("resolved", "0")
    assert wh.evaluate("eta_5^3") == ("resolved", "4 nu_5")
    kind, rendered = wh.evaluate("sigma_9 . sigma_16")
    assert kind == "residue", rendered

    cites = [p for (_, _, _, p) in wh.trace("[eta_4, eta_4^2]") if p and p.startswith("Toda")]
    assert cites == ["Toda (5.10)", "Toda (5.9)", "Toda (5.5)"], cites

    assert wh.bracket("iota_2", "iota_2") == "2 eta_2"
    assert wh.indeterminacy_order(["eta_4", "eta_4^2", "2 iota_4"]) == 15

    status = json.loads(wh.product_status(["eta_4", "eta_4^2", "2 iota_4"]))
    assert status["status"] == "constrained_coset"
    assert status["family"]["rendered"][-1] == "4 nu_4 . sigma' + 2 S eps'"
    empty = json.loads(wh.product_status(["0 iota_2", "iota_2", "iota_2"]))
    assert empty["status"] == "empty" and empty["witness"]["value"] == "2 eta_2"

    cp = json.loads(wh.known_result("cp:3"))
    assert cp["rendered"] == "24 gamma_3C"

    for name in wh.scenario_names():
        ok, detail = wh.run_scenario(name)
        assert ok, detail

    assert wh.fatwedge_betti([1, 1, 1, 1], 1, 3) == {2: 6, 3: 4}
    assert wh.retraction_obstruction([2, 2, 2, 2]) == ([1, 2], [3, 4])
    assert wh.retraction_obstruction([1, 2, 3]) is None
    assert wh.omega_nontriviality([1, 1, 1]) == ([1], [2, 3])

    try:
        wh.evaluate("eta_4 .")
    except wh.WhiteheadError as e:
        assert "syntax" in str(e)
    else:
        raise AssertionError("parse error not raised")

    tiny = "family eta base=3 stem=1 order=2\ngroup S4 k=6 = Z2{eta_4 . eta_5}\n"
    assert wh.evaluate("3 eta_4 . eta_5", relations=tiny) == ("resolved", "eta_4 . eta_5")

    print("smoke test ok")


if __name__ == "__main__":
    main()
