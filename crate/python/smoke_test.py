"""Smoke test for the drcc extension module.

Build and place the module next to this script first:

    cargo build -p drcc-py --release --features extension-module
    cp target/release/libdrcc.so python/drcc.so
"""
import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import drcc  # noqa: E402


def check(cond, msg):
    if not cond:
        raise SystemExit(f"FAIL: {msg}")
    print(f"ok   {msg}")


def main():
    s = drcc.SampleSet([4, 10, 2, 8, 6], 0.4)
    check(s.values == [10, 8, 6, 4, 2], "samples sorted on construction")
    check(len(s) == 5, "sample count")
    check(math.isclose(s.var_continuous(0.6), 8.0, abs_tol=1e-9), "continuous VaR at 0.6")
    check(math.isclose(s.var_continuous(0.5), 26 / 3, abs_tol=1e-9), "continuous VaR at 0.5")
    wide = drcc.SampleSet([10, 8, 6, 4, 2], 0.5)
    check(math.isclose(wide.var_continuous(0.6), 8.25, abs_tol=1e-9), "continuous VaR, radius 0.5")
    check(math.isclose(wide.var_finite(0.6), 10.0, abs_tol=1e-9), "finite VaR, radius 0.5")
    check(math.isclose(s.alpha_for_level(2), 0.6, abs_tol=1e-9), "alpha for the second level")
    for a in (0.1, 0.3, 0.5, 0.7, 0.9):
        check(s.var_finite(a) >= s.var_continuous(a) - 1e-12, f"finite dominates at {a}")
    try:
        drcc.SampleSet([], 0.1)
    except ValueError:
        check(True, "empty samples rejected")
    else:
        check(False, "empty samples rejected")

    toy = drcc.Instance.toy()
    fin = drcc.solve(toy, model="finite", cuts="ordering,star")
    check(fin["status"] == "optimal", "finite toy optimal")
    check(math.isclose(fin["objective"], 6.8, abs_tol=1e-6), "finite toy objective 6.8")
    check(fin["problems"][0]["nodes"] == 1, "finite toy solved at the root")

    cont = drcc.solve(toy, model="continuous", gap=1e-7)
    z, _, alphas = drcc.oracle(toy, model="continuous")
    check(abs(cont["objective"] - z) <= 1e-5 * max(1.0, abs(z)), "continuous matches the pair oracle")
    check(cont["objective"] <= fin["objective"] + 1e-6, "continuous never above finite")
    check(0 < alphas[0] <= 0.9, "oracle alpha inside bounds")

    lp = drcc.export(toy, model="finite", format="lp")
    check("Minimize" in lp or "minimize" in lp.lower(), "LP export")

    big = drcc.Instance.transportation(seed=1, suppliers=4, customers=100, samples=50)
    try:
        drcc.oracle(big, model="finite")
    except drcc.CapExceededError:
        check(True, "oracle refuses large instances")
    else:
        check(False, "oracle refuses large instances")

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "t.json")
        inst = drcc.Instance.transportation(seed=3, suppliers=2, customers=2, samples=8)
        inst.save(path)
        back = drcc.Instance.load(path)
        check(back.to_json() == inst.to_json(), "instance save/load round trip")
        drcc.solve_to_dir(back, os.path.join(d, "out"), model="continuous", deterministic=True)
        check(sorted(os.listdir(os.path.join(d, "out"))) ==
              ["alphas.csv", "report.csv", "solution.json", "timings.csv"], "run files written")

    b = drcc.Instance.building(seed=2, buildings=3, periods=2, samples=6)
    res = drcc.solve(b, model="continuous")
    check(len(res["problems"]) == 2, "building periods solved in order")
    print("all smoke checks passed")


if __name__ == "__main__":
    main()
