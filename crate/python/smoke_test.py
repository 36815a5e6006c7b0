"""Smoke test of the Python bindings.

Run after `pip install -e . --no-build-isolation` from the repository root:

    python python/smoke_test.py
"""

import math

import outer_dynamics_py as od


def main() -> None:
    names = od.corpus_names()
    assert "fib" in names and "fibc" in names, names

    fib = od.OuterMap.builtin("fib")
    assert fib.rank() == 2
    assert fib.edge_ids() == ["a", "b"]

    strata = fib.strata()
    assert len(strata) == 1
    assert strata[0]["kind"] == "EG"
    phi = (1 + math.sqrt(5)) / 2
    assert abs(strata[0]["lambda"] - phi) < 1e-9
    assert strata[0]["matrix"] == [[1, 1], [1, 0]]

    ok, _advisories = fib.validate()
    assert ok

    assert fib.classify("a") == "exponential"
    assert fib.classify("aba-b-") == "polynomial"

    assert fib.iterate("a", 3) == "abaab"
    assert fib.exp_length("abab") == 4
    assert fib.goodness("a") == 1.0

    cur = fib.current("a", 2)
    assert cur["exp_length"] == "1", cur

    assert fib.constants() == {"K": 4, "C": 4, "C_f": 2, "N3K": 6}
    assert fib.path_family() == ["b-a-ba"]
    assert fib.polynomial_edges() == []

    inps = fib.inps()
    assert len(inps) == 1 and inps[0]["kind"] == "exponential", inps

    assert abs(fib.stretch_factor("a") - phi) < 1e-6

    fibc = od.OuterMap.builtin("fibc")
    assert fibc.polynomial_edges() == ["c"]
    assert fibc.constants()["N3K"] == 6

    print("smoke test passed")


if __name__ == "__main__":
    main()
