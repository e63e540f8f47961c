"""Smoke test for the pyhel extension module.

Build with `maturin develop -m crates/pyhel/Cargo.toml`, or copy
`target/release/libpyhel.so` to `pyhel.so` on PYTHONPATH.
"""

import pyhel


def main():
    a = pyhel.FiniteSet("Z", [0, 1, 3])
    assert len(a) == 3
    assert pyhel.energy(a) == 15
    assert len(a.diffset(a)) == 7
    assert pyhel.energy_moment(a, 3) == pyhel.energy_moment(a, 3.0)
    assert pyhel.t_energy(a, 2) == 15

    back = pyhel.FiniteSet.from_json(a.to_json())
    assert back == a and back.digest() == a.digest()

    h = pyhel.FiniteSet.generate("h-plus-dissociated:n=3:hdim=3:lambda=0")
    assert pyhel.energy(h) == 512
    assert abs(pyhel.spectrum(h)[0] - 64.0) < 1e-9

    report = pyhel.energy_report(h)
    assert report["e"] == 512

    sq = pyhel.FiniteSet.generate("convex:kind=squares:n=24")
    cert = pyhel.extract("e3", sq)
    assert cert["size"] >= 1
    assert pyhel.convex_trace(sq)["size"] == 24
    assert all(r.get("pass") is not False for r in pyhel.dual_pair(sq, 2)["relations"])

    rep = pyhel.verify("identities", ["random:group=Z/19:n=6:seed=2"])
    assert rep["version"] == 1 and rep["results"]
    assert all(r.get("pass") is not False for r in rep["results"])
    print("pyhel smoke test passed:", len(rep["results"]), "identity rows")


if __name__ == "__main__":
    main()
