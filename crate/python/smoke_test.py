"""Smoke test for the sqd extension module.

Build and install with `pip install --no-build-isolation crates/python`,
then run `python python/smoke_test.py`.
"""

import math

import sqd


def main():
    ham = sqd.Hamiltonian.model(1.6)
    assert (ham.n_orb, ham.n_alpha, ham.n_beta) == (6, 3, 3)
    assert abs(ham.eri(0, 1, 2, 3) - ham.eri(1, 0, 3, 2)) < 1e-14

    again = sqd.Hamiltonian.from_fcidump(ham.to_fcidump())
    exact = sqd.exact_energy(ham, 0.0)
    assert abs(sqd.exact_energy(again, 0.0)["energy"] - exact["energy"]) < 1e-10
    assert abs(exact["s2"]) < 1e-6 and exact["dimension"] == 400

    samples = sqd.simulate_samples(ham, 20000, bit_flip_prob=0.02, seed=3)
    assert samples.total_shots == 20000
    assert 0.5 < samples.valid_fraction(3, 3) < 1.0
    assert sqd.SampleSet.parse(samples.to_text()).counts() == samples.counts()

    rec = sqd.run_recovery(ham, samples, 0.0, n_batches=4, n_iterations=3, seed=3)
    assert rec["energy"] >= exact["energy"] - 1e-9
    assert rec["energy"] - exact["energy"] < 0.01
    assert len(rec["iterations"]) == 3
    assert all(it["weights_exact"] for it in rec["iterations"])

    point = sqd.run_point(
        """
        label = 1.6
        model = 1.6
        n_alpha = 4
        n_beta = 2
        spin = 1.0
        shots = 20000
        oracle = true
        noise = { bit_flip_prob = 0.02 }
        recovery = { n_batches = 2, n_iterations = 2 }
        orbopt = { max_steps = 20 }
        """,
        seed=5,
    )
    assert point["e_oracle"] <= point["e_sqd_orbopt"] + 1e-9 <= point["e_sqd"] + 2e-9
    assert point["points_csv"].startswith("label,sector,")

    scan = sqd.run_scan(
        """
        [scan]
        seed = 1
        [[point]]
        label = 3.2
        model = 3.2
        n_alpha = 3
        n_beta = 3
        spin = 0.0
        shots = 20000
        recovery = { n_batches = 2, n_iterations = 2 }
        optimize_orbitals = false
        [[point]]
        label = 3.2
        model = 3.2
        n_alpha = 4
        n_beta = 2
        spin = 1.0
        shots = 20000
        recovery = { n_batches = 2, n_iterations = 2 }
        optimize_orbitals = false
        """
    )
    (gap,) = scan["gaps"]
    assert math.isclose(gap["gap"], gap["e_singlet"] - gap["e_triplet"])
    assert gap["gap"] < 0.0

    try:
        sqd.Hamiltonian.model(1.6, 2, 4)
    except ValueError:
        pass
    else:
        raise AssertionError("bad sector accepted")

    print("smoke test passed: gap at 3.2 A = %.4f Eh" % gap["gap"])


if __name__ == "__main__":
    main()
