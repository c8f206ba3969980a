"""Smoke test for the qcopt extension module.

Build and install first, e.g. ``maturin develop -m crates/python/Cargo.toml``.
"""

import json

import qcopt

WORKED = """OPENQASM 2.0;
include "qelib1.inc";
qreg q[3];
h q[0];
cx q[1],q[2];
x q[1];
cx q[1],q[2];
ccx q[0],q[1],q[2];
"""


def main():
    text, layout, report = qcopt.optimize_circuit(WORKED, init="000")
    assert text.endswith("h q[0];\nx q[1];\nx q[2];\ncx q[0],q[2];\n"), text
    assert layout == [0, 1, 2], layout
    rep = json.loads(report)
    assert rep["f_sim"] == 1.0
    assert rep["after"]["cx_count"] < rep["before"]["cx_count"]

    dist = qcopt.simulate(WORKED, "000")
    assert set(dist) == {"011", "110"}, dist
    assert abs(qcopt.fidelity(WORKED, text) - 1.0) < 1e-9

    noisy, _, _ = qcopt.optimize_circuit(WORKED, backend="shots", shots=1000, seed=5, zne=True)
    assert noisy.startswith("OPENQASM 2.0;")

    motif = qcopt.generate("repeated-motif", 8, 6, seed=7)
    classes = json.loads(qcopt.patterns(motif, level=3, min_size=6, max_size=6))
    assert classes and len(classes[0]["occurrences"]) == 4, classes

    try:
        qcopt.optimize_circuit(WORKED, backend="shots")
    except ValueError:
        pass
    else:
        raise AssertionError("shots backend without shots accepted")
    print("smoke test passed")


if __name__ == "__main__":
    main()
