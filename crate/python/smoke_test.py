"""Smoke test for the qtd extension module.

Build with `cargo build --release -p qtd-py`, then run from the repository
root; the script loads target/release/libqtd.so directly.
"""

import importlib.machinery
import importlib.util
import json
import math
import pathlib
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    for name in ("libqtd.so", "libqtd.dylib", "qtd.pyd"):
        path = ROOT / "target" / "release" / name
        if path.exists():
            loader = importlib.machinery.ExtensionFileLoader("qtd", str(path))
            spec = importlib.util.spec_from_loader("qtd", loader)
            module = importlib.util.module_from_spec(spec)
            loader.exec_module(module)
            return module
    sys.exit("build the extension first: cargo build --release -p qtd-py")


def close(a, b, rel=1e-10, abs_=0.0):
    return abs(a - b) <= max(rel * max(abs(a), abs(b)), abs_)


def main():
    qtd = load()
    spec = qtd.PacketPairSpec(math.pi / 4, 0.0, 0.02, 0.03, 0.01)
    k1, k2 = spec.moment_diff()
    assert close(spec.delta_q(), k1)
    assert close(spec.gamma_q_inv(), -k2)
    assert close(spec.moment_diff_quadrature(2), k2, rel=1e-8)

    report = spec.dilation_report()
    assert close(report["gamma_q_inv"], spec.gamma_q_inv())

    try:
        qtd.PacketPairSpec(math.pi / 4, math.pi, 0.02, 0.02, 0.01).gamma_q_inv()
    except ValueError:
        pass
    else:
        raise AssertionError("zero-norm state accepted")

    atom = qtd.AtomSpec()
    sup = qtd.MotionalState.superposition(spec)
    cl = qtd.MotionalState.mixture(spec)
    diff = sup.rate_total(atom) - cl.rate_total(atom)
    assert close(diff, spec.gamma_q_inv(), rel=1e-6, abs_=1e-15)
    assert close(sup.survival_probability(0.0, atom), 1.0)

    grid = [i * 1e-3 for i in range(-200, 201)]
    amps = [math.exp(-((u - 0.02) ** 2) / (4 * 0.01**2)) for u in grid]
    sampled = qtd.MotionalState.sampled(grid, amps)
    assert close(sampled.moment(1), 0.02, rel=1e-6)

    w = qtd.lambert_w0(math.exp(-1))
    assert close(w * math.exp(w), math.exp(-1))

    with tempfile.TemporaryDirectory() as out:
        r = qtd.run_scenario("fig1b", out, json.dumps({"grid": 32}))
        assert len(r["files"]) == 4
        endpoint = r["summary"]["ridge_endpoint"]["separation_over_delta"]
        assert abs(endpoint - 2.2614) < 5e-2, endpoint

    st = qtd.selftest(cases=10)
    assert st["passed"], [c["name"] for c in st["checks"] if not c["passed"]]
    print(f"qtd {qtd.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
