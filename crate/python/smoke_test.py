"""Smoke test for the vstates_py extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/vstates_py-*.whl
"""

import json
import math
import os
import tempfile

import vstates_py as vs


def main():
    lo, hi = vs.eigenvalues(4, 0.63)
    assert abs(lo - 0.1341) < 1e-4 and abs(hi - 0.1674) < 1e-4, (lo, hi)
    assert vs.eigenvalues(4, 0.7) is None
    assert 0.63 < vs.critical_radius(4) < 0.7

    annulus = vs.Coeffs.annulus(0.5, 4, 5)
    assert annulus.residual(0.2, 128) < 1e-13
    assert math.isclose(annulus.distance(128), 0.5)

    state = vs.solve(0.63, 4, 0.14, seed_a2=-0.04, nodes=256)
    assert state.converged and not state.trivial, state
    assert state.residual_max < 1e-12
    assert state.coeffs.residual(0.14, 256) < 1e-12

    again = vs.solve(0.63, 4, 0.14, seed=state.coeffs, nodes=256)
    assert again.iterations <= 2, again

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "state.json")
        state.save(path)
        back = vs.State.load(path)
        assert back.coeffs.a2 == state.coeffs.a2
        assert json.loads(back.to_json())["M"] == state.coeffs.modes

    branch = vs.sweep(0.63, 4, start=0.1342, end=0.1362, step=1e-3, boundary="inner", nodes=256)
    assert len(branch) == 3 and branch.terminated_at is None
    assert abs(branch.distances[0] - 0.3642) < 5e-4
    assert branch.to_csv().startswith("# vstates branch")
    assert vs.render_svg(branch.states(), samples=64).count("<path") == 6

    try:
        vs.solve(0.63, 4, 0.14, nodes=127)
    except ValueError:
        pass
    else:
        raise AssertionError("an invalid grid should raise ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
