"""Smoke test for the spectral_means_py extension.

Build and install first, e.g.

    cd crates/python && maturin build --release -o dist && pip install dist/*.whl
"""

import math

import spectral_means_py as sm


def close(x, y, tol):
    return abs(x - y) <= tol * max(1.0, abs(y))


def diag_of(m):
    return [m.to_list()[i][i].real for i in range(m.dim)]


def main():
    a = sm.SpdMatrix.diag([1.0, 4.0])
    b = sm.SpdMatrix.diag([9.0, 1.0])

    f = sm.f_mean(a, b, 0.5)
    assert all(close(x, y, 1e-12) for x, y in zip(diag_of(f), [3.0, 2.0])), f
    r = sm.mean("renyi", a, b, 0.5, z=0.3)
    assert all(close(x, y, 1e-12) for x, y in zip(diag_of(r), [3.0, 2.0])), r

    assert close(sm.phi(sm.SpdMatrix.diag([1.0]), sm.SpdMatrix.diag([4.0]), 0.5), 0.5, 1e-14)

    c = sm.SpdMatrix([[2, 1j], [-1j, 2]])
    assert [round(v, 12) for v in c.eigenvalues()] == [1.0, 3.0]
    assert close(c.power(2).to_list()[0][1].imag, 4.0, 1e-12)

    x, report = sm.solve_barycenter([sm.SpdMatrix.diag([1.0]), sm.SpdMatrix.diag([9.0])], 0.5)
    assert report["converged"] and close(diag_of(x)[0], 4.0, 1e-8), report
    trace = report["objective_trace"]
    assert all(later <= earlier for earlier, later in zip(trace, trace[1:]))

    ms = [sm.SpdMatrix.random(3, cond=100.0, seed=s) for s in range(3)]
    x, report = sm.solve_barycenter(ms, 0.3, weights=[0.2, 0.3, 0.5])
    assert report["converged"], report
    g = sm.phi_gradient(ms[0], ms[0], 0.3)
    assert math.sqrt(sum(abs(v) ** 2 for row in g for v in row)) < 1e-9 * 3

    for bad in (lambda: sm.SpdMatrix([[1, 0], [0, -1]]), lambda: sm.mean("renyi", a, b, 0.5)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    results = sm.verify("divergence", dims=[2, 3], samples=20, seed=1)
    assert results and all(p["violations"] == 0 for p in results), results

    print("spectral_means_py smoke test passed")


if __name__ == "__main__":
    main()
