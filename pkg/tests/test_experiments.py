"""Experiment drivers: spectra, convergence sweeps, stability monitors.

Reference spectra are re-enumerated in the tests by brute force from
the separable eigenfunctions of the pi-square.  The discrete zero modes
of the edge cavity operator are verified to be exact discrete
gradients, not just numerically small.
"""

import json

import numpy as np
import pytest

from whitney.linalg import generalized_symmetric_eig
from whitney.mesh import generate_square_mesh
from whitney.experiments import (
    ConvergenceReport,
    cavity_reference,
    edge_cavity_system,
    elasticity_convergence,
    galerkin_quasioptimality_demo,
    laplace_eigenvalues,
    maxwell_eigenvalues,
    maxwell_mixed_eigenvalues,
    mixed_poisson_convergence,
    observed_order,
    solve_mixed_poisson,
    solve_poisson,
    square_dirichlet_reference,
)


def test_reference_spectra_by_brute_force():
    dirichlet = sorted(m * m + n * n for m in range(1, 30) for n in range(1, 30))
    assert square_dirichlet_reference(10) == tuple(float(v) for v in dirichlet[:10])
    assert square_dirichlet_reference(10) == (2, 5, 5, 8, 10, 10, 13, 13, 17, 17)
    cavity = sorted(m * m + n * n for m in range(30) for n in range(30) if m + n > 0)
    assert cavity_reference(10) == tuple(float(v) for v in cavity[:10])
    assert cavity_reference(10) == (1, 1, 2, 4, 4, 5, 5, 8, 9, 9)


def test_laplace_upper_bounds_and_rate():
    # n=4 has only 9 interior vertices, so ask for 5 reference values there
    reports = {n: laplace_eigenvalues(n=n, count=min(10, (n - 1) ** 2 - 1))
               for n in (4, 8, 16)}
    for r in reports.values():
        assert r.passed and r.zero_count == 0
        assert np.all(np.diff(r.eigenvalues) >= -1e-12)
        assert all(e >= -1e-10 for e in r.relative_errors)  # Rayleigh-Ritz from above
    l1 = [reports[n].eigenvalues[0] for n in (4, 8, 16)]
    assert l1[0] >= l1[1] >= l1[2] >= 2.0 - 1e-10
    # second-order convergence of the ground state: error ratio about 4
    assert 3.5 < (l1[0] - 2.0) / (l1[1] - 2.0) < 4.5
    assert 3.5 < (l1[1] - 2.0) / (l1[2] - 2.0) < 4.5


def test_laplace_validation_and_ellipse():
    with pytest.raises(ValueError, match="H1"):
        laplace_eigenvalues(family="edge1")
    with pytest.raises(ValueError, match="unknown domain"):
        laplace_eigenvalues(domain="torus")
    r = laplace_eigenvalues(domain="ellipse", n=2)
    assert r.passed and r.reference == () and r.zero_count == 0


def test_edge_cavity_zero_modes_are_gradients():
    system = edge_cavity_system(4)
    spec = generalized_symmetric_eig(system.curlcurl, system.mass)
    lam = spec.eigenvalues
    nz = int(np.searchsorted(lam, 1e-8 * max(abs(lam[0]), abs(lam[-1]))))
    assert nz == system.interior_vertices
    Z = spec.eigenvectors[:, :nz]
    coef, *_ = np.linalg.lstsq(system.gradient, Z, rcond=None)
    assert np.abs(system.gradient @ coef - Z).max() <= 1e-8


def test_edge_cavity_spectrum_converges():
    r8 = maxwell_eigenvalues("edge1", n=8)
    assert r8.notes["pattern"] == "crossed"
    assert r8.zero_count == r8.notes["interior_vertices"] == r8.kernel_dim
    assert max(abs(e) for e in r8.relative_errors) <= 0.05
    assert not r8.passed              # 1 percent needs a finer mesh
    r12 = maxwell_eigenvalues("edge1", n=12)
    assert r12.passed
    assert max(abs(e) for e in r12.relative_errors) <= 0.01


def test_nodal_cavity_shows_pollution():
    r = maxwell_eigenvalues("nodal", n=8)
    assert r.notes["pattern"] == "uniform"
    assert r.passed
    assert r.notes["band_count"] > 2 * r.notes["expected_band_count"]
    assert len(r.notes["unmatched_reference"]) > 0
    assert r.notes["free_dofs"] == 2 * r.notes["interior_vertices"]
    with pytest.raises(ValueError, match="cavity family"):
        maxwell_eigenvalues("face1")


def test_mixed_cavity_matches_galerkin():
    r = maxwell_mixed_eigenvalues(n=4)
    assert r.passed and r.zero_count == 0
    assert r.notes["equivalence_gap"] <= 1e-8
    assert r.notes["multiplier_dim"] == len(r.eigenvalues)
    # same discrete eigenvalues as the positive edge spectrum, so the
    # leading ones approximate the true cavity values
    assert abs(r.eigenvalues[0] - 1.0) < 0.2


def test_observed_order_on_synthetic_data():
    hs = (0.5, 0.25, 0.125, 0.0625)
    errors = [3.0 * h ** 2 for h in hs]
    slope, resid = observed_order(hs, errors)
    assert slope == pytest.approx(2.0, abs=1e-12)
    assert resid <= 1e-12
    noisy = [3.0 * h ** 1.5 * (1 + 0.01 * (-1) ** i) for i, h in enumerate(hs)]
    slope, resid = observed_order(hs, noisy)
    assert slope == pytest.approx(1.5, abs=0.1)
    with pytest.raises(ValueError, match="non-positive"):
        observed_order(hs, [1.0, 0.0, 1.0, 1.0])
    with pytest.raises(ValueError, match="two levels"):
        observed_order((0.5,), (1.0,))


def test_convergence_report_validation():
    with pytest.raises(ValueError, match="strictly decreasing"):
        ConvergenceReport("x", (0.5, 0.5), {"e": (1.0, 1.0)}, {}, {})
    with pytest.raises(ValueError, match="does not match"):
        ConvergenceReport("x", (0.5, 0.25), {"e": (1.0,)}, {}, {})
    report = ConvergenceReport("x", (0.5, 0.25), {"e": (1.0, 0.5)}, {"e": 1.0},
                               {"e": 0.0}, notes={"passed": True})
    assert report.passed is True
    assert report.to_dict()["passed"] is True


def test_mixed_poisson_sweep_is_stable():
    report = mixed_poisson_convergence(ns=(2, 4, 8))
    assert report.passed
    assert report.orders["err_u"] >= 0.85
    assert report.orders["err_sigma"] >= 0.85
    gammas = np.asarray(report.infsup)
    assert np.all(gammas > 0.5)
    assert (gammas.max() - gammas.min()) / gammas.min() < 0.10
    assert report.notes["infsup_spread"] < 0.10


def test_mixed_poisson_with_anisotropic_coefficient():
    mesh = generate_square_mesh(4, pattern="crossed")
    _, _, es, eu, gamma = solve_mixed_poisson(mesh, np.diag([2.0, 0.5]))
    assert es > 0 and eu > 0 and 0.5 < gamma < 1.0
    with pytest.raises(ValueError, match="positive definite"):
        solve_mixed_poisson(mesh, np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_poisson_quasioptimality_orders():
    r1 = galerkin_quasioptimality_demo(ns=(4, 8, 16), order=1)
    assert r1.passed and r1.orders["err_h1"] >= 0.9
    r2 = galerkin_quasioptimality_demo(ns=(2, 4, 8), order=2)
    assert r2.passed and r2.orders["err_h1"] >= 1.8
    assert r2.orders["err_l2"] >= 2.5


def test_solve_poisson_zero_load(square4):
    W, u = solve_poisson(square4)
    assert u.shape == (W.ndofs,)
    # default manufactured load gives a nonzero interior solution
    assert np.abs(u).max() > 0
    W0, u0 = solve_poisson(square4, f=lambda pts: np.zeros(len(pts)))
    assert np.abs(u0).max() <= 1e-14


def test_elasticity_sweep_passes():
    report = elasticity_convergence(ns=(2, 4, 8))
    assert report.passed
    assert report.orders["err_u"] >= 1.0
    assert report.orders["err_sigma"] >= 1.0
    assert max(report.notes["equilibrium_residuals"]) <= 1e-9


def test_report_serialization_is_deterministic():
    a = laplace_eigenvalues(n=4).to_dict()
    b = laplace_eigenvalues(n=4).to_dict()
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    r = maxwell_eigenvalues("edge1", n=4)
    d = r.to_dict()
    assert set(d) == {"family", "mesh", "eigenvalues", "zero_count", "zero_threshold",
                      "kernel_dim", "reference", "relative_errors", "passed", "notes"}
    assert len(r.positive_eigenvalues) == len(r.eigenvalues) - r.zero_count
