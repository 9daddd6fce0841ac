import itertools
import math

import numpy as np
import pytest

from evrec import (
    AssumptionSpec,
    FactorVector,
    Regime,
    Sample,
    eliminate_attributes,
    fit_assumption,
    fit_linear,
    rmse,
)
from evrec.errors import (
    DimensionMismatch,
    EmptyInput,
    InsufficientSamples,
    RegimeDataError,
    SingularSystem,
)
from evrec.published import SIGMA_X
from evrec.regression import predict
from helpers import ols_reference, random_factor_rows


# --- fit_linear --------------------------------------------------------------

def test_exact_line_recovery():
    X = [[0.0], [1.0], [2.0], [5.0]]
    y = [1.0, 3.0, 5.0, 11.0]
    intercept, coefs = fit_linear(X, y, ridge=0.0)
    assert intercept == pytest.approx(1.0, abs=1e-12)
    assert coefs[0] == pytest.approx(2.0, abs=1e-12)
    assert rmse(predict(intercept, coefs, X), y) == pytest.approx(0.0, abs=1e-12)


def test_duplicated_rows_leave_solution_unchanged():
    rng = np.random.default_rng(1)
    X = rng.uniform(0, 10, size=(20, 3))
    y = X @ [0.5, -0.2, 1.1] + 2.0 + rng.normal(0, 0.1, size=20)
    a = fit_linear(X, y, ridge=0.0)
    b = fit_linear(np.vstack([X, X]), np.concatenate([y, y]), ridge=0.0)
    assert a[0] == pytest.approx(b[0], abs=1e-9)
    np.testing.assert_allclose(a[1], b[1], atol=1e-9)


def test_published_coefficient_recovery_single_seed():
    rng = np.random.default_rng(42)
    X = random_factor_rows(rng, 3000)
    truth = np.array([0.5698, 0.3286, 0.0848, 0.1967, 0.07965])
    y = X @ truth - 3.0467 + rng.normal(0, 0.5, size=3000)
    intercept, coefs = fit_linear(X, y, ridge=0.0)
    np.testing.assert_allclose(coefs, truth, atol=0.05)
    assert intercept == pytest.approx(-3.0467, abs=0.3)
    # independent reference solve agrees
    ref_intercept, ref_coefs = ols_reference(X, y)
    np.testing.assert_allclose(coefs, ref_coefs, atol=1e-8)
    assert intercept == pytest.approx(ref_intercept, abs=1e-8)


def test_matches_reference_on_randomized_datasets():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = int(rng.integers(10, 51))
        k = int(rng.integers(1, 6))
        X = rng.normal(size=(n, k)) * rng.uniform(0.5, 3.0, size=k)
        y = rng.normal(size=n)
        intercept, coefs = fit_linear(X, y, ridge=0.0)
        ref_intercept, ref_coefs = ols_reference(X, y)
        assert intercept == pytest.approx(ref_intercept, abs=1e-8)
        np.testing.assert_allclose(coefs, ref_coefs, atol=1e-8)


def test_singular_data_raises():
    X = np.ones((10, 2))  # two identical constant columns
    y = np.arange(10.0)
    with pytest.raises(SingularSystem):
        fit_linear(X, y, ridge=0.0)


def test_fit_linear_input_validation():
    with pytest.raises(DimensionMismatch):
        fit_linear([[1.0], [2.0]], [1.0, 2.0, 3.0])
    with pytest.raises(InsufficientSamples):
        fit_linear([[1.0]], [1.0])
    with pytest.raises(ValueError):
        fit_linear([[1.0], [2.0]], [1.0, 2.0], ridge=-1.0)


def test_ridge_shrinks_coefficients_monotonically():
    rng = np.random.default_rng(5)
    X = rng.uniform(0, 10, size=(60, 4))
    y = X @ [1.0, -2.0, 0.5, 3.0] + rng.normal(0, 0.5, size=60)
    norms = []
    for ridge in (0.0, 1.0, 10.0, 100.0, 1e4, 1e6):
        _, coefs = fit_linear(X, y, ridge=ridge)
        norms.append(np.linalg.norm(coefs))
    assert all(a >= b for a, b in zip(norms, norms[1:]))
    assert norms[-1] < 1e-2 * norms[0]


def test_residual_orthogonality_at_zero_ridge():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n, k = 80, 4
        X = rng.normal(size=(n, k))
        y = rng.normal(size=n)
        intercept, coefs = fit_linear(X, y, ridge=0.0)
        residual = y - predict(intercept, coefs, X)
        assert np.max(np.abs(X.T @ residual)) < 1e-8 * n


def test_no_coefficient_perturbation_improves_training_rmse():
    rng = np.random.default_rng(13)
    for _ in range(20):
        X = rng.uniform(0, 10, size=(50, 3))
        y = X @ rng.normal(size=3) + rng.normal(0, 1.0, size=50)
        intercept, coefs = fit_linear(X, y, ridge=0.0)
        best = rmse(predict(intercept, coefs, X), y)
        for j in range(3):
            for eps in (-1e-3, 1e-3):
                tweaked = coefs.copy()
                tweaked[j] += eps
                assert rmse(predict(intercept, tweaked, X), y) >= best - 1e-15


# --- rmse ---------------------------------------------------------------------

def test_rmse_identical_vectors():
    assert rmse([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0


def test_rmse_derived_value():
    assert rmse([0.0, 0.0], [3.0, 4.0]) == pytest.approx(3.5355, abs=1e-4)


def test_rmse_constant_offset():
    observed = np.linspace(0, 5, 17)
    assert rmse(observed + 1.25, observed) == pytest.approx(1.25, abs=1e-12)


def test_rmse_validation():
    with pytest.raises(DimensionMismatch):
        rmse([1.0], [1.0, 2.0])
    with pytest.raises(EmptyInput):
        rmse([], [])


# --- eliminate_attributes ------------------------------------------------------

def _exhaustive_best_subset(X, y, n, names):
    """All non-empty subsets, scored by the same AIC criterion."""
    best = None
    for size in range(1, X.shape[1] + 1):
        for subset in itertools.combinations(range(X.shape[1]), size):
            cols = list(subset)
            intercept, coefs = fit_linear(X[:, cols], y, 0.0)
            residual = y - predict(intercept, coefs, X[:, cols])
            sse = float(residual @ residual)
            aic = n * math.log(max(sse, 1e-300) / n) + 2 * (len(cols) + 1)
            if best is None or aic < best[0]:
                best = (aic, tuple(names[i] for i in cols))
    return best[1]


def test_pure_noise_column_is_dropped():
    rng = np.random.default_rng(17)
    n = 1000
    X = rng.uniform(0, 10, size=(n, 4))
    y = X[:, 0] * 2.0 + X[:, 1] * -1.0 + X[:, 2] * 0.5 + rng.normal(0, 0.5, size=n)
    names = ("a", "b", "c", "noise")
    kept, _ = eliminate_attributes(X, y, 0.0, names)
    assert "noise" not in kept
    assert set(kept) == set(_exhaustive_best_subset(X, y, n, names))


def test_all_informative_attributes_survive():
    rng = np.random.default_rng(19)
    n = 500
    X = rng.uniform(0, 10, size=(n, 3))
    y = X @ [1.0, 1.5, -2.0] + rng.normal(0, 0.3, size=n)
    names = ("a", "b", "c")
    kept, _ = eliminate_attributes(X, y, 0.0, names)
    assert set(kept) == {"a", "b", "c"}
    assert set(kept) == set(_exhaustive_best_subset(X, y, n, names))


def test_never_drops_below_one_attribute():
    rng = np.random.default_rng(23)
    X = rng.normal(size=(100, 2))
    y = rng.normal(size=100)  # pure noise target
    kept, _ = eliminate_attributes(X, y, 0.0, ("a", "b"))
    assert len(kept) >= 1


# --- fit_assumption -------------------------------------------------------------

def _samples_from_matrix(X, fin, init=None, u_abs=None, u_rel=None):
    rows = []
    for i in range(X.shape[0]):
        rows.append(Sample(
            user_id=f"u{i}", event_id=f"e{i}",
            factors=FactorVector(*X[i]),
            score_fin=float(fin[i]),
            score_init=None if init is None else float(init[i]),
            u_abs=None if u_abs is None else float(u_abs[i]),
            u_rel=None if u_rel is None else float(u_rel[i]),
        ))
    return rows


def test_ia0_exact_recovery():
    rng = np.random.default_rng(29)
    X = random_factor_rows(rng, 200)
    target = 0.6 * X[:, 0] + 0.33 * X[:, 1] - 0.25
    samples = _samples_from_matrix(X, target, init=target)
    for regime in (Regime.IA0_FIN, Regime.IA0_INIT):
        result = fit_assumption(samples, AssumptionSpec(regime, ridge=0.0))
        func = result.function
        assert func.coefficients["thi"] == pytest.approx(0.6, abs=1e-9)
        assert func.coefficients["tyi"] == pytest.approx(0.33, abs=1e-9)
        assert func.intercept == pytest.approx(-0.25, abs=1e-9)
        assert result.training_rmse == pytest.approx(0.0, abs=1e-9)
        assert set(func.coefficients) == {"thi", "tyi"}


def test_iax_uses_all_five_factors():
    rng = np.random.default_rng(31)
    X = random_factor_rows(rng, 300)
    truth = np.array([0.5, 0.3, 0.1, 0.2, 0.08])
    y = X @ truth + 1.0
    result = fit_assumption(_samples_from_matrix(X, y),
                            AssumptionSpec(Regime.IAX, ridge=0.0))
    assert set(result.function.coefficients) == {"thi", "tyi", "rat", "rch", "frn"}
    for name, value in zip(("thi", "tyi", "rat", "rch", "frn"), truth):
        assert result.function.coefficients[name] == pytest.approx(value, abs=1e-9)


def test_iaxu_regimes_use_combined_factor():
    rng = np.random.default_rng(37)
    X = random_factor_rows(rng, 300)
    u_abs = rng.uniform(0, 10, size=300)
    y = 0.5 * X[:, 0] + 0.3 * X[:, 1] + 0.25 * u_abs - 1.0
    samples = _samples_from_matrix(X, y, u_abs=u_abs)
    result = fit_assumption(samples, AssumptionSpec(Regime.IAXU_ABS, ridge=0.0))
    assert result.function.coefficients["u_abs"] == pytest.approx(0.25, abs=1e-9)
    with pytest.raises(RegimeDataError):
        fit_assumption(samples, AssumptionSpec(Regime.IAXU_REL, ridge=0.0))


def test_ia0_init_requires_init_scores():
    rng = np.random.default_rng(41)
    X = random_factor_rows(rng, 50)
    samples = _samples_from_matrix(X, X[:, 0])
    with pytest.raises(RegimeDataError):
        fit_assumption(samples, AssumptionSpec(Regime.IA0_INIT))


def test_piecewise_single_branch_population_raises():
    rng = np.random.default_rng(43)
    X = random_factor_rows(rng, 60)
    X[:, 0] = 7.0  # everything lands in the middle branch
    samples = _samples_from_matrix(X, X[:, 1])
    with pytest.raises(InsufficientSamples):
        fit_assumption(samples, AssumptionSpec(Regime.IAXD_THI, ridge=0.0))


def test_piecewise_threshold_routing():
    rng = np.random.default_rng(47)
    X = random_factor_rows(rng, 600)
    # piecewise ground truth with distinct intercepts per branch
    intercepts = np.where(X[:, 0] < 6, 1.0, np.where(X[:, 0] < 8, 2.0, 3.0))
    y = 0.4 * X[:, 0] + intercepts
    samples = _samples_from_matrix(X, y)
    result = fit_assumption(samples, AssumptionSpec(Regime.IAXD_THI, ridge=0.0))
    func = result.function
    assert func.is_piecewise and len(func.pieces) == 3
    assert result.training_rmse == pytest.approx(0.0, abs=1e-8)
    # branch membership: 5.999 -> first, 6 -> second, 8 -> third
    assert func.piece_for(5.999) is func.pieces[0]
    assert func.piece_for(6.0) is func.pieces[1]
    assert func.piece_for(7.999) is func.pieces[1]
    assert func.piece_for(8.0) is func.pieces[2]
    assert func.piece_for(10.0) is func.pieces[2]
    for piece, expected in zip(func.pieces, (1.0, 2.0, 3.0)):
        assert piece.intercept == pytest.approx(expected, abs=1e-8)


def test_piecewise_fit_equals_independent_branch_fits():
    rng = np.random.default_rng(53)
    X = random_factor_rows(rng, 400)
    y = X @ [0.3, 0.2, 0.1, 0.15, 0.1] + rng.normal(0, 0.5, size=400)
    samples = _samples_from_matrix(X, y)
    spec = AssumptionSpec(Regime.IAXD_TYI, ridge=1e-8)
    result = fit_assumption(samples, spec)
    masks = [X[:, 1] < 6, (X[:, 1] >= 6) & (X[:, 1] < 8), X[:, 1] >= 8]
    for piece, mask in zip(result.function.pieces, masks):
        intercept, coefs = fit_linear(X[mask], y[mask], ridge=1e-8)
        assert piece.intercept == pytest.approx(intercept, abs=1e-12)
        for name, value in zip(("thi", "tyi", "rat", "rch", "frn"), coefs):
            assert piece.coefficients[name] == pytest.approx(value, abs=1e-12)


def test_attribute_selection_drops_noise_inside_regime_fit():
    rng = np.random.default_rng(59)
    X = random_factor_rows(rng, 2000)
    # frn never enters the target: selection should drop it
    y = X[:, :4] @ [0.6, 0.3, 0.1, 0.2] + rng.normal(0, 0.4, size=2000)
    samples = _samples_from_matrix(X, y)
    spec = AssumptionSpec(Regime.IAX, ridge=0.0, attribute_selection=True)
    result = fit_assumption(samples, spec)
    assert "frn" in result.dropped_attributes
    assert "frn" not in result.function.coefficients


def test_assumption_spec_validation():
    with pytest.raises(ValueError):
        AssumptionSpec(Regime.IAX, thresholds=(8.0, 6.0))
    with pytest.raises(ValueError):
        AssumptionSpec(Regime.IAX, ridge=-1e-9)
    with pytest.raises(ValueError):
        fit_assumption(
            _samples_from_matrix(random_factor_rows(np.random.default_rng(0), 50),
                                 np.zeros(50)),
            AssumptionSpec(Regime.IAXD_THI, thresholds=(0.0, 8.0)),
        )
