from lacflow.regression.fitting import CoefficientFit, fit_model_coefficients
from lacflow.regression.ols import FitResult, anova_sequential, ols_fit, variance_inflation_factors

__all__ = [
    "CoefficientFit",
    "FitResult",
    "fit_model_coefficients",
    "ols_fit",
    "anova_sequential",
    "variance_inflation_factors",
]
