"""HEMS toolkit: collaborative forecasting, flexibility surrogates, scheduling."""

from ._core import (  # noqa: F401
    BatteryConfig,
    DeviceFleet,
    EwhConfig,
    FlexProblem,
    QuantileGbtModel,
    Schedule,
    ShiftableConfig,
    SvddModel,
    Tariff,
    VarModel,
    VirtualBattery,
    check_feasible,
    crps_from_quantiles,
    default_quantile_grid,
    epso_sample,
    fit_quantile_gbt,
    fit_var_centralized,
    fit_var_consensus,
    fit_var_sharing,
    forecast_var,
    improvement,
    lambda_max,
    mae,
    make_flex_problem,
    make_heteroscedastic,
    make_var_panel,
    optimize_schedule,
    pinball,
    predict_quantiles,
    rmse,
    schedule_cost,
    soft_threshold,
    svdd_fit,
    svdd_is_feasible,
    svdd_radius2,
    vbattery_fit,
    vbattery_is_feasible,
)

__all__ = [name for name in dir() if not name.startswith("_")]
